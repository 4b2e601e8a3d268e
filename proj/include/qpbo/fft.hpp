#pragma once

// Thin RAII wrapper over FFTW for square 2-D complex transforms.
//
// Plans are created with FFTW_ESTIMATE so that the same size always yields
// the same plan (and bit-identical output) regardless of machine load.
// Each thread keeps its own plan/buffer cache; plan creation itself is
// serialized because the FFTW planner is not thread-safe.

#include <fftw3.h>

#include <complex>
#include <cstddef>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <vector>

namespace qpbo::fft {

using cplx = std::complex<double>;

inline std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

class Plan2d {
 public:
  explicit Plan2d(int size) : size_(size) {
    const std::size_t n = static_cast<std::size_t>(size) * size;
    buf_ = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * n));
    std::lock_guard lock(planner_mutex());
    fwd_ = fftw_plan_dft_2d(size, size, buf_, buf_, FFTW_FORWARD, FFTW_ESTIMATE);
    bwd_ = fftw_plan_dft_2d(size, size, buf_, buf_, FFTW_BACKWARD, FFTW_ESTIMATE);
  }
  ~Plan2d() {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(fwd_);
    fftw_destroy_plan(bwd_);
    fftw_free(buf_);
  }
  Plan2d(const Plan2d&) = delete;
  Plan2d& operator=(const Plan2d&) = delete;

  int size() const { return size_; }

  std::span<cplx> buffer() {
    return {reinterpret_cast<cplx*>(buf_), static_cast<std::size_t>(size_) * size_};
  }

  // In-place on buffer(). Unnormalized: forward uses e^{-2 pi i k j / M}.
  void forward() { fftw_execute(fwd_); }
  void backward() { fftw_execute(bwd_); }

 private:
  int size_;
  fftw_complex* buf_ = nullptr;
  fftw_plan fwd_ = nullptr;
  fftw_plan bwd_ = nullptr;
};

inline Plan2d& plan(int size) {
  thread_local std::map<int, std::unique_ptr<Plan2d>> cache;
  auto it = cache.find(size);
  if (it == cache.end()) it = cache.emplace(size, std::make_unique<Plan2d>(size)).first;
  return *it->second;
}

// Smallest even integer >= n whose only prime factors are 2, 3 and 5.
inline int nice_size(int n) {
  if (n < 2) n = 2;
  for (int m = n + (n % 2);; m += 2) {
    int r = m;
    for (int p : {2, 3, 5})
      while (r % p == 0) r /= p;
    if (r == 1) return m;
  }
}

}  // namespace qpbo::fft
