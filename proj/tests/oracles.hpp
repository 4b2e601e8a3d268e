#pragma once

// Independent reference computations for the tests. Nothing here goes
// through FFTW: direct trigonometric sums and O(N^2) convolutions only.

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include <qpbo/spectral_core.hpp>

namespace oracle {

using qpbo::cplx;
using qpbo::Lattice;
using qpbo::SpectralField;

// u(x) at an arbitrary point by direct summation.
inline cplx eval_at(const SpectralField& f, double x1, double x2) {
  const Lattice& lat = f.lattice();
  cplx s{};
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (f[i] == cplx{}) continue;
    const auto m = lat.mode(i);
    s += f[i] * std::polar(1.0, 2.0 * std::numbers::pi * (m.n1 * x1 + m.n2 * x2));
  }
  return s;
}

// Samples on an M x M grid via direct sums (row-major, x1 slow).
inline std::vector<cplx> direct_samples(const SpectralField& f, int M) {
  std::vector<cplx> v(static_cast<std::size_t>(M) * M);
  for (int j1 = 0; j1 < M; ++j1)
    for (int j2 = 0; j2 < M; ++j2) v[static_cast<std::size_t>(j1) * M + j2] = eval_at(f, double(j1) / M, double(j2) / M);
  return v;
}

// Coefficients of fg restricted to the block: sum_{a+b=n} f(a) g(b).
inline SpectralField convolve(const SpectralField& f, const SpectralField& g) {
  const Lattice& lat = f.lattice();
  SpectralField h(lat);
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (f[i] == cplx{}) continue;
    const auto a = lat.mode(i);
    for (std::size_t j = 0; j < g.size(); ++j) {
      const auto b = lat.mode(j);
      const int n1 = a.n1 + b.n1, n2 = a.n2 + b.n2;
      if (lat.contains(n1, n2)) h[lat.index(n1, n2)] += f[i] * g[j];
    }
  }
  return h;
}

// Torus integral of a pointwise function of several fields, by direct
// sampling on an M x M grid.
template <class Fn>
double quadrature(const std::vector<const SpectralField*>& fs, int M, Fn&& fn) {
  std::vector<std::vector<cplx>> samples;
  for (auto* f : fs) samples.push_back(direct_samples(*f, M));
  double s = 0.0;
  std::vector<double> vals(fs.size());
  for (std::size_t k = 0; k < samples[0].size(); ++k) {
    for (std::size_t j = 0; j < fs.size(); ++j) vals[j] = samples[j][k].real();
    s += fn(vals);
  }
  return s / (static_cast<double>(M) * M);
}

inline double max_abs_diff(const SpectralField& a, const SpectralField& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}

}  // namespace oracle
