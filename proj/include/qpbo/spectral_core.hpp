#pragma once

// Lattice bookkeeping and the Fourier representation of functions on T^2.
//
// Convention: u(x) = sum_n uhat(n) exp(2 pi i n.x), n in [-nmax, nmax]^2.
// The tangential/normal frequencies of a mode are xi1 = omega.n and
// xi2 = omega_perp.n, omega_perp = (omega2, -omega1).
//
// Coefficients are stored densely, row-major with n1 as the slow index.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <initializer_list>
#include <numbers>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "fft.hpp"

namespace qpbo {

using cplx = std::complex<double>;

struct Mode {
  int n1 = 0;
  int n2 = 0;
  friend bool operator==(const Mode&, const Mode&) = default;
};

class FrequencyVector {
 public:
  FrequencyVector(double w1, double w2) : w1_(w1), w2_(w2) {
    if (!std::isfinite(w1) || !std::isfinite(w2))
      throw DomainError("frequency vector must be finite");
    if (w1 == 0.0 && w2 == 0.0) throw DomainError("frequency vector must be nonzero");
  }

  double w1() const { return w1_; }
  double w2() const { return w2_; }
  double perp1() const { return w2_; }
  double perp2() const { return -w1_; }
  double norm() const { return std::hypot(w1_, w2_); }

  double xi1(int n1, int n2) const { return w1_ * n1 + w2_ * n2; }
  double xi2(int n1, int n2) const { return w2_ * n1 - w1_ * n2; }

  FrequencyVector normalized() const {
    const double r = norm();
    return {w1_ / r, w2_ / r};
  }

  // (1, 1/phi) scaled to unit length. Badly approximable slope.
  static FrequencyVector golden() {
    return FrequencyVector(1.0, 1.0 / std::numbers::phi).normalized();
  }

  friend bool operator==(const FrequencyVector&, const FrequencyVector&) = default;

 private:
  double w1_;
  double w2_;
};

class Lattice {
 public:
  // grid == 0 picks a default: the smallest 2-3-5 smooth even size >= 4*nmax
  // (and >= 2*nmax+1).
  Lattice(FrequencyVector omega, int nmax, int grid = 0) : omega_(omega), nmax_(nmax) {
    if (nmax < 0) throw DomainError("nmax must be >= 0");
    grid_ = grid == 0 ? fft::nice_size(std::max(4 * nmax, 2 * nmax + 1)) : grid;
    if (grid_ <= 0 || grid_ % 2 != 0) throw DomainError("grid size must be a positive even integer");
    if (grid_ < 2 * nmax + 1)
      throw DomainError("grid size " + std::to_string(grid_) + " cannot host modes up to nmax " +
                        std::to_string(nmax));
  }

  const FrequencyVector& omega() const { return omega_; }
  int nmax() const { return nmax_; }
  int grid() const { return grid_; }
  int side() const { return 2 * nmax_ + 1; }
  std::size_t size() const { return static_cast<std::size_t>(side()) * side(); }

  bool contains(int n1, int n2) const {
    return std::abs(n1) <= nmax_ && std::abs(n2) <= nmax_;
  }
  std::size_t index(int n1, int n2) const {
    return static_cast<std::size_t>(n1 + nmax_) * side() + static_cast<std::size_t>(n2 + nmax_);
  }
  Mode mode(std::size_t idx) const {
    const int s = side();
    return {static_cast<int>(idx / s) - nmax_, static_cast<int>(idx % s) - nmax_};
  }
  // index of -n given index of n
  std::size_t mirror(std::size_t idx) const { return size() - 1 - idx; }

  double xi1(int n1, int n2) const { return omega_.xi1(n1, n2); }
  double xi2(int n1, int n2) const { return omega_.xi2(n1, n2); }
  double xi1(std::size_t idx) const {
    const Mode m = mode(idx);
    return xi1(m.n1, m.n2);
  }
  double xi2(std::size_t idx) const {
    const Mode m = mode(idx);
    return xi2(m.n1, m.n2);
  }

  // Largest r such that the box |xi1| <= r, |xi2| <= r lies inside the block.
  double box_capacity() const {
    const double w1 = omega_.w1(), w2 = omega_.w2();
    return nmax_ * (w1 * w1 + w2 * w2) / (std::abs(w1) + std::abs(w2));
  }

  Lattice with_nmax(int nmax, int grid = 0) const { return Lattice(omega_, nmax, grid); }

  friend bool operator==(const Lattice&, const Lattice&) = default;

 private:
  FrequencyVector omega_;
  int nmax_;
  int grid_;
};

class SpectralField {
 public:
  explicit SpectralField(Lattice lat) : lat_(std::move(lat)), c_(lat_.size(), cplx{}) {}
  SpectralField(Lattice lat, std::vector<cplx> coeffs) : lat_(std::move(lat)), c_(std::move(coeffs)) {
    if (c_.size() != lat_.size()) throw MismatchError("coefficient count does not match lattice block");
  }

  const Lattice& lattice() const { return lat_; }
  std::span<const cplx> coeffs() const { return c_; }
  std::span<cplx> coeffs() { return c_; }
  std::size_t size() const { return c_.size(); }

  cplx operator[](std::size_t i) const { return c_[i]; }
  cplx& operator[](std::size_t i) { return c_[i]; }

  cplx at(int n1, int n2) const {
    if (!lat_.contains(n1, n2)) throw OutOfRangeError("mode outside the lattice block");
    return c_[lat_.index(n1, n2)];
  }
  cplx& at(int n1, int n2) {
    if (!lat_.contains(n1, n2)) throw OutOfRangeError("mode outside the lattice block");
    return c_[lat_.index(n1, n2)];
  }

  cplx mean() const { return c_[lat_.index(0, 0)]; }

  // max_n |uhat(n) - conj(uhat(-n))|
  double hermitian_defect() const {
    double d = 0.0;
    for (std::size_t i = 0; i < c_.size(); ++i)
      d = std::max(d, std::abs(c_[i] - std::conj(c_[lat_.mirror(i)])));
    return d;
  }
  double max_abs() const {
    double m = 0.0;
    for (const auto& z : c_) m = std::max(m, std::abs(z));
    return m;
  }
  // Exact Hermitian symmetry when tol == 0; otherwise relative to max |uhat|.
  bool is_real(double tol = 0.0) const { return hermitian_defect() <= tol * max_abs(); }

  SpectralField& symmetrize() {
    for (std::size_t i = 0; i < c_.size(); ++i) {
      const std::size_t j = lat_.mirror(i);
      if (j < i) continue;
      const cplx a = 0.5 * (c_[i] + std::conj(c_[j]));
      c_[i] = a;
      c_[j] = std::conj(a);
    }
    return *this;
  }

  // Sum |uhat|^2, equal to the L2(T^2) norm squared.
  double norm2_sq() const {
    double s = 0.0;
    for (const auto& z : c_) s += std::norm(z);
    return s;
  }
  double norm2() const { return std::sqrt(norm2_sq()); }

  bool all_finite() const {
    for (const auto& z : c_)
      if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) return false;
    return true;
  }

  SpectralField& operator+=(const SpectralField& o) {
    check_same(o);
    for (std::size_t i = 0; i < c_.size(); ++i) c_[i] += o.c_[i];
    return *this;
  }
  SpectralField& operator-=(const SpectralField& o) {
    check_same(o);
    for (std::size_t i = 0; i < c_.size(); ++i) c_[i] -= o.c_[i];
    return *this;
  }
  SpectralField& operator*=(cplx a) {
    for (auto& z : c_) z *= a;
    return *this;
  }
  // this += a * o
  SpectralField& axpy(cplx a, const SpectralField& o) {
    check_same(o);
    for (std::size_t i = 0; i < c_.size(); ++i) c_[i] += a * o.c_[i];
    return *this;
  }

  friend SpectralField operator+(SpectralField a, const SpectralField& b) { return a += b; }
  friend SpectralField operator-(SpectralField a, const SpectralField& b) { return a -= b; }
  friend SpectralField operator*(cplx s, SpectralField a) { return a *= s; }
  friend SpectralField operator*(SpectralField a, cplx s) { return a *= s; }
  friend SpectralField operator-(SpectralField a) { return a *= -1.0; }

  void check_same(const SpectralField& o) const {
    if (!(lat_ == o.lat_)) throw MismatchError("fields live on different lattices");
  }

 private:
  Lattice lat_;
  std::vector<cplx> c_;
};

inline void require_same_lattice(const SpectralField& a, const SpectralField& b) { a.check_same(b); }

// Physical samples u(j1/M, j2/M), row-major with j1 slow.
struct PhysicalGrid {
  int size = 0;
  std::vector<cplx> values;

  cplx operator()(int j1, int j2) const { return values[static_cast<std::size_t>(j1) * size + j2]; }
  double max_abs() const {
    double m = 0.0;
    for (const auto& z : values) m = std::max(m, std::abs(z));
    return m;
  }
};

inline SpectralField make_field_from_modes(const Lattice& lat,
                                           std::span<const std::pair<Mode, cplx>> modes) {
  SpectralField f(lat);
  for (const auto& [m, z] : modes) {
    if (!lat.contains(m.n1, m.n2))
      throw OutOfRangeError("mode (" + std::to_string(m.n1) + "," + std::to_string(m.n2) +
                            ") outside block of nmax " + std::to_string(lat.nmax()));
    f[lat.index(m.n1, m.n2)] += z;
  }
  return f;
}

inline SpectralField make_field_from_modes(const Lattice& lat,
                                           std::initializer_list<std::pair<Mode, cplx>> modes) {
  return make_field_from_modes(lat, std::span<const std::pair<Mode, cplx>>(modes.begin(), modes.size()));
}

// Single exponential e_k.
inline SpectralField unit_mode(const Lattice& lat, int n1, int n2) {
  return make_field_from_modes(lat, {{Mode{n1, n2}, cplx{1.0, 0.0}}});
}

inline SpectralField constant_field(const Lattice& lat, cplx c) {
  SpectralField f(lat);
  f[lat.index(0, 0)] = c;
  return f;
}

namespace detail {

inline int wrap(int n, int m) { return ((n % m) + m) % m; }

// Scatter coefficients into an M x M buffer and inverse transform.
inline void load_and_synthesize(const SpectralField& f, fft::Plan2d& p) {
  const Lattice& lat = f.lattice();
  const int M = p.size();
  auto buf = p.buffer();
  std::fill(buf.begin(), buf.end(), cplx{});
  const int N = lat.nmax();
  for (int n1 = -N; n1 <= N; ++n1)
    for (int n2 = -N; n2 <= N; ++n2)
      buf[static_cast<std::size_t>(wrap(n1, M)) * M + wrap(n2, M)] += f[lat.index(n1, n2)];
  p.backward();
}

// Forward transform the buffer and gather the block of `lat`.
inline SpectralField analyze_and_gather(fft::Plan2d& p, const Lattice& lat) {
  const int M = p.size();
  p.forward();
  auto buf = p.buffer();
  const double scale = 1.0 / (static_cast<double>(M) * M);
  SpectralField f(lat);
  const int N = lat.nmax();
  for (int n1 = -N; n1 <= N; ++n1)
    for (int n2 = -N; n2 <= N; ++n2)
      f[lat.index(n1, n2)] = buf[static_cast<std::size_t>(wrap(n1, M)) * M + wrap(n2, M)] * scale;
  return f;
}

}  // namespace detail

// Samples of the trigonometric polynomial on an M x M grid (M >= 2*nmax+1;
// M == 0 means the lattice grid).
inline PhysicalGrid sample(const SpectralField& f, int M = 0) {
  if (M == 0) M = f.lattice().grid();
  if (M < 2 * f.lattice().nmax() + 1) throw MismatchError("sampling grid too small for the block");
  auto& p = fft::plan(M);
  detail::load_and_synthesize(f, p);
  auto buf = p.buffer();
  return PhysicalGrid{M, std::vector<cplx>(buf.begin(), buf.end())};
}

// Discrete Fourier coefficients of grid samples, restricted to the block.
inline SpectralField project_samples(const PhysicalGrid& g, const Lattice& lat) {
  if (g.size < 2 * lat.nmax() + 1 || g.values.size() != static_cast<std::size_t>(g.size) * g.size)
    throw MismatchError("grid too small or malformed for the lattice block");
  auto& p = fft::plan(g.size);
  auto buf = p.buffer();
  std::copy(g.values.begin(), g.values.end(), buf.begin());
  return detail::analyze_and_gather(p, lat);
}

inline PhysicalGrid to_physical(const SpectralField& f) { return sample(f, f.lattice().grid()); }

inline SpectralField to_spectral(const PhysicalGrid& g, const Lattice& lat) {
  if (g.size != lat.grid())
    throw MismatchError("grid has size " + std::to_string(g.size) + ", lattice expects " +
                        std::to_string(lat.grid()));
  return project_samples(g, lat);
}

// Grid on which the pointwise product of k block fields has no aliasing on
// retained modes.
inline int dealias_size(int nmax, int factors = 2) {
  return fft::nice_size((factors + 1) * nmax + 1);
}

// Pointwise product of band-limited fields restricted to the block. With
// dealias the product is evaluated on a zero-padded grid so every retained
// mode equals the exact convolution; without it the lattice grid is used
// and aliases fold back.
inline SpectralField pointwise_multiply(const SpectralField& f, const SpectralField& g, bool dealias = true) {
  require_same_lattice(f, g);
  const Lattice& lat = f.lattice();
  const int M = dealias ? std::max(dealias_size(lat.nmax(), 2), 2 * lat.nmax() + 1) : lat.grid();
  PhysicalGrid a = sample(f, M);
  PhysicalGrid b = sample(g, M);
  for (std::size_t i = 0; i < a.values.size(); ++i) a.values[i] *= b.values[i];
  return project_samples(a, lat);
}

// Product of several fields, dealiased for the number of factors.
inline SpectralField multiply_all(std::span<const SpectralField> fs) {
  if (fs.empty()) throw PreconditionError("multiply_all needs at least one factor");
  const Lattice& lat = fs[0].lattice();
  for (const auto& f : fs) require_same_lattice(fs[0], f);
  const int k = static_cast<int>(fs.size());
  const int M = std::max(dealias_size(lat.nmax(), k), 2 * lat.nmax() + 1);
  PhysicalGrid acc = sample(fs[0], M);
  for (int j = 1; j < k; ++j) {
    PhysicalGrid b = sample(fs[j], M);
    for (std::size_t i = 0; i < acc.values.size(); ++i) acc.values[i] *= b.values[i];
  }
  return project_samples(acc, lat);
}

// Torus integral of a product of block fields, exact: the zero mode of a
// k-fold product is alias-free on any grid with M > k*nmax.
inline cplx integrate_product(std::span<const SpectralField> fs) {
  if (fs.empty()) throw PreconditionError("integrate_product needs at least one factor");
  const Lattice& lat = fs[0].lattice();
  for (const auto& f : fs) require_same_lattice(fs[0], f);
  const int k = static_cast<int>(fs.size());
  if (k == 1) return fs[0].mean();
  const int M = fft::nice_size(k * lat.nmax() + 1);
  PhysicalGrid acc = sample(fs[0], M);
  for (int j = 1; j < k; ++j) {
    PhysicalGrid b = sample(fs[j], M);
    for (std::size_t i = 0; i < acc.values.size(); ++i) acc.values[i] *= b.values[i];
  }
  cplx s{};
  for (const auto& z : acc.values) s += z;
  return s / (static_cast<double>(M) * M);
}

inline cplx integrate_product(std::initializer_list<SpectralField> fs) {
  return integrate_product(std::span<const SpectralField>(fs.begin(), fs.size()));
}

// Pointwise map on a padded grid, then truncation to the block. Used for
// non-polynomial functions (exponentials), where the output is not
// band-limited and the padding controls spill.
template <class Fn>
SpectralField apply_pointwise(const SpectralField& f, Fn&& fn, int M) {
  PhysicalGrid g = sample(f, M);
  for (auto& z : g.values) z = fn(z);
  return project_samples(g, f.lattice());
}

// Copy into a lattice with a different nmax (same omega): zero-extend or
// truncate.
inline SpectralField embed(const SpectralField& f, const Lattice& target) {
  if (!(f.lattice().omega() == target.omega())) throw MismatchError("embed: frequency vectors differ");
  SpectralField g(target);
  const int N = std::min(f.lattice().nmax(), target.nmax());
  for (int n1 = -N; n1 <= N; ++n1)
    for (int n2 = -N; n2 <= N; ++n2) g[target.index(n1, n2)] = f[f.lattice().index(n1, n2)];
  return g;
}

inline double distance(const SpectralField& a, const SpectralField& b) { return (a - b).norm2(); }

}  // namespace qpbo
