#pragma once

// Spatial norms on T^2 and spacetime norms over trajectories.
// p = infinity is spelled with std::numeric_limits<double>::infinity().

#include <cmath>
#include <limits>
#include <span>

#include "multipliers.hpp"
#include "trajectory.hpp"

namespace qpbo {

inline constexpr double inf = std::numeric_limits<double>::infinity();

namespace detail {
inline void require_exponent(double p) {
  if (!(p >= 1.0)) throw DomainError("Lebesgue exponent must be in [1, inf]");
}
}  // namespace detail

// Riemann sum of |u|^p over the uniform grid (exact trapezoid on the torus);
// p = inf is the grid maximum. grid == 0 uses the lattice grid.
inline double lp_norm(const PhysicalGrid& g, double p) {
  detail::require_exponent(p);
  if (std::isinf(p)) return g.max_abs();
  double s = 0.0;
  if (p == 2.0) {
    for (const auto& z : g.values) s += std::norm(z);
    return std::sqrt(s / static_cast<double>(g.values.size()));
  }
  for (const auto& z : g.values) s += std::pow(std::abs(z), p);
  return std::pow(s / static_cast<double>(g.values.size()), 1.0 / p);
}

inline double lp_norm(const SpectralField& f, double p, int grid = 0) {
  detail::require_exponent(p);
  return lp_norm(sample(f, grid), p);
}

// ||<d_x>^{s1} u||_p + ||<d_y>^{s2} u||_p
inline double anisotropic_norm(const SpectralField& f, double s1, double s2, double p, int grid = 0) {
  return lp_norm(bracket_dx(f, s1), p, grid) + lp_norm(bracket_dy(f, s2), p, grid);
}

// ||<grad>^sigma <d_x> u||_2 + ||<grad>^sigma d_x^{-1} u||_2 (mean annihilated
// in the second term by the inverse derivative).
inline double y_norm(const SpectralField& f, double sigma) {
  const SpectralField g = bracket_nabla(f, sigma);
  return bracket_dx(g, 1.0).norm2() + d_x_inverse(g).norm2();
}

// ||(<d_x>^{s1} + <d_y>^{s2}) u||_2 + ||<d_y>^{s2} d_x^{-1} u||_2
inline double x_norm(const SpectralField& f, double s1, double s2) {
  detail::require_order(s1, "x_norm");
  detail::require_order(s2, "x_norm");
  const SpectralField a = apply_multiplier(f, [s1, s2](double x1, double x2) {
    return std::pow(1.0 + x1 * x1, 0.5 * s1) + std::pow(1.0 + x2 * x2, 0.5 * s2);
  });
  return a.norm2() + bracket_dy(d_x_inverse(f), s2).norm2();
}

// Symmetric Sobolev norm ||<grad>^s u||_2.
inline double sobolev_norm(const SpectralField& f, double s) { return bracket_nabla(f, s).norm2(); }

// L^p in time of a scalar series: composite trapezoid of |v|^p, max for inf.
inline double time_norm(std::span<const double> t, std::span<const double> v, double p) {
  detail::require_exponent(p);
  if (t.size() != v.size()) throw MismatchError("time_norm: length mismatch");
  if (t.empty()) throw PreconditionError("time_norm: empty series");
  if (std::isinf(p)) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
  }
  double s = 0.0;
  for (std::size_t i = 1; i < t.size(); ++i)
    s += 0.5 * (t[i] - t[i - 1]) * (std::pow(std::abs(v[i - 1]), p) + std::pow(std::abs(v[i]), p));
  return std::pow(s, 1.0 / p);
}

// ||u||_{L^p_t L^q_x} over the trajectory span.
inline double mixed_spacetime_norm(const Trajectory& traj, double p, double q, int grid = 0) {
  if (traj.empty()) throw PreconditionError("mixed_spacetime_norm: empty trajectory");
  std::vector<double> v(traj.size());
  for (std::size_t i = 0; i < traj.size(); ++i) v[i] = lp_norm(traj.states[i], q, grid);
  return time_norm(traj.times, v, p);
}

// ||u||_{L^4 L^inf} + ||u||_{L^inf L^2}
inline double strichartz_norm(const Trajectory& traj, int grid = 0) {
  return mixed_spacetime_norm(traj, 4.0, inf, grid) + mixed_spacetime_norm(traj, inf, 2.0, grid);
}

}  // namespace qpbo
