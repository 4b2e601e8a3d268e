#pragma once

// Galerkin-truncated BO / KdV / dNLS flows on the lattice block.
//
//   BO    u_t = -P_n H u_xx + P_n d_x(P_n u P_n u)
//   KdV   u_t = -u_xxx + P_n(P_n u d_x P_n u)
//   dNLS  u_t =  i u_xx + P_n(P_n u d_x P_n u)
//
// P_n is the sharp box |xi1| <= n, |xi2| <= n. The linear part is diagonal
// and handled exactly by the exponential integrators.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "multipliers.hpp"
#include "norms.hpp"
#include "trajectory.hpp"

namespace qpbo {

enum class Integrator { IFRK4, ETDRK4 };

inline Integrator integrator_from_string(std::string_view s) {
  if (s == "IFRK4" || s == "ifrk4") return Integrator::IFRK4;
  if (s == "ETDRK4" || s == "etdrk4") return Integrator::ETDRK4;
  throw DomainError("unknown integrator '" + std::string(s) + "'");
}
inline const char* to_string(Integrator i) { return i == Integrator::IFRK4 ? "IFRK4" : "ETDRK4"; }

struct SimulationConfig {
  Model model = Model::BO;
  double truncation = 0.0;  // P_n radius; <= 0 means the lattice box capacity
  double delta = -1.0;      // data regularization P_{delta^{1/s1}, delta^{1/s2}}; < 0 disables
  double s1 = 2.0;
  double s2 = 1.0;
  double sigma = 0.9;
  double t_end = 1.0;
  double dt = 1e-3;
  Integrator integrator = Integrator::IFRK4;
  int cadence = 1;  // record every cadence-th step
  bool nonlinear = true;
  std::uint64_t seed = 0;

  double truncation_for(const Lattice& lat) const { return truncation > 0.0 ? truncation : lat.box_capacity(); }

  void validate(const Lattice& lat) const {
    if (!(dt > 0.0) || !std::isfinite(dt)) throw ConfigError("dt", "must be finite and > 0");
    if (!(t_end > 0.0) || !std::isfinite(t_end)) throw ConfigError("t_end", "must be finite and > 0");
    if (cadence < 1) throw ConfigError("cadence", "must be >= 1");
    if (!(s1 > 0.0)) throw ConfigError("s1", "must be > 0");
    if (!(s2 > 0.0)) throw ConfigError("s2", "must be > 0");
    if (!(sigma >= 0.0)) throw ConfigError("sigma", "must be >= 0");
    const double n = truncation_for(lat);
    if (n > lat.box_capacity() * (1.0 + 1e-12))
      throw ConfigError("truncation", "exceeds the lattice box capacity " + std::to_string(lat.box_capacity()));
    if (delta >= 0.0 && delta > n) throw ConfigError("delta", "must not exceed the truncation");
  }
};

class DivergedError : public std::runtime_error {
 public:
  DivergedError(double t, SpectralField last_good)
      : std::runtime_error("non-finite state after t = " + std::to_string(t)), t_(t), last_(std::move(last_good)) {}
  double time() const { return t_; }
  const SpectralField& last_good_state() const { return last_; }

 private:
  double t_;
  SpectralField last_;
};

// The semi-discrete system: mask of P_n, linear symbol, nonlinearity.
class GalerkinSystem {
 public:
  GalerkinSystem(const Lattice& lat, const SimulationConfig& cfg)
      : lat_(lat), model_(cfg.model), nonlinear_(cfg.nonlinear), n_(cfg.truncation_for(lat)),
        mask_(lat.size()), L_(lat.size()), xi1_(lat.size()) {
    for (std::size_t i = 0; i < lat.size(); ++i) {
      const double x1 = lat.xi1(i), x2 = lat.xi2(i);
      mask_[i] = (std::abs(x1) <= n_ && std::abs(x2) <= n_) ? 1.0 : 0.0;
      L_[i] = linear_symbol(model_, x1);
      xi1_[i] = x1;
    }
    M_ = std::max(dealias_size(lat.nmax(), 2), 2 * lat.nmax() + 1);
  }

  const Lattice& lattice() const { return lat_; }
  Model model() const { return model_; }
  double truncation() const { return n_; }
  std::span<const cplx> linear() const { return L_; }

  SpectralField project_n(const SpectralField& u) const {
    SpectralField v = u;
    for (std::size_t i = 0; i < v.size(); ++i) v[i] *= mask_[i];
    return v;
  }

  // Nonlinear part (already P_n projected on input and output).
  SpectralField nonlinear(const SpectralField& u_in) const {
    if (!nonlinear_) return SpectralField(lat_);
    const SpectralField u = project_n(u_in);
    PhysicalGrid a = sample(u, M_);
    if (model_ == Model::BO) {
      for (auto& z : a.values) z *= z;
      SpectralField sq = project_samples(a, lat_);
      for (std::size_t i = 0; i < sq.size(); ++i) sq[i] *= cplx(0.0, xi1_[i]) * mask_[i];
      return sq;
    }
    SpectralField ux(lat_);
    for (std::size_t i = 0; i < ux.size(); ++i) ux[i] = cplx(0.0, xi1_[i]) * u[i];
    const PhysicalGrid b = sample(ux, M_);
    for (std::size_t k = 0; k < a.values.size(); ++k) a.values[k] *= b.values[k];
    SpectralField p = project_samples(a, lat_);
    for (std::size_t i = 0; i < p.size(); ++i) p[i] *= mask_[i];
    return p;
  }

  SpectralField rhs(const SpectralField& u) const {
    SpectralField r = nonlinear(u);
    for (std::size_t i = 0; i < r.size(); ++i) r[i] -= L_[i] * mask_[i] * u[i];
    return r;
  }

 private:
  Lattice lat_;
  Model model_;
  bool nonlinear_;
  double n_;
  std::vector<double> mask_;
  std::vector<cplx> L_;
  std::vector<double> xi1_;
  int M_;
};

inline SpectralField rhs(const SpectralField& u, const SimulationConfig& cfg) {
  return GalerkinSystem(u.lattice(), cfg).rhs(u);
}

inline SpectralField regularize_initial_data(const SpectralField& u0, double delta, double s1, double s2) {
  if (!(delta >= 0.0)) throw DomainError("regularization parameter delta must be >= 0");
  if (!(s1 > 0.0) || !(s2 > 0.0)) throw DomainError("regularization orders must be > 0");
  return project_box(u0, std::pow(delta, 1.0 / s1), std::pow(delta, 1.0 / s2));
}

// Default delta(n) schedule n^beta.
inline double delta_schedule(double n, double beta = 0.5) { return std::pow(n, beta); }

namespace detail {

inline void diag_mul(SpectralField& u, std::span<const cplx> d) {
  for (std::size_t i = 0; i < u.size(); ++i) u[i] *= d[i];
}

class Stepper {
 public:
  Stepper(const GalerkinSystem& sys, Integrator kind, double dt) : sys_(sys), kind_(kind), dt_(dt) {
    const auto L = sys.linear();
    const std::size_t n = L.size();
    E_.resize(n);
    E2_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      E_[i] = std::exp(-0.5 * dt * L[i]);
      E2_[i] = E_[i] * E_[i];
    }
    if (kind == Integrator::ETDRK4) init_etd(L);
  }

  SpectralField step(const SpectralField& u) const {
    return kind_ == Integrator::IFRK4 ? step_if(u) : step_etd(u);
  }

 private:
  // Integrating-factor RK4 in the Kassam-Trefethen form.
  SpectralField step_if(const SpectralField& u) const {
    const double h = dt_;
    const SpectralField a = sys_.nonlinear(u);
    SpectralField u2 = u;
    u2.axpy(0.5 * h, a);
    diag_mul(u2, E_);
    const SpectralField b = sys_.nonlinear(u2);
    SpectralField u3 = u;
    diag_mul(u3, E_);
    u3.axpy(0.5 * h, b);
    const SpectralField c = sys_.nonlinear(u3);
    SpectralField Eu = u;
    diag_mul(Eu, E_);
    SpectralField u4 = Eu;
    diag_mul(u4, E_);
    SpectralField Ec = c;
    diag_mul(Ec, E_);
    u4.axpy(h, Ec);
    const SpectralField d = sys_.nonlinear(u4);

    SpectralField out(u.lattice());
    for (std::size_t i = 0; i < out.size(); ++i)
      out[i] = E2_[i] * u[i] + (h / 6.0) * (E2_[i] * a[i] + 2.0 * E_[i] * (b[i] + c[i]) + d[i]);
    return out;
  }

  // Cox-Matthews ETDRK4, coefficients by contour averaging.
  void init_etd(std::span<const cplx> L) {
    const std::size_t n = L.size();
    const int Mc = 32;
    Q_.assign(n, {});
    f1_.assign(n, {});
    f2_.assign(n, {});
    f3_.assign(n, {});
    for (std::size_t i = 0; i < n; ++i) {
      const cplx z = -dt_ * L[i];
      cplx q{}, a{}, b{}, c{};
      for (int j = 0; j < Mc; ++j) {
        const cplx r = z + std::polar(1.0, 2.0 * std::numbers::pi * (j + 0.5) / Mc);
        const cplx er = std::exp(r), eh = std::exp(0.5 * r);
        q += (eh - 1.0) / r;
        a += (-4.0 - r + er * (4.0 - 3.0 * r + r * r)) / (r * r * r);
        b += (2.0 + r + er * (r - 2.0)) / (r * r * r);
        c += (-4.0 - 3.0 * r - r * r + er * (4.0 - r)) / (r * r * r);
      }
      Q_[i] = dt_ * q / double(Mc);
      f1_[i] = dt_ * a / double(Mc);
      f2_[i] = dt_ * b / double(Mc);
      f3_[i] = dt_ * c / double(Mc);
    }
  }

  SpectralField step_etd(const SpectralField& u) const {
    const std::size_t n = u.size();
    const SpectralField Nu = sys_.nonlinear(u);
    SpectralField a(u.lattice());
    for (std::size_t i = 0; i < n; ++i) a[i] = E_[i] * u[i] + Q_[i] * Nu[i];
    const SpectralField Na = sys_.nonlinear(a);
    SpectralField b(u.lattice());
    for (std::size_t i = 0; i < n; ++i) b[i] = E_[i] * u[i] + Q_[i] * Na[i];
    const SpectralField Nb = sys_.nonlinear(b);
    SpectralField c(u.lattice());
    for (std::size_t i = 0; i < n; ++i) c[i] = E_[i] * a[i] + Q_[i] * (2.0 * Nb[i] - Nu[i]);
    const SpectralField Nc = sys_.nonlinear(c);
    SpectralField out(u.lattice());
    for (std::size_t i = 0; i < n; ++i)
      out[i] = E2_[i] * u[i] + f1_[i] * Nu[i] + 2.0 * f2_[i] * (Na[i] + Nb[i]) + f3_[i] * Nc[i];
    return out;
  }

  const GalerkinSystem& sys_;
  Integrator kind_;
  double dt_;
  std::vector<cplx> E_, E2_, Q_, f1_, f2_, f3_;
};

}  // namespace detail

// Fixed-step integration from t = 0 to t_end. The step is shrunk so that
// t_end is hit exactly; states are recorded every `cadence` steps and at
// the end.
inline Trajectory integrate(const SpectralField& u0, const SimulationConfig& cfg) {
  const Lattice& lat = u0.lattice();
  cfg.validate(lat);
  const bool real = is_real_model(cfg.model);
  if (real && !u0.is_real(1e-12)) throw DomainError("initial data must be real for " + std::string(to_string(cfg.model)));
  if (!u0.all_finite()) throw DomainError("initial data must be finite");

  const GalerkinSystem sys(lat, cfg);
  SpectralField u = cfg.delta >= 0.0 ? regularize_initial_data(u0, cfg.delta, cfg.s1, cfg.s2) : u0;
  u = sys.project_n(u);
  if (real) u.symmetrize();

  const long steps = std::max(1L, static_cast<long>(std::ceil(cfg.t_end / cfg.dt - 1e-9)));
  const double h = cfg.t_end / static_cast<double>(steps);
  const detail::Stepper stepper(sys, cfg.integrator, h);

  Trajectory traj;
  traj.meta["model"] = to_string(cfg.model);
  traj.meta["integrator"] = to_string(cfg.integrator);
  traj.meta["dt"] = std::to_string(h);
  traj.meta["truncation"] = std::to_string(sys.truncation());
  traj.push(0.0, u);
  for (long k = 1; k <= steps; ++k) {
    SpectralField next = stepper.step(u);
    if (real) next.symmetrize();
    if (!next.all_finite()) throw DivergedError(static_cast<double>(k - 1) * h, u);
    u = std::move(next);
    if (k % cfg.cadence == 0 || k == steps) traj.push(static_cast<double>(k) * h, u);
  }
  return traj;
}

struct Observables {
  double I1 = 0.0;       // mean
  double I2 = 0.0;       // int u^2
  double I3 = 0.0;       // int -1/2 u H u_x + 1/3 u^3
  double I4 = 0.0;       // int u^4 - 3 u^2 H u_x + 2 u_x^2
  double H_trunc = 0.0;  // I3 density evaluated on P_n u
};

namespace detail {
inline double hamiltonian_density_integral(const SpectralField& u) {
  const SpectralField hux = hilbert(d_x(u));
  return (-0.5 * integrate_product({u, hux}) + integrate_product({u, u, u}) / 3.0).real();
}
}  // namespace detail

// Torus integrals by exact spectral quadrature. truncation <= 0 means the
// truncated Hamiltonian uses u itself.
inline Observables observables(const SpectralField& u, double truncation = 0.0) {
  if (!u.is_real(1e-10)) throw DomainError("observables require a real field");
  Observables o;
  o.I1 = u.mean().real();
  o.I2 = u.norm2_sq();
  const SpectralField ux = d_x(u);
  const SpectralField hux = hilbert(ux);
  o.I3 = detail::hamiltonian_density_integral(u);
  o.I4 = (integrate_product({u, u, u, u}) - 3.0 * integrate_product({u, u, hux}) +
          2.0 * integrate_product({ux, ux}))
             .real();
  o.H_trunc = truncation > 0.0 ? detail::hamiltonian_density_integral(project_box(u, truncation, truncation))
                               : o.I3;
  return o;
}

struct GalileanSplit {
  SpectralField v0;
  double a;
};

inline GalileanSplit galilean_normalize(const SpectralField& u0) {
  if (!u0.is_real(1e-12)) throw DomainError("galilean_normalize requires real data");
  const double a = u0.mean().real();
  SpectralField v0 = u0;
  v0[u0.lattice().index(0, 0)] = 0.0;
  return {std::move(v0), a};
}

// Transport speed of the Galilean boost: the d_x(u^2) nonlinearity moves at
// 2a, u u_x at a.
inline double galilean_speed(Model m, double a) { return m == Model::BO ? 2.0 * a : a; }

// If v solves the flow from u0 - a then u(t, x) = v(t, x + c t) + a. Undo the
// boost on every slice of traj_u and return the max L2 distance to traj_v.
inline double galilean_compare(const Trajectory& traj_u, const Trajectory& traj_v, double a, Model m = Model::BO) {
  if (traj_u.size() != traj_v.size()) throw MismatchError("galilean_compare: trajectories differ in length");
  const double c = galilean_speed(m, a);
  double dev = 0.0;
  for (std::size_t i = 0; i < traj_u.size(); ++i) {
    if (std::abs(traj_u.times[i] - traj_v.times[i]) > 1e-12 * std::max(1.0, traj_u.times[i]))
      throw MismatchError("galilean_compare: sample times differ");
    const double t = traj_u.times[i];
    SpectralField w = apply_multiplier(traj_u.states[i], [c, t](double x1, double) { return std::polar(1.0, -c * t * x1); });
    w[w.lattice().index(0, 0)] -= a;
    dev = std::max(dev, distance(w, traj_v.states[i]));
  }
  return dev;
}

struct CauchyPair {
  double n = 0.0, m = 0.0;
  std::vector<double> times;
  std::vector<double> l2;   // ||u_n - u_m||_{L2}
  std::vector<double> hs;   // ||u_n - u_m||_{H^{s1,s2}}
  double max_l2 = 0.0;
  double max_hs = 0.0;
};

struct CauchyReport {
  std::vector<double> truncations;
  std::vector<CauchyPair> pairs;  // all n > m
  bool consecutive_decreasing = true;  // max_l2 shrinks along consecutive pairs
};

// Runs the truncated flow for each n in `truncations` (increasing) with
// regularized data P_n P_{delta(n)^{1/s1}, delta(n)^{1/s2}} u0, delta(n) = n^beta.
inline CauchyReport cauchy_study(const SpectralField& u0, const std::vector<double>& truncations, double beta,
                                 const SimulationConfig& base) {
  CauchyReport rep;
  rep.truncations = truncations;
  for (std::size_t k = 1; k < truncations.size(); ++k)
    if (!(truncations[k] >= truncations[k - 1])) throw ConfigError("truncations", "must be nondecreasing");
  std::vector<Trajectory> runs;
  for (double n : truncations) {
    SimulationConfig cfg = base;
    cfg.truncation = n;
    cfg.delta = std::min(delta_schedule(n, beta), n);
    runs.push_back(integrate(u0, cfg));
  }
  for (std::size_t a = 0; a < runs.size(); ++a)
    for (std::size_t b = a + 1; b < runs.size(); ++b) {
      CauchyPair p;
      p.n = truncations[b];
      p.m = truncations[a];
      p.times = runs[a].times;
      for (std::size_t i = 0; i < runs[a].size(); ++i) {
        const SpectralField d = runs[b].states[i] - runs[a].states[i];
        p.l2.push_back(d.norm2());
        p.hs.push_back(anisotropic_norm(d, base.s1, base.s2, 2.0));
        p.max_l2 = std::max(p.max_l2, p.l2.back());
        p.max_hs = std::max(p.max_hs, p.hs.back());
      }
      rep.pairs.push_back(std::move(p));
    }
  // consecutive pairs (n_{k+1}, n_k)
  double prev = inf;
  for (std::size_t a = 0; a + 1 < runs.size(); ++a) {
    for (const auto& p : rep.pairs)
      if (p.m == truncations[a] && p.n == truncations[a + 1]) {
        if (!(p.max_l2 < prev) && a > 0) rep.consecutive_decreasing = false;
        prev = p.max_l2;
        break;
      }
  }
  return rep;
}

struct GrowthReport {
  std::vector<double> times;
  std::vector<double> ratio;   // ||u(t)|| / (||u0|| exp(c * integral))
  std::vector<double> exponent_integral;
  double c = 0.0;
  double max_ratio = 0.0;
  bool exceeded = false;       // some ratio > 1 + tol
};

// Generic growth series ||u(t)||_N / (||u0||_N exp(c int_0^t g(u(s)) ds)) with
// trapezoid quadrature over the trajectory samples.
template <class NormFn, class DensityFn>
GrowthReport growth_series(const Trajectory& traj, NormFn&& norm, DensityFn&& density, double c, double tol = 1e-6) {
  if (traj.empty()) throw PreconditionError("growth check: empty trajectory");
  GrowthReport rep;
  rep.c = c;
  const double n0 = norm(traj.states[0]);
  double integral = 0.0, g_prev = density(traj.states[0]);
  for (std::size_t i = 0; i < traj.size(); ++i) {
    if (i > 0) {
      const double g = density(traj.states[i]);
      integral += 0.5 * (traj.times[i] - traj.times[i - 1]) * (g + g_prev);
      g_prev = g;
    }
    const double ni = norm(traj.states[i]);
    const double r = n0 > 0.0 ? ni / (n0 * std::exp(c * integral)) : 0.0;
    rep.times.push_back(traj.times[i]);
    rep.ratio.push_back(r);
    rep.exponent_integral.push_back(integral);
    rep.max_ratio = std::max(rep.max_ratio, r);
  }
  rep.exceeded = rep.max_ratio > 1.0 + tol;
  return rep;
}

// Smallest c making every ratio of the series <= 1.
template <class NormFn, class DensityFn>
double growth_constant_lower_bound(const Trajectory& traj, NormFn&& norm, DensityFn&& density) {
  const GrowthReport r = growth_series(traj, norm, density, 0.0);
  double c = 0.0;
  for (std::size_t i = 1; i < r.times.size(); ++i)
    if (r.ratio[i] > 1.0 && r.exponent_integral[i] > 0.0)
      c = std::max(c, std::log(r.ratio[i]) / r.exponent_integral[i]);
  return c;
}

inline double x_growth_density(const SpectralField& u) {
  return lp_norm(u, inf) + lp_norm(d_x(u), inf);
}

inline GrowthReport norm_growth_check(const Trajectory& traj, double s1, double s2, double c) {
  return growth_series(
      traj, [&](const SpectralField& u) { return x_norm(u, s1, s2); }, x_growth_density, c);
}

inline double calibrate_x_growth_constant(const std::vector<Trajectory>& trajs, double s1, double s2) {
  double c = 0.0;
  for (const auto& t : trajs)
    c = std::max(c, growth_constant_lower_bound(
                        t, [&](const SpectralField& u) { return x_norm(u, s1, s2); }, x_growth_density));
  return c;
}

}  // namespace qpbo
