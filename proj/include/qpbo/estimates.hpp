#pragma once

// Empirical LHS/RHS ratio statistics for the inequalities the analysis
// relies on. Each check draws a reproducible random ensemble, evaluates the
// ratio per sample, and reports summary statistics. Bilinear and
// nonlinear quantities are evaluated on the doubled lattice (2*nmax, 2*G)
// so products of block fields are exact and L^inf sees a finer grid.

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "dynamics.hpp"
#include "gauge.hpp"
#include "norms.hpp"
#include "random_fields.hpp"

namespace qpbo {

struct EnsembleSpec {
  explicit EnsembleSpec(Lattice lat) : lattice(std::move(lat)) {}

  Lattice lattice;
  int count = 200;
  RandomFieldSpec field;      // decay profile, alpha, reality
  double amplitude = 1.0;     // coefficient scale (applied before any norm)
  std::uint64_t seed = 1;
  bool extremal = false;      // sample 0 replaced by the extremizer, where defined

  EnsembleSpec refined() const {
    EnsembleSpec s = *this;
    s.lattice = Lattice(lattice.omega(), 2 * lattice.nmax(), 2 * lattice.grid());
    return s;
  }
  Lattice doubled() const { return Lattice(lattice.omega(), 2 * lattice.nmax(), 2 * lattice.grid()); }

  // Field k on the ensemble lattice. Streams separate the independent factors of
  // one sample (f and g of a bilinear check).
  SpectralField draw(std::uint64_t k, std::uint64_t stream = 0) const {
    RandomFieldSpec f = field;
    f.l2_norm = 0.0;
    SpectralField u = random_field(lattice, f, seed, k, stream);
    if (amplitude != 1.0) u *= amplitude;
    return u;
  }
  SpectralField draw_doubled(std::uint64_t k, std::uint64_t stream = 0) const { return embed(draw(k, stream), doubled()); }
};

// One sample's LHS and RHS; `scale` sets the degenerate-denominator cutoff.
struct Fraction {
  double num, den, scale;
  bool degenerate() const { return !(den > 1e-12 * scale) || den == 0.0 || !std::isfinite(num); }
  double ratio() const { return num / den; }
};

struct RatioReport {
  std::string id;
  std::map<std::string, double> params;
  int nmax = 0;
  std::vector<double> ratios;       // per kept sample
  std::vector<int> sample_index;    // ensemble index of each kept ratio
  std::size_t skipped = 0;
  double max = 0.0, mean = 0.0, q50 = 0.0, q90 = 0.0, q99 = 0.0;
  // refinement trend: same ensemble at 2*nmax
  std::optional<double> max_refined;

  double refinement_factor() const { return max_refined && max > 0.0 ? *max_refined / max : 0.0; }
  // counterexample-regime flag: the max keeps climbing under refinement
  bool grows_with_nmax(double tol = 0.15) const { return refinement_factor() > 1.0 + tol; }

  void finalize() {
    if (ratios.empty()) return;
    std::vector<double> s = ratios;
    std::sort(s.begin(), s.end());
    auto q = [&](double p) {
      const double x = p * (s.size() - 1);
      const std::size_t i = static_cast<std::size_t>(x);
      const double f = x - i;
      return i + 1 < s.size() ? s[i] * (1 - f) + s[i + 1] * f : s.back();
    };
    max = s.back();
    double acc = 0.0;
    for (double r : s) acc += r;
    mean = acc / s.size();
    q50 = q(0.5);
    q90 = q(0.9);
    q99 = q(0.99);
  }
};

namespace detail {

// Skip policy: denominators below 1e-12 * scale (or exactly zero).
template <class Fn>
RatioReport run_ensemble(std::string id, std::map<std::string, double> params, const EnsembleSpec& spec, Fn&& fn) {
  RatioReport rep;
  rep.id = std::move(id);
  rep.params = std::move(params);
  rep.nmax = spec.lattice.nmax();
  for (int k = 0; k < spec.count; ++k) {
    const Fraction fr = fn(k);
    if (fr.degenerate()) {
      ++rep.skipped;
      continue;
    }
    rep.ratios.push_back(fr.ratio());
    rep.sample_index.push_back(k);
  }
  rep.finalize();
  return rep;
}

inline double h_weight(double x1, double x2, double s1, double s2) {
  return std::pow(1 + x1 * x1, 0.5 * s1) + std::pow(1 + x2 * x2, 0.5 * s2);
}

}  // namespace detail

// Runs the check at nmax and at 2*nmax (nested ensemble) and records both.
template <class Check>
RatioReport with_refinement(const EnsembleSpec& spec, Check&& check) {
  RatioReport coarse = check(spec);
  const RatioReport fine = check(spec.refined());
  coarse.max_refined = fine.max;
  return coarse;
}

// Per-sample fractions. Inputs should already live on the lattice the
// norms are to be taken on (the ensemble wrappers pass doubled-lattice fields).

// ||u||_inf / ||u||_{H^{s1,s2}}
inline Fraction embedding_fraction(const SpectralField& u, double s1, double s2) {
  return {lp_norm(u, inf), anisotropic_norm(u, s1, s2, 2.0), u.norm2()};
}

// ||d_x u||_inf / ||u||_{H^{s1,s2}}
inline Fraction crucial_fraction(const SpectralField& u, double s1, double s2) {
  return {lp_norm(d_x(u), inf), anisotropic_norm(u, s1, s2, 2.0), u.norm2()};
}

// [<d_x>^{s1}, f] g = <d_x>^{s1}(f g) - f <d_x>^{s1} g
inline SpectralField commutator_dx(const SpectralField& f, const SpectralField& g, double s1) {
  return bracket_dx(pointwise_multiply(f, g), s1) - pointwise_multiply(f, bracket_dx(g, s1));
}
inline SpectralField commutator_dy(const SpectralField& f, const SpectralField& g, double s2) {
  return bracket_dy(pointwise_multiply(f, g), s2) - pointwise_multiply(f, bracket_dy(g, s2));
}

// ||[<d_x>^{s1}, f] g||_p / (||<d_x>^{s1} f||_p ||g||_inf + ||d_x f||_inf ||<d_x>^{s1-1} g||_p)
inline Fraction kato_ponce_fraction(const SpectralField& f, const SpectralField& g, double s1, double p) {
  if (s1 < 1.0) throw DomainError("kato_ponce_ratio: needs s1 >= 1");
  if (!(p >= 2.0) || std::isinf(p)) throw DomainError("kato_ponce_ratio: needs 2 <= p < inf");
  const double num = lp_norm(commutator_dx(f, g, s1), p);
  const double den = lp_norm(bracket_dx(f, s1), p) * lp_norm(g, inf) +
                     lp_norm(d_x(f), inf) * lp_norm(bracket_dx(g, s1 - 1.0), p);
  return {num, den, f.norm2() * g.norm2()};
}

// ||[<d_y>^{s2}, f] g||_p / (||<d_y>^{s2} f||_p ||g||_inf)
inline Fraction kpv_fraction(const SpectralField& f, const SpectralField& g, double s2, double p) {
  if (s2 < 0.0 || s2 > 1.0) throw DomainError("kpv_ratio: needs 0 <= s2 <= 1");
  if (!(p >= 1.0)) throw DomainError("kpv_ratio: needs p >= 1");
  const double num = lp_norm(commutator_dy(f, g, s2), p);
  const double den = lp_norm(bracket_dy(f, s2), p) * lp_norm(g, inf);
  return {num, den, f.norm2() * g.norm2()};
}

// Fractional orders use |xi1|^s; `integer_power` switches to (i xi1)^s.
inline SpectralField tangential_derivative(const SpectralField& f, double s, bool integer_power) {
  if (integer_power) {
    if (s != std::floor(s)) throw DomainError("integer derivative variant needs integer s");
    return d_x_power(f, static_cast<int>(s));
  }
  return abs_dx(f, s);
}

inline SpectralField paraproduct(const SpectralField& f, const SpectralField& g) {
  return project(pointwise_multiply(project(f, Projection::Minus), g), Projection::PlusHi);
}

// ||D^s P+hi(P-(f) g)||_2 / (||P- f||_inf ||D^s g||_2)
inline Fraction paraproduct1_fraction(const SpectralField& f, const SpectralField& g, double s, bool integer_power = false) {
  const double num = tangential_derivative(paraproduct(f, g), s, integer_power).norm2();
  const double den = lp_norm(project(f, Projection::Minus), inf) * tangential_derivative(g, s, integer_power).norm2();
  return {num, den, f.norm2() * g.norm2()};
}

// ||D^s P+hi(P-(f) g)||_2 / (||P- f||_2 ||D^s g||_inf)
inline Fraction paraproduct2_fraction(const SpectralField& f, const SpectralField& g, double s, bool integer_power = false) {
  const double num = tangential_derivative(paraproduct(f, g), s, integer_power).norm2();
  const double den = project(f, Projection::Minus).norm2() * lp_norm(tangential_derivative(g, s, integer_power), inf);
  return {num, den, f.norm2() * g.norm2()};
}

// ||D^s e^{iF}||_p / (||D^s F||_p ||e^{iF}||_inf), D = |grad|
inline Fraction chain_rule_fraction(const SpectralField& F, double s, double p, int pad = default_gauge_pad) {
  if (!(s > 0.0 && s < 1.0)) throw DomainError("chain_rule_ratio: needs 0 < s < 1");
  if (!(p > 1.0) || std::isinf(p)) throw DomainError("chain_rule_ratio: needs 1 < p < inf");
  if (!F.is_real(1e-12)) throw DomainError("chain_rule_ratio needs a real F");
  const double num = lp_norm(abs_nabla(exp_of_F(F, +1.0, pad), s), p);
  const double den = lp_norm(abs_nabla(F, s), p) * lp_norm(exp_samples(F, +1.0, pad), inf);
  return {num, den, F.norm2()};
}

// Extremizers for the two embeddings: u(0) = sum a_n uhat_n saturates
// Cauchy-Schwarz against the H^{s1,s2} weight for uhat_n = conj(a_n)/w_n^2.
inline SpectralField embedding_extremizer(const Lattice& lat, double s1, double s2, bool derivative) {
  SpectralField e(lat);
  for (std::size_t i = 0; i < lat.size(); ++i) {
    const double x1 = lat.xi1(i);
    const cplx a = derivative ? cplx(0.0, -x1) : cplx(1.0);
    e[i] = a / std::pow(detail::h_weight(x1, lat.xi2(i), s1, s2), 2);
  }
  return e;
}

inline RatioReport embedding_ratio(const EnsembleSpec& spec, double s1, double s2) {
  return detail::run_ensemble("embedding", {{"s1", s1}, {"s2", s2}}, spec, [&](int k) {
    const SpectralField u = spec.extremal && k == 0 ? embed(embedding_extremizer(spec.lattice, s1, s2, false), spec.doubled())
                                                    : spec.draw_doubled(k);
    return embedding_fraction(u, s1, s2);
  });
}

inline RatioReport crucial_ratio(const EnsembleSpec& spec, double s1, double s2) {
  return detail::run_ensemble("crucial", {{"s1", s1}, {"s2", s2}}, spec, [&](int k) {
    const SpectralField u = spec.extremal && k == 0 ? embed(embedding_extremizer(spec.lattice, s1, s2, true), spec.doubled())
                                                    : spec.draw_doubled(k);
    return crucial_fraction(u, s1, s2);
  });
}

inline RatioReport kato_ponce_ratio(const EnsembleSpec& spec, double s1, double p) {
  return detail::run_ensemble("kato_ponce", {{"s1", s1}, {"p", p}}, spec, [&](int k) {
    return kato_ponce_fraction(spec.draw_doubled(k, 0), spec.draw_doubled(k, 1), s1, p);
  });
}

inline RatioReport kpv_ratio(const EnsembleSpec& spec, double s2, double p) {
  return detail::run_ensemble("kpv", {{"s2", s2}, {"p", p}}, spec, [&](int k) {
    return kpv_fraction(spec.draw_doubled(k, 0), spec.draw_doubled(k, 1), s2, p);
  });
}

inline RatioReport paraproduct1_ratio(const EnsembleSpec& spec, double s, bool integer_power = false) {
  return detail::run_ensemble("paraproduct1", {{"s", s}, {"integer", integer_power ? 1.0 : 0.0}}, spec, [&](int k) {
    return paraproduct1_fraction(spec.draw_doubled(k, 0), spec.draw_doubled(k, 1), s, integer_power);
  });
}

inline RatioReport paraproduct2_ratio(const EnsembleSpec& spec, double s, bool integer_power = false) {
  return detail::run_ensemble("paraproduct2", {{"s", s}, {"integer", integer_power ? 1.0 : 0.0}}, spec, [&](int k) {
    return paraproduct2_fraction(spec.draw_doubled(k, 0), spec.draw_doubled(k, 1), s, integer_power);
  });
}

inline RatioReport chain_rule_ratio(const EnsembleSpec& spec, double s, double p, int pad = default_gauge_pad) {
  return detail::run_ensemble("chain_rule", {{"s", s}, {"p", p}}, spec,
                              [&](int k) { return chain_rule_fraction(spec.draw_doubled(k), s, p, pad); });
}

// ||e^{it d_xx} u0||_{L^4([0,T], L^4)} / (T^{1/8} ||<grad>^kappa u0||_2), one
// fraction per T. Time samples are shared across T: about `per_cycle`
// samples per period of the fastest beat 2 max xi1^2 of |u|^4, and the
// spatial quadrature is exact for |u|^4.
inline std::vector<Fraction> strichartz_fractions(const SpectralField& u0, double kappa, const std::vector<double>& Ts,
                                                  int per_cycle = 8) {
  if (Ts.empty()) throw PreconditionError("strichartz_ratio: no horizons");
  for (double T : Ts)
    if (!(T > 0.0) || T > 1.0) throw DomainError("strichartz_ratio: T must lie in (0, 1]");
  const Lattice& lat = u0.lattice();
  double xmax = 0.0;
  for (std::size_t i = 0; i < lat.size(); ++i)
    if (u0[i] != cplx{}) xmax = std::max(xmax, std::abs(lat.xi1(i)));
  const double beat = 2.0 * xmax * xmax;
  const double tmin = *std::min_element(Ts.begin(), Ts.end());
  const double tmax = *std::max_element(Ts.begin(), Ts.end());
  const int k_min = std::max(4, static_cast<int>(std::ceil(per_cycle * tmin * beat / (2.0 * std::numbers::pi))));
  const double dt = tmin / k_min;
  const int steps = static_cast<int>(std::ceil(tmax / dt - 1e-9));
  const int M = fft::nice_size(4 * lat.nmax() + 1);

  const double den0 = bracket_nabla(u0, kappa).norm2();
  std::vector<Fraction> out;
  if (den0 == 0.0) {
    for (std::size_t j = 0; j < Ts.size(); ++j) out.push_back({0.0, 0.0, 0.0});
    return out;
  }
  std::vector<double> l4(steps + 1);
  for (int i = 0; i <= steps; ++i) {
    const PhysicalGrid g = sample(schrodinger_propagator(u0, i * dt), M);
    double acc = 0.0;
    for (const auto& z : g.values) acc += std::norm(z) * std::norm(z);
    l4[i] = acc / (static_cast<double>(M) * M);
  }
  for (double T : Ts) {
    double integral = 0.0, t = 0.0;
    for (int i = 1; i <= steps && t < T - 1e-12; ++i) {
      const double h = std::min(dt, T - t);
      const double right = h < dt ? l4[i - 1] + (l4[i] - l4[i - 1]) * (h / dt) : l4[i];
      integral += 0.5 * h * (l4[i - 1] + right);
      t += h;
    }
    out.push_back({std::pow(integral, 0.25), std::pow(T, 0.125) * den0, u0.norm2()});
  }
  return out;
}

inline std::vector<RatioReport> strichartz_ratio(const EnsembleSpec& spec, double kappa, const std::vector<double>& Ts,
                                                 int per_cycle = 8) {
  std::vector<RatioReport> reps(Ts.size());
  for (std::size_t j = 0; j < Ts.size(); ++j) {
    reps[j].id = "strichartz";
    reps[j].params = {{"kappa", kappa}, {"T", Ts[j]}};
    reps[j].nmax = spec.lattice.nmax();
  }
  for (int k = 0; k < spec.count; ++k) {
    const auto fr = strichartz_fractions(spec.draw(k), kappa, Ts, per_cycle);
    for (std::size_t j = 0; j < Ts.size(); ++j) {
      if (fr[j].degenerate()) {
        ++reps[j].skipped;
        continue;
      }
      reps[j].ratios.push_back(fr[j].ratio());
      reps[j].sample_index.push_back(k);
    }
  }
  for (auto& r : reps) r.finalize();
  return reps;
}

inline double grad_sup(const SpectralField& u) {
  const PhysicalGrid a = sample(d_x(u)), b = sample(d_y(u));
  double m = 0.0;
  for (std::size_t i = 0; i < a.values.size(); ++i)
    m = std::max(m, std::sqrt(std::norm(a.values[i]) + std::norm(b.values[i])));
  return m;
}

// ||u(t)||_{H^s} / (||u(0)||_{H^s} exp(c int_0^t ||grad u||_inf))
inline GrowthReport growth_bound_check(const Trajectory& traj, double s, double c) {
  return growth_series(
      traj, [s](const SpectralField& u) { return sobolev_norm(u, s); }, grad_sup, c);
}

inline double calibrate_sobolev_growth_constant(const std::vector<Trajectory>& trajs, double s) {
  double c = 0.0;
  for (const auto& t : trajs)
    c = std::max(c, growth_constant_lower_bound(
                        t, [s](const SpectralField& u) { return sobolev_norm(u, s); }, grad_sup));
  return c;
}

}  // namespace qpbo
