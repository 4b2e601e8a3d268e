#pragma once

// Gauge transform w = P+hi(exp(-iF)) with F the tangential primitive of u,
// the gauged equation terms, reconstruction identities for P+HI(F_x) and
// P+HI(F_xx), and the bootstrap quantities I and II.
//
// exp(+-iF) is never band-limited; it is evaluated pointwise on a grid
// padded `pad` times per axis and only then truncated to the block.

#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "dynamics.hpp"
#include "multipliers.hpp"
#include "norms.hpp"

namespace qpbo {

inline constexpr int default_gauge_pad = 4;

inline SpectralField build_F(const SpectralField& u, double t, double u_norm0_sq) {
  if (std::abs(u.mean()) > 1e-12)
    throw PreconditionError("build_F needs mean-zero data; apply galilean_normalize first");
  if (!u.is_real(1e-10)) throw DomainError("build_F needs a real field");
  SpectralField F = d_x_inverse(u);
  F[u.lattice().index(0, 0)] = t * u_norm0_sq;
  return F;
}

inline int padded_size(const Lattice& lat, int pad) {
  if (pad < 1) throw DomainError("padding factor must be >= 1");
  return fft::nice_size(pad * lat.grid());
}

// Samples of exp(sign * i F) on the padded grid.
inline PhysicalGrid exp_samples(const SpectralField& F, double sign = -1.0, int pad = default_gauge_pad) {
  PhysicalGrid g = sample(F, padded_size(F.lattice(), pad));
  for (auto& z : g.values) z = std::exp(cplx(0.0, sign) * z.real());
  return g;
}

inline SpectralField exp_of_F(const SpectralField& F, double sign = -1.0, int pad = default_gauge_pad) {
  if (!F.is_real(1e-10)) throw DomainError("exp_of_F needs a real F");
  return project_samples(exp_samples(F, sign, pad), F.lattice());
}

inline SpectralField gauge_transform(const SpectralField& F, int pad = default_gauge_pad,
                                     const SymbolTable& tab = SymbolTable::standard()) {
  return project(exp_of_F(F, -1.0, pad), Projection::PlusHi, tab);
}

struct GaugeState {
  SpectralField F;
  SpectralField w;
  double u_norm0_sq = 0.0;
  double t = 0.0;
};

inline GaugeState make_gauge_state(const SpectralField& u, double t, double u_norm0_sq, int pad = default_gauge_pad,
                                   const SymbolTable& tab = SymbolTable::standard()) {
  SpectralField F = build_F(u, t, u_norm0_sq);
  SpectralField w = gauge_transform(F, pad, tab);
  return {std::move(F), std::move(w), u_norm0_sq, t};
}

struct GaugeTerms {
  SpectralField A;
  SpectralField B;
};

// A = P+hi(P-(F_xx) w), B = P+hi(P-(F_xx) P_lo(exp(-iF))).
inline GaugeTerms gauge_rhs_terms(const SpectralField& F, const SpectralField& w, int pad = default_gauge_pad,
                                  const SymbolTable& tab = SymbolTable::standard()) {
  const SpectralField pm = project(d_xx(F), Projection::Minus, tab);
  const SpectralField lo = project(exp_of_F(F, -1.0, pad), Projection::Lo, tab);
  return {project(pointwise_multiply(pm, w), Projection::PlusHi, tab),
          project(pointwise_multiply(pm, lo), Projection::PlusHi, tab)};
}

struct GaugeResidualReport {
  std::vector<double> times;
  std::vector<double> residual;     // ||w_t - i w_xx + 2A + 2B||_2
  std::vector<double> residual_j1;  // same after <grad>^eta d_x
  std::vector<double> residual_j2;  // same after <grad>^eta d_x^2
  double max_residual = 0.0;
  double max_interior = 0.0;
};

// Three-point derivative weights at x[k] from nodes x[i0..i0+2].
inline std::array<double, 3> fd_weights(const double* x, double at) {
  const double a = x[0], b = x[1], c = x[2];
  return {((at - b) + (at - c)) / ((a - b) * (a - c)), ((at - a) + (at - c)) / ((b - a) * (b - c)),
          ((at - a) + (at - b)) / ((c - a) * (c - b))};
}

inline GaugeResidualReport gauge_residual(const Trajectory& traj, double eta = 0.01, int pad = default_gauge_pad,
                                          const SymbolTable& tab = SymbolTable::standard()) {
  if (traj.size() < 3) throw PreconditionError("gauge_residual needs at least 3 slices");
  const double c0 = traj.states[0].norm2_sq();
  std::vector<SpectralField> ws;
  std::vector<GaugeTerms> terms;
  for (std::size_t i = 0; i < traj.size(); ++i) {
    const GaugeState g = make_gauge_state(traj.states[i], traj.times[i], c0, pad, tab);
    terms.push_back(gauge_rhs_terms(g.F, g.w, pad, tab));
    ws.push_back(g.w);
  }
  GaugeResidualReport rep;
  const std::size_t n = traj.size();
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t i0 = k == 0 ? 0 : (k == n - 1 ? n - 3 : k - 1);
    const auto wt_w = fd_weights(&traj.times[i0], traj.times[k]);
    SpectralField r = wt_w[0] * ws[i0];
    r.axpy(wt_w[1], ws[i0 + 1]);
    r.axpy(wt_w[2], ws[i0 + 2]);
    r.axpy(cplx(0.0, -1.0), d_xx(ws[k]));
    r.axpy(2.0, terms[k].A);
    r.axpy(2.0, terms[k].B);
    rep.times.push_back(traj.times[k]);
    rep.residual.push_back(r.norm2());
    const SpectralField br = bracket_nabla(r, eta);
    rep.residual_j1.push_back(d_x_power(br, 1).norm2());
    rep.residual_j2.push_back(d_x_power(br, 2).norm2());
    rep.max_residual = std::max(rep.max_residual, rep.residual.back());
    if (k > 0 && k + 1 < n) rep.max_interior = std::max(rep.max_interior, rep.residual.back());
  }
  return rep;
}

struct Reconstruction {
  SpectralField lhs;
  SpectralField rhs;
  SpectralField E1, E2, E3;
  SpectralField E;       // -i (E1 - E2 - E3)
  double mismatch = 0.0;
  // deviation of the E1 / E3 variants with exp(-iF) replaced by
  // P-hi(exp(-iF)) / P+hi(exp(-iF))
  double e1_replacement_dev = 0.0;
  double e3_replacement_dev = 0.0;
};

namespace detail {

// Truncation of (band-limited f) * (padded samples g).
inline SpectralField times_samples(const SpectralField& f, const PhysicalGrid& g) {
  PhysicalGrid a = sample(f, g.size);
  for (std::size_t i = 0; i < a.values.size(); ++i) a.values[i] *= g.values[i];
  return project_samples(a, f.lattice());
}

struct ErrorParts {
  SpectralField Fx, E1, E2, E3, E, w;
  PhysicalGrid em, ep;
  double e1_dev = 0.0, e3_dev = 0.0;
};

inline ErrorParts error_parts(const GaugeState& g, int pad, const SymbolTable& tab) {
  const SpectralField Fx = d_x(g.F);
  PhysicalGrid em = exp_samples(g.F, -1.0, pad);
  PhysicalGrid ep = exp_samples(g.F, +1.0, pad);
  const SpectralField eblock = project_samples(em, g.F.lattice());
  const SpectralField pHI = project(Fx, Projection::PlusHI, tab);
  const SpectralField pLO = project(Fx, Projection::LO, tab);
  const SpectralField mHI = project(Fx, Projection::MinusHI, tab);

  const SpectralField g1 = times_samples(pHI, em);
  SpectralField E1 = project(g1, Projection::Lo, tab) + project(g1, Projection::MinusHi, tab);
  SpectralField E2 = project(times_samples(pLO, em), Projection::PlusHi, tab);
  SpectralField E3 = project(times_samples(mHI, em), Projection::PlusHi, tab);

  const SpectralField g1r = pointwise_multiply(pHI, project(eblock, Projection::MinusHi, tab));
  const SpectralField E1r = project(g1r, Projection::Lo, tab) + project(g1r, Projection::MinusHi, tab);
  const SpectralField E3r =
      project(pointwise_multiply(mHI, project(eblock, Projection::PlusHi, tab)), Projection::PlusHi, tab);

  SpectralField E = cplx(0.0, -1.0) * (E1 - E2 - E3);
  SpectralField w = project(eblock, Projection::PlusHi, tab);
  ErrorParts p{Fx, std::move(E1), std::move(E2), std::move(E3), std::move(E), std::move(w), std::move(em), std::move(ep)};
  p.e1_dev = distance(E1r, p.E1);
  p.e3_dev = distance(E3r, p.E3);
  return p;
}

}  // namespace detail

// P+HI(F_x) = i e^{iF} w_x + i e^{iF} E.
inline Reconstruction reconstruct_Fx(const GaugeState& g, int pad = default_gauge_pad,
                                     const SymbolTable& tab = SymbolTable::standard()) {
  detail::ErrorParts p = detail::error_parts(g, pad, tab);
  SpectralField inner = cplx(0.0, 1.0) * (d_x(p.w) + p.E);
  SpectralField rhs = detail::times_samples(inner, p.ep);
  SpectralField lhs = project(p.Fx, Projection::PlusHI, tab);
  Reconstruction r{lhs, rhs, p.E1, p.E2, p.E3, p.E};
  r.mismatch = distance(lhs, rhs);
  r.e1_replacement_dev = p.e1_dev;
  r.e3_replacement_dev = p.e3_dev;
  return r;
}

// P+HI(F_xx) = i e^{iF} w_xx + i d_x(e^{iF}) w_x + i e^{iF} E_x + i d_x(e^{iF}) E.
inline Reconstruction reconstruct_Fxx(const GaugeState& g, int pad = default_gauge_pad,
                                      const SymbolTable& tab = SymbolTable::standard()) {
  detail::ErrorParts p = detail::error_parts(g, pad, tab);
  const cplx I(0.0, 1.0);
  const SpectralField wx = d_x(p.w);
  // d_x(e^{iF}) = i F_x e^{iF}, pointwise on the padded grid
  PhysicalGrid dep = sample(p.Fx, p.ep.size);
  for (std::size_t k = 0; k < dep.values.size(); ++k) dep.values[k] = I * dep.values[k].real() * p.ep.values[k];
  SpectralField rhs = detail::times_samples(I * (d_xx(p.w) + d_x(p.E)), p.ep);
  rhs += detail::times_samples(I * (wx + p.E), dep);
  SpectralField lhs = project(d_xx(g.F), Projection::PlusHI, tab);
  Reconstruction r{lhs, rhs, p.E1, p.E2, p.E3, p.E};
  r.mismatch = distance(lhs, rhs);
  r.e1_replacement_dev = p.e1_dev;
  r.e3_replacement_dev = p.e3_dev;
  return r;
}

struct BootstrapParams {
  double sigma = 0.9;
  double eta = 0.01;
  double r = 0.8;
  double p = 64.0;
  int pad = default_gauge_pad;

  // sigma - eta > 7/8 and 3/4 < r < sigma - eta
  bool in_theorem_range() const { return sigma - eta > 0.875 && r > 0.75 && r < sigma - eta; }
};

struct BootstrapValues {
  double I = 0.0;
  double II = 0.0;
  bool in_range = true;
};

// I(T') = sum_j ||<grad>^eta d_x^j w||_S,  j = 0, 1, 2
// II(T') = ||<grad>^eta F_xx||_{L^4 L^p} + ||<grad>^{r+eta} F_xx||_{L^{4/3} L^2}
inline BootstrapValues bootstrap_quantities(const Trajectory& traj, double t_prime, const BootstrapParams& bp = {},
                                            const SymbolTable& tab = SymbolTable::standard()) {
  if (traj.empty()) throw PreconditionError("bootstrap_quantities: empty trajectory");
  if (t_prime < traj.times.front() || t_prime > traj.times.back() * (1.0 + 1e-12))
    throw OutOfRangeError("T' outside the trajectory span");
  const Trajectory part = traj.prefix(t_prime);
  const double c0 = traj.states[0].norm2_sq();
  std::array<Trajectory, 3> wj;
  Trajectory f1, f2;
  for (std::size_t i = 0; i < part.size(); ++i) {
    const double t = part.times[i];
    const GaugeState g = make_gauge_state(part.states[i], t, c0, bp.pad, tab);
    const SpectralField bw = bracket_nabla(g.w, bp.eta);
    for (int j = 0; j < 3; ++j) wj[j].push(t, d_x_power(bw, j));
    const SpectralField fxx = d_xx(g.F);
    f1.push(t, bracket_nabla(fxx, bp.eta));
    f2.push(t, bracket_nabla(fxx, bp.r + bp.eta));
  }
  BootstrapValues v;
  for (const auto& tr : wj) v.I += strichartz_norm(tr);
  v.II = mixed_spacetime_norm(f1, 4.0, bp.p) + mixed_spacetime_norm(f2, 4.0 / 3.0, 2.0);
  v.in_range = bp.in_theorem_range();
  return v;
}

}  // namespace qpbo
