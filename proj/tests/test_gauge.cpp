#include <catch_amalgamated.hpp>

#include <qpbo/gauge.hpp>
#include <qpbo/random_fields.hpp>

#include "oracles.hpp"

using namespace qpbo;
using Catch::Matchers::WithinAbs;

namespace {
const Lattice& lat8() {
  static const Lattice l(FrequencyVector::golden(), 8, 32);
  return l;
}
SpectralField smooth_F(const Lattice& lat, std::uint64_t sample, double alpha = 3.0, double amp = 1.0) {
  RandomFieldSpec s;
  s.profile = DecayProfile::Exponential;
  s.alpha = alpha;
  s.l2_norm = amp;
  return random_field(lat, s, 11, sample);
}
SpectralField mean_zero_u(std::uint64_t sample, double amp) {
  RandomFieldSpec s;
  s.profile = DecayProfile::Exponential;
  s.alpha = 0.8;
  s.mean_zero = true;
  s.l2_norm = amp;
  return random_field(lat8(), s, 21, sample);
}
// Low-mode data: support inside |xi| <= 1.5.
SpectralField low_mode_u(double amp) {
  RandomFieldSpec s;
  s.profile = DecayProfile::Exponential;
  s.alpha = 0.5;
  s.mean_zero = true;
  SpectralField u = project_box(random_field(lat8(), s, 5, 0), 1.5, 1.5);
  u *= amp / u.norm2();
  return u;
}
double fit_slope(const std::vector<double>& x, const std::vector<double>& y) {
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) mx += std::log(x[i]), my += std::log(y[i]);
  mx /= x.size();
  my /= y.size();
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (std::log(x[i]) - mx) * (std::log(y[i]) - my);
    sxx += (std::log(x[i]) - mx) * (std::log(x[i]) - mx);
  }
  return sxy / sxx;
}
}  // namespace

TEST_CASE("build_F", "[gauge]") {
  const Lattice& lat = lat8();
  const SpectralField F0 = build_F(SpectralField(lat), 1.0, 0.37);
  CHECK(F0.mean() == cplx(0.37, 0.0));
  CHECK(F0.norm2() == 0.37);

  const SpectralField c = make_field_from_modes(lat, {{{2, -1}, cplx(0.3, 0.1)}, {{-2, 1}, cplx(0.3, -0.1)}});
  const SpectralField F = build_F(c, 0.5, 1.0);
  const double x = lat.xi1(2, -1);
  CHECK(std::abs(F.at(2, -1) - cplx(0.3, 0.1) / cplx(0.0, x)) <= 1e-15);
  CHECK(F.hermitian_defect() <= 1e-15);

  for (std::uint64_t s = 0; s < 3; ++s) {
    const SpectralField u = mean_zero_u(s, 1.0);
    CHECK(distance(d_x(build_F(u, 2.0, 5.0)), u) <= 1e-13 * u.norm2());
  }
  SpectralField bad = mean_zero_u(0, 1.0);
  bad[lat.index(0, 0)] = 0.1;
  try {
    build_F(bad, 0.0, 1.0);
    FAIL("expected PreconditionError");
  } catch (const PreconditionError& e) {
    CHECK(std::string(e.what()).find("galilean_normalize") != std::string::npos);
  }
}

TEST_CASE("exp_of_F and the gauge transform", "[gauge]") {
  const Lattice& lat = lat8();
  const SpectralField c = constant_field(lat, 0.8);
  const SpectralField e = exp_of_F(c);
  CHECK(std::abs(e.mean() - std::exp(cplx(0.0, -0.8))) <= 1e-15);
  CHECK(e.norm2() - std::abs(e.mean()) <= 1e-15);
  CHECK(gauge_transform(c).norm2() == 0.0);
  const SpectralField one = exp_of_F(SpectralField(lat));
  CHECK(std::abs(one.mean() - 1.0) <= 1e-15);
  CHECK(gauge_transform(SpectralField(lat)).norm2() == 0.0);

  for (std::uint64_t s = 0; s < 3; ++s) {
    const SpectralField F = smooth_F(lat, s, 1.0, 2.0);
    const PhysicalGrid g = exp_samples(F);
    double dev = 0.0;
    for (const auto& z : g.values) dev = std::max(dev, std::abs(std::abs(z) - 1.0));
    CHECK(dev <= 1e-13);
    CHECK_THAT(lp_norm(g, inf), WithinAbs(1.0, 1e-13));
    const SpectralField w = gauge_transform(F);
    for (std::size_t i = 0; i < lat.size(); ++i)
      if (lat.xi1(i) <= 0.5) CHECK(w[i] == cplx{});
  }
  CHECK_THROWS_AS(exp_of_F(unit_mode(lat, 1, 0)), DomainError);
}

TEST_CASE("gauge terms A and B", "[gauge]") {
  const Lattice& lat = lat8();
  const SpectralField c = constant_field(lat, 0.3);
  const GaugeTerms t0 = gauge_rhs_terms(c, gauge_transform(c));
  CHECK(t0.A.norm2() == 0.0);
  CHECK(t0.B.norm2() == 0.0);

  const Lattice small(FrequencyVector::golden(), 4, 16);
  const SpectralField F = smooth_F(small, 3, 1.0, 1.0);
  const SpectralField w = gauge_transform(F);
  const GaugeTerms t = gauge_rhs_terms(F, w);
  for (std::size_t i = 0; i < small.size(); ++i)
    if (small.xi1(i) <= 0.5) {
      CHECK(t.A[i] == cplx{});
      CHECK(t.B[i] == cplx{});
    }
  // convolution oracle
  const SpectralField pm = project(d_xx(F), Projection::Minus);
  const SpectralField refA = project(oracle::convolve(pm, w), Projection::PlusHi);
  CHECK(oracle::max_abs_diff(t.A, refA) <= 1e-13 * std::max(1e-300, refA.max_abs()) + 1e-16);
  const SpectralField refB = project(oracle::convolve(pm, project(exp_of_F(F), Projection::Lo)), Projection::PlusHi);
  CHECK(oracle::max_abs_diff(t.B, refB) <= 1e-13 * refB.max_abs() + 1e-16);
}

TEST_CASE("reconstruction identities", "[gauge]") {
  const Lattice& lat = lat8();
  const SpectralField c = constant_field(lat, 1.1);
  const GaugeState gc{c, gauge_transform(c), 0.0, 0.0};
  const Reconstruction rc = reconstruct_Fx(gc);
  CHECK(rc.lhs.norm2() == 0.0);
  CHECK(rc.rhs.norm2() <= 1e-15);
  CHECK(reconstruct_Fxx(gc).rhs.norm2() <= 1e-15);

  const Lattice l16(FrequencyVector::golden(), 16, 64);
  for (std::uint64_t s = 0; s < 4; ++s) {
    const SpectralField F = smooth_F(lat, s, 3.0, 0.5);
    const GaugeState g{F, gauge_transform(F), 0.0, 0.0};
    const Reconstruction rx = reconstruct_Fx(g);
    const Reconstruction rxx = reconstruct_Fxx(g);
    INFO("seed " << s << " Fx " << rx.mismatch << " Fxx " << rxx.mismatch);
    CHECK(rx.lhs.norm2() > 1e-5);  // nontrivial identity
    CHECK(rx.mismatch <= 1e-9);
    CHECK(rxx.mismatch <= 1e-8);
    CHECK(distance(d_x(rx.lhs), rxx.lhs) <= 1e-12);
    for (std::size_t i = 0; i < lat.size(); ++i)
      if (lat.xi1(i) <= 0.5) {
        CHECK(rx.E2[i] == cplx{});
        CHECK(rx.E3[i] == cplx{});
      }
    // the P+hi replacement inside E3 is exact up to truncation
    CHECK(rx.e3_replacement_dev <= 1e-8);

    const SpectralField F2 = embed(F, l16);
    const GaugeState g2{F2, gauge_transform(F2), 0.0, 0.0};
    CHECK(reconstruct_Fx(g2).mismatch < rx.mismatch);
    CHECK(reconstruct_Fxx(g2).mismatch < rxx.mismatch);
  }
}

TEST_CASE("gauge residual", "[gauge]") {
  const Lattice& lat = lat8();
  Trajectory z;
  for (int i = 0; i < 5; ++i) z.push(0.1 * i, SpectralField(lat));
  const GaugeResidualReport rz = gauge_residual(z);
  CHECK(rz.max_residual == 0.0);

  Trajectory two;
  two.push(0.0, SpectralField(lat));
  two.push(0.1, SpectralField(lat));
  CHECK_THROWS_AS(gauge_residual(two), PreconditionError);

  // second-order self convergence on a fixed low-mode trajectory
  SimulationConfig c;
  c.t_end = 0.4;
  c.dt = 0.00125;
  const Trajectory tr = integrate(low_mode_u(0.05), c);
  std::vector<double> hs, rs;
  for (int k : {4, 8, 16, 32}) {
    Trajectory sub;
    for (std::size_t i = 0; i < tr.size(); i += k) sub.push(tr.times[i], tr.states[i]);
    hs.push_back(k * c.dt);
    rs.push_back(gauge_residual(sub).max_residual);
  }
  const double slope = fit_slope(hs, rs);
  INFO("slope " << slope);
  CHECK(slope >= 1.7);
  CHECK(slope <= 2.3);
}

TEST_CASE("gauge residual shrinks with nmax on fixed data", "[gauge]") {
  // moderately large data: the truncation commutator dominates the residual
  auto floor_at = [](int nmax) {
    const Lattice lat(FrequencyVector::golden(), nmax, 4 * nmax);
    RandomFieldSpec s;
    s.profile = DecayProfile::Exponential;
    s.alpha = 1.0;
    s.mean_zero = true;
    SpectralField u = project_box(random_field(lat, s, 5, 0), 2.0, 2.0);
    u *= 0.3 / u.norm2();
    SimulationConfig c;
    c.t_end = 0.1;
    c.dt = 0.001;
    c.cadence = 5;
    return gauge_residual(integrate(u, c)).max_interior;
  };
  const double r8 = floor_at(8), r12 = floor_at(12);
  INFO(r8 << " " << r12);
  CHECK(r12 < r8);
}

TEST_CASE("bootstrap quantities", "[gauge]") {
  const Lattice& lat = lat8();
  Trajectory z;
  for (int i = 0; i < 5; ++i) z.push(0.1 * i, SpectralField(lat));
  const BootstrapValues bz = bootstrap_quantities(z, 0.4);
  CHECK(bz.I == 0.0);
  CHECK(bz.II == 0.0);
  CHECK_THROWS_AS(bootstrap_quantities(z, 0.5), OutOfRangeError);
  CHECK(BootstrapParams{}.in_theorem_range());
  CHECK_FALSE(BootstrapParams{0.9, 0.01, 0.95, 64.0}.in_theorem_range());

  SimulationConfig c;
  c.t_end = 0.2;
  c.dt = 1e-3;
  c.cadence = 20;
  const Trajectory tr = integrate(mean_zero_u(2, 0.5), c);
  double pI = 0.0, pII = 0.0;
  for (double tp : {0.0, 0.05, 0.1, 0.15, 0.2}) {
    const BootstrapValues v = bootstrap_quantities(tr, tp);
    CHECK(v.I >= pI);
    CHECK(v.II >= pII);
    pI = v.I;
    pII = v.II;
  }
  CHECK(pI > 0.0);
}
