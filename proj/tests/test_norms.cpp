#include <catch_amalgamated.hpp>

#include <qpbo/norms.hpp>
#include <qpbo/random_fields.hpp>

#include "oracles.hpp"

using namespace qpbo;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {
const Lattice& lat8() {
  static const Lattice l(FrequencyVector::golden(), 8, 32);
  return l;
}
SpectralField rnd(std::uint64_t sample, bool real = true) {
  RandomFieldSpec s;
  s.alpha = 1.5;
  s.real = real;
  return random_field(lat8(), s, 4242, sample);
}
}  // namespace

TEST_CASE("Lp norms", "[norms]") {
  const Lattice& lat = lat8();
  const SpectralField c = make_field_from_modes(lat, {{{1, 0}, 1.0}, {{-1, 0}, 1.0}});
  CHECK_THAT(lp_norm(c, 2.0), WithinAbs(std::sqrt(2.0), 1e-14));
  CHECK(lp_norm(SpectralField(lat), 3.0) == 0.0);
  CHECK(lp_norm(SpectralField(lat), inf) == 0.0);
  CHECK_THAT(lp_norm(unit_mode(lat, 3, -5), inf), WithinAbs(1.0, 1e-14));
  CHECK_THROWS_AS(lp_norm(c, 0.5), DomainError);

  for (std::uint64_t s = 0; s < 4; ++s) {
    const SpectralField f = rnd(s, s % 2 == 0);
    CHECK_THAT(lp_norm(f, 2.0) * lp_norm(f, 2.0), WithinRel(f.norm2_sq(), 1e-12));
    // direct-sum quadrature oracle for p = 3
    const auto samples = oracle::direct_samples(f, lat.grid());
    double acc = 0.0;
    for (const auto& z : samples) acc += std::pow(std::abs(z), 3.0);
    CHECK_THAT(lp_norm(f, 3.0), WithinRel(std::cbrt(acc / samples.size()), 1e-12));
    // p-monotonicity on a probability space
    CHECK(lp_norm(f, 2.0) <= lp_norm(f, 4.0) * (1 + 1e-14));
    CHECK(lp_norm(f, 4.0) <= lp_norm(f, inf) * (1 + 1e-14));
  }
}

TEST_CASE("anisotropic, Y and X norms on single modes", "[norms]") {
  const Lattice& lat = lat8();
  const int k1 = 2, k2 = -3;
  const double x1 = lat.xi1(k1, k2), x2 = lat.xi2(k1, k2);
  const SpectralField e = unit_mode(lat, k1, k2);
  const double s1 = 1.5, s2 = 0.75;
  CHECK_THAT(anisotropic_norm(e, s1, s2, 2.0),
             WithinRel(std::pow(1 + x1 * x1, s1 / 2) + std::pow(1 + x2 * x2, s2 / 2), 1e-13));
  const double sigma = 0.9;
  const double y = std::pow(1 + x1 * x1 + x2 * x2, sigma / 2) * (std::sqrt(1 + x1 * x1) + 1.0 / std::abs(x1));
  CHECK_THAT(y_norm(e, sigma), WithinRel(y, 1e-13));
  const double x = std::pow(1 + x1 * x1, s1 / 2) + std::pow(1 + x2 * x2, s2 / 2) + std::pow(1 + x2 * x2, s2 / 2) / std::abs(x1);
  CHECK_THAT(x_norm(e, s1, s2), WithinRel(x, 1e-13));
  CHECK(x_norm(SpectralField(lat), s1, s2) == 0.0);
  // the mean is invisible to the inverse-derivative part
  const SpectralField one = constant_field(lat, 1.0);
  CHECK_THAT(y_norm(one, sigma), WithinAbs(1.0, 1e-15));
}

TEST_CASE("norm axioms and monotonicity", "[norms]") {
  for (std::uint64_t s = 0; s < 6; ++s) {
    const SpectralField f = rnd(s), g = rnd(s + 50);
    CHECK(x_norm(f + g, 2.0, 1.0) <= x_norm(f, 2.0, 1.0) + x_norm(g, 2.0, 1.0) + 1e-12);
    CHECK_THAT(x_norm(-3.0 * f, 2.0, 1.0), WithinRel(3.0 * x_norm(f, 2.0, 1.0), 1e-13));
    CHECK(y_norm(f + g, 0.9) <= y_norm(f, 0.9) + y_norm(g, 0.9) + 1e-12);
    double prev = 0.0;
    for (double s1 = 0.0; s1 <= 3.0; s1 += 0.5) {
      const double v = anisotropic_norm(f, s1, 0.5, 2.0);
      CHECK(v >= prev);
      prev = v;
    }
    prev = 0.0;
    for (double s2 = 0.0; s2 <= 3.0; s2 += 0.5) {
      const double v = anisotropic_norm(f, 1.0, s2, 4.0);
      CHECK(v >= prev * (1 - 1e-14));
      prev = v;
    }
  }
}

TEST_CASE("spacetime norms", "[norms]") {
  const Lattice& lat = lat8();
  const SpectralField f = rnd(3);
  Trajectory c;
  for (int i = 0; i <= 10; ++i) c.push(0.05 * i, f);
  const double T = 0.5;
  CHECK_THAT(mixed_spacetime_norm(c, 4.0, 2.0), WithinRel(std::pow(T, 0.25) * lp_norm(f, 2.0), 1e-13));
  CHECK_THAT(mixed_spacetime_norm(c, 1.5, inf), WithinRel(std::pow(T, 1 / 1.5) * lp_norm(f, inf), 1e-13));
  CHECK_THAT(mixed_spacetime_norm(c, inf, 3.0), WithinRel(lp_norm(f, 3.0), 1e-13));

  Trajectory z;
  for (int i = 0; i <= 4; ++i) z.push(0.1 * i, SpectralField(lat));
  CHECK(strichartz_norm(z) == 0.0);

  Trajectory s;
  for (int i = 0; i <= 20; ++i) s.push(0.05 * i, schrodinger_propagator(f, 0.05 * i));
  CHECK_THAT(mixed_spacetime_norm(s, inf, 2.0), WithinRel(lp_norm(f, 2.0), 1e-13));

  CHECK_THROWS_AS(mixed_spacetime_norm(Trajectory{}, 2.0, 2.0), PreconditionError);
  CHECK_THROWS_AS(mixed_spacetime_norm(c, 0.0, 2.0), DomainError);
}
