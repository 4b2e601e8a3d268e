#pragma once

// Counter-based random fields. Each coefficient is a pure function of
// (seed, sample, stream, mode), so an ensemble drawn at nmax is the
// truncation of the same ensemble drawn at 2*nmax.

#include <cmath>
#include <cstdint>
#include <numbers>

#include "spectral_core.hpp"

namespace qpbo {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t hash_words(std::initializer_list<std::uint64_t> ws) {
  std::uint64_t h = 0x243f6a8885a308d3ULL;
  for (auto w : ws) h = splitmix64(h ^ w);
  return h;
}

// Uniform in (0, 1).
inline double hash_uniform(std::uint64_t h) {
  return (static_cast<double>(h >> 11) + 0.5) * 0x1.0p-53;
}

enum class DecayProfile { Power, Exponential };

struct RandomFieldSpec {
  DecayProfile profile = DecayProfile::Power;
  double alpha = 2.0;       // |uhat(n)| ~ <|n|>^{-alpha} or exp(-alpha |n|)
  bool real = true;
  bool mean_zero = false;
  double l2_norm = 0.0;     // > 0 rescales to this L2 norm
};

inline double decay_weight(const RandomFieldSpec& s, int n1, int n2) {
  const double r2 = static_cast<double>(n1) * n1 + static_cast<double>(n2) * n2;
  if (s.profile == DecayProfile::Power) return std::pow(1.0 + r2, -0.5 * s.alpha);
  return std::exp(-s.alpha * std::sqrt(r2));
}

// Gaussian-magnitude, uniform-phase coefficient for one mode.
inline cplx random_coefficient(std::uint64_t seed, std::uint64_t sample, std::uint64_t stream, int n1, int n2) {
  const auto key = [&](std::uint64_t k) {
    return hash_words({seed, sample, stream, static_cast<std::uint64_t>(static_cast<std::int64_t>(n1)),
                       static_cast<std::uint64_t>(static_cast<std::int64_t>(n2)), k});
  };
  const double u1 = hash_uniform(key(1)), u2 = hash_uniform(key(2)), u3 = hash_uniform(key(3));
  const double g = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  return std::polar(std::abs(g), 2.0 * std::numbers::pi * u3);
}

inline SpectralField random_field(const Lattice& lat, const RandomFieldSpec& spec, std::uint64_t seed,
                                  std::uint64_t sample = 0, std::uint64_t stream = 0) {
  SpectralField f(lat);
  const int N = lat.nmax();
  for (int n1 = -N; n1 <= N; ++n1)
    for (int n2 = -N; n2 <= N; ++n2) {
      if (spec.mean_zero && n1 == 0 && n2 == 0) continue;
      const double w = decay_weight(spec, n1, n2);
      if (!spec.real) {
        f[lat.index(n1, n2)] = w * random_coefficient(seed, sample, stream, n1, n2);
        continue;
      }
      const bool positive = n1 > 0 || (n1 == 0 && n2 >= 0);
      if (!positive) continue;
      cplx c = w * random_coefficient(seed, sample, stream, n1, n2);
      if (n1 == 0 && n2 == 0) c = {c.real() >= 0 ? std::abs(c) : -std::abs(c), 0.0};
      f[lat.index(n1, n2)] = c;
      f[lat.index(-n1, -n2)] = std::conj(c);
    }
  if (spec.l2_norm > 0.0) {
    const double nrm = f.norm2();
    if (nrm > 0.0) f *= spec.l2_norm / nrm;
  }
  return f;
}

}  // namespace qpbo
