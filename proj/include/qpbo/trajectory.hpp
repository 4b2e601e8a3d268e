#pragma once

#include <map>
#include <string>
#include <vector>

#include "spectral_core.hpp"

namespace qpbo {

// Time-stamped states. `meta` carries integrator and provenance strings
// that end up in manifests.
struct Trajectory {
  std::vector<double> times;
  std::vector<SpectralField> states;
  std::map<std::string, std::string> meta;

  std::size_t size() const { return states.size(); }
  bool empty() const { return states.empty(); }
  const Lattice& lattice() const { return states.at(0).lattice(); }

  void push(double t, SpectralField u) {
    times.push_back(t);
    states.push_back(std::move(u));
  }

  // Samples with t <= t_max (plus a small tolerance for rounded times).
  Trajectory prefix(double t_max) const {
    Trajectory out;
    out.meta = meta;
    for (std::size_t i = 0; i < size(); ++i)
      if (times[i] <= t_max + 1e-12 * std::max(1.0, std::abs(t_max))) out.push(times[i], states[i]);
    return out;
  }
};

}  // namespace qpbo
