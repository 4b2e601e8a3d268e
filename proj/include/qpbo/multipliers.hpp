#pragma once

// Directional Fourier multipliers. Every operator is diagonal in the
// lattice basis with a symbol in (xi1, xi2) = (omega.n, omega_perp.n).

#include <cmath>
#include <complex>
#include <cstdio>
#include <functional>
#include <ostream>
#include <string>
#include <string_view>

#include "spectral_core.hpp"

namespace qpbo {

// Smooth monotone step: 0 on (-inf, 1/2], 1 on [2, inf).
class CutoffProfile {
 public:
  CutoffProfile() : rho_(default_rho), name_("smoothstep") {}
  CutoffProfile(std::function<double(double)> rho, std::string name)
      : rho_(std::move(rho)), name_(std::move(name)) {}

  double operator()(double x) const { return rho_(x); }
  const std::string& name() const { return name_; }

  static double smooth_step(double t) {
    auto h = [](double s) { return s > 0.0 ? std::exp(-1.0 / s) : 0.0; };
    if (t <= 0.0) return 0.0;
    if (t >= 1.0) return 1.0;
    const double a = h(t), b = h(1.0 - t);
    return a / (a + b);
  }
  static double default_rho(double x) { return smooth_step((x - 0.5) / 1.5); }

  static CutoffProfile by_name(std::string_view name) {
    if (name == "smoothstep") return {};
    // C^1 cosine ramp on the same transition band; handy for sensitivity runs.
    if (name == "cosine")
      return CutoffProfile(
          [](double x) {
            if (x <= 0.5) return 0.0;
            if (x >= 2.0) return 1.0;
            return 0.5 - 0.5 * std::cos(std::numbers::pi * (x - 0.5) / 1.5);
          },
          "cosine");
    throw DomainError("unknown cutoff profile '" + std::string(name) + "'");
  }

 private:
  std::function<double(double)> rho_;
  std::string name_;
};

enum class Projection { PlusHi, MinusHi, Lo, PlusHI, MinusHI, LO, Plus, Minus };

inline Projection projection_from_string(std::string_view s) {
  if (s == "+hi") return Projection::PlusHi;
  if (s == "-hi") return Projection::MinusHi;
  if (s == "lo") return Projection::Lo;
  if (s == "+HI") return Projection::PlusHI;
  if (s == "-HI") return Projection::MinusHI;
  if (s == "LO") return Projection::LO;
  if (s == "+") return Projection::Plus;
  if (s == "-") return Projection::Minus;
  throw DomainError("unknown projection kind '" + std::string(s) + "'");
}

class SymbolTable {
 public:
  SymbolTable() = default;
  explicit SymbolTable(CutoffProfile rho) : rho_(std::move(rho)) {}

  const CutoffProfile& profile() const { return rho_; }

  double psi_plus_hi(double x) const { return rho_(x); }
  double psi_minus_hi(double x) const { return rho_(-x); }
  double psi_lo(double x) const { return 1.0 - psi_plus_hi(x) - psi_minus_hi(x); }
  double psi_plus_HI(double x) const { return psi_plus_hi(x / 4.0); }
  double psi_minus_HI(double x) const { return psi_minus_hi(x / 4.0); }
  double psi_LO(double x) const { return psi_lo(x / 4.0); }

  double projection(Projection k, double xi1) const {
    switch (k) {
      case Projection::PlusHi: return psi_plus_hi(xi1);
      case Projection::MinusHi: return psi_minus_hi(xi1);
      case Projection::Lo: return psi_lo(xi1);
      case Projection::PlusHI: return psi_plus_HI(xi1);
      case Projection::MinusHI: return psi_minus_HI(xi1);
      case Projection::LO: return psi_LO(xi1);
      case Projection::Plus: return xi1 > 0.0 ? 1.0 : 0.0;
      case Projection::Minus: return xi1 < 0.0 ? 1.0 : 0.0;
    }
    return 0.0;
  }

  static const SymbolTable& standard() {
    static const SymbolTable t;
    return t;
  }

 private:
  CutoffProfile rho_;
};

// Generic engine: uhat_out(n) = m(n) uhat(n). The symbol is called as
// m(xi1, xi2) and may return double or complex.
template <class Symbol>
SpectralField apply_multiplier(const SpectralField& f, Symbol&& m) {
  const Lattice& lat = f.lattice();
  SpectralField g(lat);
  const int N = lat.nmax();
  std::size_t i = 0;
  for (int n1 = -N; n1 <= N; ++n1)
    for (int n2 = -N; n2 <= N; ++n2, ++i) {
      const cplx c = f[i];
      if (c == cplx{}) continue;
      g[i] = cplx(m(lat.xi1(n1, n2), lat.xi2(n1, n2))) * c;
    }
  return g;
}

namespace detail {
inline void require_order(double s, const char* what) {
  if (!(s >= 0.0) || !std::isfinite(s))
    throw DomainError(std::string(what) + ": order must be finite and >= 0");
}
inline double sgn(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }
}  // namespace detail

inline SpectralField d_x(const SpectralField& f) {
  return apply_multiplier(f, [](double x1, double) { return cplx(0.0, x1); });
}
inline SpectralField d_y(const SpectralField& f) {
  return apply_multiplier(f, [](double, double x2) { return cplx(0.0, x2); });
}
inline SpectralField d_xx(const SpectralField& f) {
  return apply_multiplier(f, [](double x1, double) { return -x1 * x1; });
}
// Mean-zero primitive: 1/(i xi1) off the zero mode. Tiny but nonzero xi1 is
// applied as is (see small_divisor_count).
inline SpectralField d_x_inverse(const SpectralField& f) {
  const Lattice& lat = f.lattice();
  SpectralField g(lat);
  for (std::size_t i = 0; i < f.size(); ++i) {
    const Mode m = lat.mode(i);
    if (m.n1 == 0 && m.n2 == 0) continue;
    const double x1 = lat.xi1(m.n1, m.n2);
    if (x1 == 0.0) continue;  // only possible for commensurable omega
    g[i] = f[i] / cplx(0.0, x1);
  }
  return g;
}

inline SpectralField bracket_dx(const SpectralField& f, double s) {
  detail::require_order(s, "bracket_dx");
  return apply_multiplier(f, [s](double x1, double) { return std::pow(1.0 + x1 * x1, 0.5 * s); });
}
inline SpectralField bracket_dy(const SpectralField& f, double s) {
  detail::require_order(s, "bracket_dy");
  return apply_multiplier(f, [s](double, double x2) { return std::pow(1.0 + x2 * x2, 0.5 * s); });
}
inline SpectralField bracket_nabla(const SpectralField& f, double sigma) {
  detail::require_order(sigma, "bracket_nabla");
  return apply_multiplier(
      f, [sigma](double x1, double x2) { return std::pow(1.0 + x1 * x1 + x2 * x2, 0.5 * sigma); });
}
// |d_x|^s and |grad|^s (homogeneous; kill the zero frequency for s > 0).
inline SpectralField abs_dx(const SpectralField& f, double s) {
  detail::require_order(s, "abs_dx");
  return apply_multiplier(f, [s](double x1, double) { return s == 0.0 ? 1.0 : std::pow(std::abs(x1), s); });
}
inline SpectralField abs_nabla(const SpectralField& f, double s) {
  detail::require_order(s, "abs_nabla");
  return apply_multiplier(
      f, [s](double x1, double x2) { return s == 0.0 ? 1.0 : std::pow(std::hypot(x1, x2), s); });
}
// Integer power (i xi1)^k.
inline SpectralField d_x_power(const SpectralField& f, int k) {
  if (k < 0) throw DomainError("d_x_power: negative power");
  return apply_multiplier(f, [k](double x1, double) { return std::pow(cplx(0.0, x1), k); });
}

inline SpectralField hilbert(const SpectralField& f) {
  return apply_multiplier(f, [](double x1, double) { return cplx(0.0, -detail::sgn(x1)); });
}

inline SpectralField project(const SpectralField& f, Projection k,
                             const SymbolTable& tab = SymbolTable::standard()) {
  return apply_multiplier(f, [&](double x1, double) { return tab.projection(k, x1); });
}

// P_{q,r}: keep |xi1| <= q and |xi2| <= r.
inline SpectralField project_box(const SpectralField& f, double q, double r) {
  if (!(q >= 0.0) || !(r >= 0.0)) throw DomainError("project_box: thresholds must be >= 0");
  return apply_multiplier(f, [q, r](double x1, double x2) {
    return (std::abs(x1) <= q && std::abs(x2) <= r) ? 1.0 : 0.0;
  });
}

inline SpectralField schrodinger_propagator(const SpectralField& f, double t) {
  if (!std::isfinite(t)) throw DomainError("propagator time must be finite");
  return apply_multiplier(f, [t](double x1, double) { return std::polar(1.0, -t * x1 * x1); });
}

enum class Model { BO, KdV, dNLS };

inline Model model_from_string(std::string_view s) {
  if (s == "BO" || s == "bo") return Model::BO;
  if (s == "KdV" || s == "kdv") return Model::KdV;
  if (s == "dNLS" || s == "dnls") return Model::dNLS;
  throw DomainError("unknown model '" + std::string(s) + "'");
}
inline const char* to_string(Model m) {
  switch (m) {
    case Model::BO: return "BO";
    case Model::KdV: return "KdV";
    case Model::dNLS: return "dNLS";
  }
  return "?";
}
inline bool is_real_model(Model m) { return m != Model::dNLS; }

// Linear symbol L with u_t = -L u for the dispersive part.
//   BO   u_t = -H u_xx      L = i xi1 |xi1|
//   KdV  u_t = -u_xxx       L = -i xi1^3
//   dNLS u_t =  i u_xx      L = i xi1^2
inline cplx linear_symbol(Model m, double xi1) {
  switch (m) {
    case Model::BO: return {0.0, xi1 * std::abs(xi1)};
    case Model::KdV: return {0.0, -xi1 * xi1 * xi1};
    case Model::dNLS: return {0.0, xi1 * xi1};
  }
  return {};
}

inline SpectralField dispersion_propagator(const SpectralField& f, double t, Model m) {
  if (!std::isfinite(t)) throw DomainError("propagator time must be finite");
  return apply_multiplier(f, [t, m](double x1, double) { return std::exp(-t * linear_symbol(m, x1)); });
}

// Modes with 0 < |xi1| < threshold: their inverse derivative is huge.
inline std::size_t small_divisor_count(const Lattice& lat, double threshold = 1e-8) {
  std::size_t c = 0;
  for (std::size_t i = 0; i < lat.size(); ++i) {
    const double x = std::abs(lat.xi1(i));
    if (x > 0.0 && x < threshold) ++c;
  }
  return c;
}

// Nonzero modes with xi1 == 0 exactly (commensurable omega).
inline std::size_t zero_divisor_count(const Lattice& lat) {
  std::size_t c = 0;
  for (std::size_t i = 0; i < lat.size(); ++i) {
    const Mode m = lat.mode(i);
    if ((m.n1 != 0 || m.n2 != 0) && lat.xi1(i) == 0.0) ++c;
  }
  return c;
}

// Audit dump of the symbol table over the block.
inline void write_symbol_table_csv(std::ostream& os, const Lattice& lat,
                                   const SymbolTable& tab = SymbolTable::standard()) {
  os << "n1,n2,xi1,xi2,psi_plus_hi,psi_lo,psi_minus_hi,psi_plus_HI,psi_LO,psi_minus_HI\n";
  char buf[64];
  auto put = [&](double v, char sep) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    os << buf << sep;
  };
  for (std::size_t i = 0; i < lat.size(); ++i) {
    const Mode m = lat.mode(i);
    const double x1 = lat.xi1(m.n1, m.n2), x2 = lat.xi2(m.n1, m.n2);
    os << m.n1 << ',' << m.n2 << ',';
    put(x1, ',');
    put(x2, ',');
    put(tab.psi_plus_hi(x1), ',');
    put(tab.psi_lo(x1), ',');
    put(tab.psi_minus_hi(x1), ',');
    put(tab.psi_plus_HI(x1), ',');
    put(tab.psi_LO(x1), ',');
    put(tab.psi_minus_HI(x1), '\n');
  }
}

}  // namespace qpbo
