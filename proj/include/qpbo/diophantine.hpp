#pragma once

// Continued fractions, small-divisor statistics on the lattice, and the
// Sobolev-to-Y embedding threshold.
//
// Expansions of a real alpha run on the exact dyadic rational that the
// software-quad value represents, so every quotient is computed exactly; a
// quotient is kept only while it is still determined by alpha itself, i.e.
// while q_k^2 times the rounding error of alpha stays small. Past that point
// the result is flagged truncated.

#include <boost/math/constants/constants.hpp>
#include <boost/multiprecision/cpp_bin_float.hpp>
#include <boost/multiprecision/cpp_int.hpp>

#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "spectral_core.hpp"

namespace qpbo {

using quad = boost::multiprecision::cpp_bin_float_quad;
using bigint = boost::multiprecision::cpp_int;

struct ContinuedFraction {
  quad alpha;
  std::vector<bigint> quotients;                      // a0; a1, a2, ...
  std::vector<std::pair<bigint, bigint>> convergents; // (p_k, q_k)
  bool truncated = false;   // working precision ran out before the requested depth
  bool terminated = false;  // exact rational input, expansion finished

  std::size_t depth() const { return quotients.size(); }
};

namespace detail {

inline bigint floor_div(const bigint& a, const bigint& b) {
  bigint q = a / b, r = a % b;
  if (r != 0 && ((r < 0) != (b < 0))) --q;
  return q;
}

// Euclid on num/den. `accept(q_k)` decides whether a new convergent is still
// trustworthy; returning false stops with the truncation flag.
template <class Accept>
ContinuedFraction expand(bigint num, bigint den, int depth, Accept&& accept) {
  if (depth < 1) throw DomainError("continued_fraction: depth must be >= 1");
  if (den == 0) throw DomainError("continued_fraction: zero denominator");
  if (den < 0) num = -num, den = -den;
  ContinuedFraction cf;
  bigint p2 = 0, p1 = 1, q2 = 1, q1 = 0;
  for (int k = 0; k < depth; ++k) {
    if (den == 0) {
      cf.terminated = true;
      break;
    }
    const bigint a = floor_div(num, den);
    const bigint p = a * p1 + p2, q = a * q1 + q2;
    if (k > 0 && !accept(q)) {
      cf.truncated = true;
      break;
    }
    cf.quotients.push_back(a);
    cf.convergents.emplace_back(p, q);
    p2 = p1, p1 = p, q2 = q1, q1 = q;
    const bigint r = num - a * den;
    num = den;
    den = r;
  }
  if (!cf.truncated && den == 0) cf.terminated = true;
  return cf;
}

// Exact dyadic rational of a quad value.
inline std::pair<bigint, bigint> dyadic(const quad& x) {
  int e = 0;
  const quad m = boost::multiprecision::frexp(x, &e);  // x = m 2^e, |m| in [0.5, 1)
  constexpr int bits = std::numeric_limits<quad>::digits;
  const bigint M = static_cast<bigint>(boost::multiprecision::ldexp(m, bits));
  const int shift = e - bits;
  if (shift >= 0) return {M << shift, bigint(1)};
  return {M, bigint(1) << -shift};
}

}  // namespace detail

inline ContinuedFraction continued_fraction(const quad& alpha, int depth) {
  if (!boost::multiprecision::isfinite(alpha)) throw DomainError("continued_fraction: alpha must be finite");
  const auto [num, den] = detail::dyadic(alpha);
  const quad err = boost::multiprecision::fabs(alpha) * std::numeric_limits<quad>::epsilon() +
                   std::numeric_limits<quad>::min();
  ContinuedFraction cf = detail::expand(num, den, depth, [&](const bigint& q) {
    const quad qq(q);
    return qq * qq * err < quad(1e-3);
  });
  cf.alpha = alpha;
  // an exactly representable value that is not an intended rational still
  // ends the expansion; that is the truncation case, not termination
  if (cf.terminated && static_cast<int>(cf.depth()) < depth) {
    const quad qq(cf.convergents.back().second);
    if (!(qq * qq * err < quad(1e-3))) cf.truncated = true, cf.terminated = false;
  }
  return cf;
}

inline ContinuedFraction continued_fraction(const bigint& p, const bigint& q, int depth) {
  ContinuedFraction cf = detail::expand(p, q, depth, [](const bigint&) { return true; });
  cf.alpha = quad(p) / quad(q);
  return cf;
}

// Named constants, "p/q" rationals, "liouville:K" (exact partial sum of
// 10^{-k!}, k = 1..K), or a decimal literal.
struct AlphaInput {
  quad value;
  std::optional<std::pair<bigint, bigint>> rational;
};

inline std::pair<bigint, bigint> liouville_partial_sum(int K) {
  if (K < 1 || K > 6) throw DomainError("liouville partial sum: K must lie in 1..6");
  long long fact = 1;
  std::vector<long long> f;
  for (int k = 1; k <= K; ++k) f.push_back(fact *= k);
  const bigint den = boost::multiprecision::pow(bigint(10), static_cast<unsigned>(f.back()));
  bigint num = 0;
  for (long long e : f) num += den / boost::multiprecision::pow(bigint(10), static_cast<unsigned>(e));
  return {num, den};
}

inline AlphaInput parse_alpha(const std::string& s) {
  using boost::multiprecision::sqrt;
  if (s == "phi" || s == "golden") return {(1 + sqrt(quad(5))) / 2, std::nullopt};
  if (s == "sqrt2") return {sqrt(quad(2)), std::nullopt};
  if (s == "sqrt3") return {sqrt(quad(3)), std::nullopt};
  if (s == "e") return {boost::multiprecision::exp(quad(1)), std::nullopt};
  if (s == "pi") return {boost::math::constants::pi<quad>(), std::nullopt};
  try {
    if (s.rfind("liouville:", 0) == 0) {
      const auto r = liouville_partial_sum(std::stoi(s.substr(10)));
      return {quad(r.first) / quad(r.second), r};
    }
    if (const auto slash = s.find('/'); slash != std::string::npos) {
      const bigint p(s.substr(0, slash)), q(s.substr(slash + 1));
      if (q == 0) throw DomainError("alpha: zero denominator");
      return {quad(p) / quad(q), std::make_pair(p, q)};
    }
    std::size_t used = 0;
    (void)std::stod(s, &used);
    if (used != s.size()) throw DomainError("alpha: cannot parse '" + s + "'");
    return {quad(s), std::nullopt};
  } catch (const std::logic_error&) {
    throw DomainError("alpha: cannot parse '" + s + "'");
  }
}

inline ContinuedFraction continued_fraction(const AlphaInput& a, int depth) {
  return a.rational ? continued_fraction(a.rational->first, a.rational->second, depth) : continued_fraction(a.value, depth);
}

struct ApproximabilityReport {
  bool badly_approximable = false;  // advisory: finite depth only
  bigint max_quotient = 0;          // over a1, a2, ...
  std::size_t argmax = 0;           // index k of the largest a_k
  std::size_t depth = 0;
  bool truncated = false;
};

inline ApproximabilityReport is_badly_approximable(const ContinuedFraction& cf, const bigint& bound) {
  ApproximabilityReport r;
  r.depth = cf.depth();
  r.truncated = cf.truncated;
  for (std::size_t k = 1; k < cf.quotients.size(); ++k)
    if (cf.quotients[k] > r.max_quotient) r.max_quotient = cf.quotients[k], r.argmax = k;
  // a terminated expansion is rational, never badly approximable
  r.badly_approximable = !cf.terminated && r.max_quotient <= bound;
  return r;
}

inline ApproximabilityReport is_badly_approximable(const quad& alpha, int depth, const bigint& bound) {
  return is_badly_approximable(continued_fraction(alpha, depth), bound);
}

// m(R) = max_{0 < |n| <= R} |omega.n|^{-1} over the Euclidean lattice ball.
struct SmallDivisorRow {
  int R;
  double m;        // +inf once a zero divisor is inside the ball
  Mode argmax;     // a mode attaining m(R)
};

struct SmallDivisorScan {
  std::vector<SmallDivisorRow> rows;  // R = 1..N
  double slope = 0.0;                 // log m vs log R fit
  std::vector<Mode> zero_divisors;    // |omega.n| <= 1e-12 |omega| |n| (one sign per pair)
  bool commensurable() const { return !zero_divisors.empty(); }
};

inline SmallDivisorScan small_divisor_scan(const FrequencyVector& omega, int N, int fit_from = 4) {
  if (N < 1) throw DomainError("small_divisor_scan: N must be >= 1");
  const double w1 = omega.w1(), w2 = omega.w2(), wn = omega.norm();
  std::vector<double> shell_min(N + 1, std::numeric_limits<double>::infinity());
  std::vector<Mode> shell_arg(N + 1, Mode{0, 0});
  SmallDivisorScan out;
  for (int n1 = -N; n1 <= N; ++n1)
    for (int n2 = -N; n2 <= N; ++n2) {
      if (n1 == 0 && n2 == 0) continue;
      const long long r2 = static_cast<long long>(n1) * n1 + static_cast<long long>(n2) * n2;
      if (r2 > static_cast<long long>(N) * N) continue;
      int R = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(r2))));
      while (static_cast<long long>(R) * R < r2) ++R;
      while (R > 1 && static_cast<long long>(R - 1) * (R - 1) >= r2) --R;
      const double d = std::abs(w1 * n1 + w2 * n2);
      const double len = std::sqrt(static_cast<double>(r2));
      if (d <= 1e-12 * wn * len) {
        if (n1 > 0 || (n1 == 0 && n2 > 0)) out.zero_divisors.push_back({n1, n2});
        shell_min[R] = 0.0;
        shell_arg[R] = {n1, n2};
        continue;
      }
      if (d < shell_min[R]) shell_min[R] = d, shell_arg[R] = {n1, n2};
    }
  double best = 0.0;
  Mode arg{0, 0};
  for (int R = 1; R <= N; ++R) {
    const double inv = shell_min[R] == 0.0 ? std::numeric_limits<double>::infinity() : 1.0 / shell_min[R];
    if (inv > best) best = inv, arg = shell_arg[R];
    out.rows.push_back({R, best, arg});
  }
  // least squares on log-spaced radii (quarter-octave), finite rows only
  std::vector<double> lx, ly;
  int last = 0;
  for (double r = std::max(1, fit_from); r <= N; r *= std::pow(2.0, 0.25)) {
    const int R = static_cast<int>(std::lround(r));
    if (R == last || R > N) continue;
    last = R;
    const double m = out.rows[R - 1].m;
    if (!std::isfinite(m)) continue;
    lx.push_back(std::log(static_cast<double>(R)));
    ly.push_back(std::log(m));
  }
  if (lx.size() >= 2) {
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < lx.size(); ++i) mx += lx[i], my += ly[i];
    mx /= lx.size();
    my /= ly.size();
    double sxy = 0, sxx = 0;
    for (std::size_t i = 0; i < lx.size(); ++i) sxy += (lx[i] - mx) * (ly[i] - my), sxx += (lx[i] - mx) * (lx[i] - mx);
    out.slope = sxy / sxx;
  } else {
    out.slope = std::numeric_limits<double>::quiet_NaN();
  }
  return out;
}

// Reduced pair (p, q), q > 0, with p/q = -n2/n1: the rational that omega.n
// small makes close to alpha = w1/w2.
inline std::pair<bigint, bigint> tangential_pair(const Mode& n) {
  if (n.n1 == 0) throw DomainError("tangential_pair: n1 = 0");
  bigint p = -n.n2, q = n.n1;
  if (q < 0) p = -p, q = -q;
  const bigint g = boost::multiprecision::gcd(p < 0 ? bigint(-p) : p, q);
  return {p / g, q / g};
}

inline bool is_convergent(const ContinuedFraction& cf, const std::pair<bigint, bigint>& pq) {
  for (const auto& c : cf.convergents)
    if (c == pq) return true;
  return false;
}

struct Interval {
  double lo = 0.0, hi = 0.0;
  bool lo_open = false, hi_open = true;

  bool empty() const { return lo > hi || (lo == hi && (lo_open || hi_open)); }
  bool contains(double x) const {
    return !empty() && (lo_open ? x > lo : x >= lo) && (hi_open ? x < hi : x <= hi);
  }
  Interval intersect(const Interval& o) const {
    Interval r;
    if (lo > o.lo) r.lo = lo, r.lo_open = lo_open;
    else if (o.lo > lo) r.lo = o.lo, r.lo_open = o.lo_open;
    else r.lo = lo, r.lo_open = lo_open || o.lo_open;
    if (hi < o.hi) r.hi = hi, r.hi_open = hi_open;
    else if (o.hi < hi) r.hi = o.hi, r.hi_open = o.hi_open;
    else r.hi = hi, r.hi_open = hi_open || o.hi_open;
    return r;
  }
};

inline constexpr double theorem_sigma_floor = 7.0 / 8.0;

struct EmbeddingThreshold {
  double mu = 2.0, s = 0.0;
  Interval general;                    // [0, s - mu + 1)
  std::optional<Interval> refined;     // [0, s - 1] for badly approximable ratios (mu = 2)
  Interval with_theorem;               // general intersected with sigma > 7/8
  std::optional<Interval> refined_with_theorem;
};

inline EmbeddingThreshold embedding_threshold(double mu, double s) {
  if (!(mu >= 1.0)) throw DomainError("embedding_threshold: mu must be >= 1");
  if (!(s >= 0.0)) throw DomainError("embedding_threshold: s must be >= 0");
  EmbeddingThreshold t;
  t.mu = mu;
  t.s = s;
  t.general = Interval{0.0, s - mu + 1.0, false, true};
  const Interval floor{theorem_sigma_floor, std::numeric_limits<double>::infinity(), true, true};
  t.with_theorem = t.general.intersect(floor);
  if (mu == 2.0) {
    t.refined = Interval{0.0, s - 1.0, false, false};
    t.refined_with_theorem = t.refined->intersect(floor);
  }
  return t;
}

// ||e_n||_Y / ||e_n||_{H^s} in closed form, with |xi| = |omega| |n| up to
// the rotation (xi1, xi2):
//   <xi>^sigma (<xi1> + 1/|xi1|) / <xi>^s, the inverse part dropped at n = 0.
inline double single_mode_embedding_ratio(double xi1, double xi2, double s, double sigma) {
  const double b = 1.0 + xi1 * xi1 + xi2 * xi2;
  const double y = std::pow(b, 0.5 * sigma) * (std::sqrt(1.0 + xi1 * xi1) + (xi1 != 0.0 ? 1.0 / std::abs(xi1) : 0.0));
  return y / std::pow(b, 0.5 * s);
}

struct EmbeddingScan {
  double max_ratio = 0.0;
  Mode argmax{0, 0};
  double max_half = 0.0;  // same over |n| <= N/2, for the growth trend
  double growth() const { return max_half > 0.0 ? max_ratio / max_half : 0.0; }
};

inline EmbeddingScan embedding_constant_scan(const FrequencyVector& omega, double s, double sigma, int N) {
  if (N < 2) throw DomainError("embedding_constant_scan: N must be >= 2");
  EmbeddingScan out;
  const long long NN = static_cast<long long>(N) * N, HH = static_cast<long long>(N / 2) * (N / 2);
  for (int n1 = -N; n1 <= N; ++n1)
    for (int n2 = -N; n2 <= N; ++n2) {
      const long long r2 = static_cast<long long>(n1) * n1 + static_cast<long long>(n2) * n2;
      if (r2 > NN) continue;
      const double r = single_mode_embedding_ratio(omega.xi1(n1, n2), omega.xi2(n1, n2), s, sigma);
      if (r > out.max_ratio) out.max_ratio = r, out.argmax = {n1, n2};
      if (r2 <= HH) out.max_half = std::max(out.max_half, r);
    }
  return out;
}

}  // namespace qpbo
