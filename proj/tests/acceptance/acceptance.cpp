// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails. Run from ctest or directly; criterion 13 drives the qpbo
// executable (QPBO_CLI_PATH) in a scratch directory (QPBO_ACCEPTANCE_WORK).

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <sys/wait.h>

#include <qpbo/qpbo.hpp>

using namespace qpbo;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", x);
  return buf;
}

const Lattice& lat8() {
  static const Lattice l(FrequencyVector::golden(), 8, 32);
  return l;
}

SimulationConfig sim(double t_end, double dt, int cadence = 1) {
  SimulationConfig c;
  c.t_end = t_end;
  c.dt = dt;
  c.cadence = cadence;
  return c;
}

// smooth (exponentially decaying) real data, P_n-projected, unit L2 norm
SpectralField smooth_data(const Lattice& lat, std::uint64_t seed, std::uint64_t sample, bool mean_zero,
                          double l2 = 1.0) {
  RandomFieldSpec s;
  s.profile = DecayProfile::Exponential;
  s.alpha = 0.8;
  s.mean_zero = mean_zero;
  SpectralField u = GalerkinSystem(lat, SimulationConfig{}).project_n(random_field(lat, s, seed, sample));
  u *= l2 / u.norm2();
  return u;
}

// ---------------------------------------------------------------- 1

Outcome conservation() {
  const auto t0 = std::chrono::steady_clock::now();
  double i1 = 0.0, i2 = 0.0, h = 0.0;
  for (std::uint64_t sample = 0; sample < 3; ++sample) {
    const SpectralField u0 = smooth_data(lat8(), 1, sample, false);
    const SimulationConfig cfg = sim(1.0, 5e-4, 20);
    const Trajectory tr = integrate(u0, cfg);
    const double n = cfg.truncation_for(lat8());
    const Observables o0 = observables(tr.states[0], n);
    for (const auto& u : tr.states) {
      const Observables o = observables(u, n);
      i1 = std::max(i1, std::abs(o.I1 - o0.I1));
      i2 = std::max(i2, std::abs(o.I2 - o0.I2) / o0.I2);
      h = std::max(h, std::abs(o.H_trunc - o0.H_trunc) / std::abs(o0.H_trunc));
    }
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const bool ok = i1 <= 1e-12 && i2 <= 1e-10 && h <= 1e-8 && secs / 3.0 < 120.0;
  return {ok, "3 runs, max |dI1| " + fmt(i1) + ", rel dI2 " + fmt(i2) + ", rel dH_trunc " + fmt(h) +
                  ", " + fmt(secs / 3.0) + " s per run"};
}

// ---------------------------------------------------------------- 2

Outcome galilean() {
  double worst = 0.0, amin = inf;
  for (std::uint64_t sample = 0; sample < 3; ++sample) {
    const SpectralField u0 = smooth_data(lat8(), 2, sample, false);
    const auto [v0, a] = galilean_normalize(u0);
    const SimulationConfig cfg = sim(0.5, 5e-4, 100);
    worst = std::max(worst, galilean_compare(integrate(u0, cfg), integrate(v0, cfg), a));
    amin = std::min(amin, std::abs(a));
  }
  return {worst <= 1e-8 && amin > 1e-3, "max L2 deviation " + fmt(worst) + " (min |mean| " + fmt(amin) + ")"};
}

// ---------------------------------------------------------------- 3

Outcome integrator_order() {
  const SpectralField u0 = smooth_data(lat8(), 3, 0, false);
  bool ok = true;
  std::string d;
  for (Integrator in : {Integrator::IFRK4, Integrator::ETDRK4}) {
    auto run = [&](double dt) {
      SimulationConfig c = sim(0.1, dt, 1000000);
      c.integrator = in;
      return integrate(u0, c).states.back();
    };
    const SpectralField a = run(0.01), b = run(0.005), c = run(0.0025), e = run(0.00125);
    const double r1 = distance(a, b) / distance(b, c), r2 = distance(b, c) / distance(c, e);
    ok = ok && r1 >= 12.0 && r1 <= 20.0 && r2 >= 12.0 && r2 <= 20.0;
    d += std::string(d.empty() ? "" : ", ") + to_string(in) + " factors " + fmt(r1) + " " + fmt(r2);
  }
  return {ok, d};
}

// ---------------------------------------------------------------- 4

Outcome gauge_identity() {
  const Lattice l16(FrequencyVector::golden(), 16, 64);
  double worst = 0.0;
  bool decreasing = true;
  for (std::uint64_t sample = 0; sample < 5; ++sample) {
    RandomFieldSpec s;
    s.profile = DecayProfile::Exponential;
    s.alpha = 3.0;
    s.l2_norm = 0.5;
    const SpectralField F = random_field(lat8(), s, 4, sample);
    const GaugeState g{F, gauge_transform(F, 4), 0.0, 0.0};
    const double mx = reconstruct_Fx(g, 4).mismatch, mxx = reconstruct_Fxx(g, 4).mismatch;
    const SpectralField F2 = embed(F, l16);
    const GaugeState g2{F2, gauge_transform(F2, 4), 0.0, 0.0};
    decreasing = decreasing && reconstruct_Fx(g2, 4).mismatch < mx && reconstruct_Fxx(g2, 4).mismatch < mxx;
    worst = std::max({worst, mx, mxx});
  }
  return {worst <= 1e-8 && decreasing, "max mismatch " + fmt(worst) + " at nmax 8, " +
                                           (decreasing ? "smaller" : "NOT smaller") + " at nmax 16"};
}

// ---------------------------------------------------------------- 5

// fixed smooth trajectory supported on |xi| <= 1.5
Trajectory low_mode_trajectory(double dt) {
  RandomFieldSpec s;
  s.profile = DecayProfile::Exponential;
  s.alpha = 0.5;
  s.mean_zero = true;
  SpectralField u = project_box(random_field(lat8(), s, 5, 0), 1.5, 1.5);
  u *= 0.05 / u.norm2();
  return integrate(u, sim(0.4, dt));
}

Outcome gauge_residual_slope() {
  const double dt = 0.00125;
  const Trajectory tr = low_mode_trajectory(dt);
  std::vector<double> hs, rs;
  for (int k : {4, 8, 16, 32}) {
    Trajectory sub;
    for (std::size_t i = 0; i < tr.size(); i += k) sub.push(tr.times[i], tr.states[i]);
    hs.push_back(k * dt);
    rs.push_back(gauge_residual(sub).max_residual);
  }
  const double slope = app::loglog_slope(hs, rs);
  return {slope >= 1.7 && slope <= 2.3, "slope " + fmt(slope) + " over cadences 0.005..0.04"};
}

// ---------------------------------------------------------------- 6

Outcome cauchy_decay() {
  // nmax 23: box capacity 16.7 holds the truncation 16
  const Lattice lat(FrequencyVector::golden(), 23, 0);
  const SpectralField u0 = smooth_data(lat, 6, 0, false);
  SimulationConfig cfg = sim(0.5, 1e-3, 10);
  cfg.s1 = 1.0;
  cfg.s2 = 1.0;
  const CauchyReport r = cauchy_study(u0, {4.0, 8.0, 16.0}, 0.5, cfg);
  double d84 = 0.0, d168 = 0.0;
  for (const auto& p : r.pairs) {
    if (p.n == 8.0 && p.m == 4.0) d84 = p.max_l2;
    if (p.n == 16.0 && p.m == 8.0) d168 = p.max_l2;
  }
  return {d168 < d84, "max_t |u16 - u8| " + fmt(d168) + " vs max_t |u8 - u4| " + fmt(d84)};
}

// ---------------------------------------------------------------- 7

Outcome paraproduct_constants() {
  EnsembleSpec e(lat8());
  e.count = 200;
  e.field.alpha = 3.0;
  e.seed = 7;
  double worst = 0.0;
  std::string d;
  for (double s : {0.0, 1.0, 2.0}) {
    const double m1 = paraproduct1_ratio(e, s).max, m2 = paraproduct2_ratio(e, s).max;
    worst = std::max({worst, m1, m2});
    d += " s=" + fmt(s) + ":" + fmt(m1) + "/" + fmt(m2);
  }
  return {worst <= 1.05, "max ratios (first/second)" + d};
}

// ---------------------------------------------------------------- 8

Outcome refinement_stability() {
  auto spec = [](double alpha) {
    EnsembleSpec e(lat8());
    e.count = 200;
    e.field.alpha = alpha;
    e.seed = 8;
    return e;
  };
  std::vector<RatioReport> reps;
  reps.push_back(with_refinement(spec(3.5), [](const EnsembleSpec& e) { return embedding_ratio(e, 2.0, 1.0); }));
  reps.push_back(with_refinement(spec(4.5), [](const EnsembleSpec& e) { return crucial_ratio(e, 4.0, 1.0); }));
  reps.push_back(with_refinement(spec(3.5), [](const EnsembleSpec& e) { return kato_ponce_ratio(e, 2.0, 2.0); }));
  reps.push_back(with_refinement(spec(2.5), [](const EnsembleSpec& e) { return kpv_ratio(e, 0.75, 2.0); }));
  reps.push_back(with_refinement(spec(2.5), [](const EnsembleSpec& e) { return chain_rule_ratio(e, 0.5, 4.0); }));
  EnsembleSpec st = spec(2.0);
  st.field.real = false;
  const std::vector<double> Ts = {0.25, 0.5, 1.0};
  auto s8 = strichartz_ratio(st, 0.3, Ts);
  const auto s16 = strichartz_ratio(st.refined(), 0.3, Ts);
  for (std::size_t j = 0; j < Ts.size(); ++j) {
    s8[j].max_refined = s16[j].max;
    reps.push_back(s8[j]);
  }
  bool ok = true;
  std::string d;
  for (const auto& r : reps) {
    const double f = r.refinement_factor();
    ok = ok && r.max > 0.0 && f <= 1.5;
    d += " " + r.id + (r.id == "strichartz" ? "(T=" + fmt(r.params.at("T")) + ")" : "") + ":" + fmt(f);
  }
  return {ok, "nmax 16/8 factors" + d};
}

// ---------------------------------------------------------------- 9

Outcome strichartz_scaling() {
  EnsembleSpec e(lat8());
  e.count = 200;
  e.field.alpha = 2.0;
  e.field.real = false;
  e.seed = 9;
  const auto reps = strichartz_ratio(e, 0.3, {0.25, 0.5, 1.0});
  double lo = inf, hi = 0.0;
  for (const auto& r : reps) lo = std::min(lo, r.max), hi = std::max(hi, r.max);
  // per sample as well: the same datum across the three horizons
  double sample_spread = 0.0;
  for (std::size_t k = 0; k < reps[0].ratios.size(); ++k) {
    double a = inf, b = 0.0;
    for (const auto& r : reps) a = std::min(a, r.ratios[k]), b = std::max(b, r.ratios[k]);
    sample_spread = std::max(sample_spread, b / a);
  }
  const double spread = hi / lo;
  return {spread <= 2.0 && sample_spread <= 2.0,
          "ensemble max over T in [" + fmt(lo) + ", " + fmt(hi) + "], spread " + fmt(spread) +
              ", worst per-sample spread " + fmt(sample_spread)};
}

// ---------------------------------------------------------------- 10

Outcome diophantine_thresholds() {
  const ContinuedFraction phi = continued_fraction(parse_alpha("phi"), 30);
  bool phi_ok = phi.depth() == 30 && !phi.truncated;
  for (const auto& a : phi.quotients) phi_ok = phi_ok && a == 1;
  const ContinuedFraction r2 = continued_fraction(parse_alpha("sqrt2"), 30);
  bool r2_ok = r2.depth() == 30 && r2.quotients[0] == 1;
  for (std::size_t k = 1; k < r2.depth(); ++k) r2_ok = r2_ok && r2.quotients[k] == 2;
  const double slope = small_divisor_scan(FrequencyVector::golden(), 512).slope;
  const EmbeddingThreshold t = embedding_threshold(2.0, 2.0);
  const bool th_ok = t.general.hi == 1.0 && t.general.hi_open && t.with_theorem.lo == 0.875 &&
                     t.with_theorem.lo_open && t.with_theorem.hi == 1.0 && t.with_theorem.hi_open;
  return {phi_ok && r2_ok && slope >= 0.8 && slope <= 1.2 && th_ok,
          std::string("phi ") + (phi_ok ? "30 ones" : "WRONG") + ", sqrt2 " + (r2_ok ? "[1; 2, 2, ...]" : "WRONG") +
              ", slope " + fmt(slope) + ", sigma interval " + app::interval_str(t.with_theorem)};
}

// ---------------------------------------------------------------- 11, 12

std::vector<Trajectory> growth_ensemble(std::uint64_t seed, int n) {
  std::vector<Trajectory> out;
  for (int k = 0; k < n; ++k) out.push_back(integrate(smooth_data(lat8(), seed, k, true), sim(0.5, 1e-3, 10)));
  return out;
}

const std::vector<Trajectory>& checked_ensemble() {
  static const std::vector<Trajectory> e = growth_ensemble(12, 50);
  return e;
}

Outcome growth_bounds() {
  // calibrate on a held-out ensemble, freeze, check a disjoint one
  const std::vector<Trajectory> held_out = growth_ensemble(11, 50);
  const double cx = calibrate_x_growth_constant(held_out, 2.0, 1.0);
  const double cs = calibrate_sobolev_growth_constant(held_out, 2.0);
  double wx = 0.0, ws = 0.0;
  for (const auto& tr : checked_ensemble()) {
    wx = std::max(wx, norm_growth_check(tr, 2.0, 1.0, cx).max_ratio);
    ws = std::max(ws, growth_bound_check(tr, 2.0, cs).max_ratio);
  }
  return {wx <= 1.0 + 1e-6 && ws <= 1.0 + 1e-6, "frozen c_X " + fmt(cx) + ", c_H2 " + fmt(cs) +
                                                    "; 50-run max ratios " + fmt(wx) + ", " + fmt(ws)};
}

Outcome bootstrap() {
  std::vector<const Trajectory*> all;
  for (const auto& tr : checked_ensemble()) all.push_back(&tr);
  const Trajectory low = low_mode_trajectory(0.005);
  all.push_back(&low);
  std::size_t bad = 0;
  for (const Trajectory* tr : all) {
    double pI = -1.0, pII = -1.0;
    bool mono = true;
    for (int j = 0; j <= 4; ++j) {
      const BootstrapValues v = bootstrap_quantities(*tr, tr->times[(tr->size() - 1) * j / 4]);
      mono = mono && v.I >= pI && v.II >= pII;
      pI = v.I, pII = v.II;
    }
    if (!mono) ++bad;
  }
  // small-data sweep at T' = 0.2
  std::vector<BootstrapValues> sweep;
  std::string d;
  for (double rho : {1e-2, 1e-3, 1e-4}) {
    const Trajectory tr = integrate(smooth_data(lat8(), 13, 0, true, rho), sim(0.2, 1e-3, 20));
    sweep.push_back(bootstrap_quantities(tr, 0.2));
    d += " " + fmt(rho) + ":" + fmt(sweep.back().I) + "/" + fmt(sweep.back().II);
  }
  const bool dec = sweep[1].I < sweep[0].I && sweep[2].I < sweep[1].I && sweep[1].II < sweep[0].II &&
                   sweep[2].II < sweep[1].II;
  return {bad == 0 && dec, std::to_string(all.size() - bad) + "/" + std::to_string(all.size()) +
                               " trajectories nondecreasing in T'; rho sweep I/II" + d};
}

// ---------------------------------------------------------------- 13

Outcome determinism() {
  const fs::path work = QPBO_ACCEPTANCE_WORK;
  fs::remove_all(work);
  fs::create_directories(work);
  const std::string cli = QPBO_CLI_PATH;
  {
    std::ofstream low(work / "low_mode.ini");
    low << "[initial]\nkind = modes\nmodes = 1 0 0.02; 0 1 0.015 0.01; 1 -1 0.01\n"
        << "[dynamics]\nt_end = 0.2\ndt = 0.0025\ncadence = 2\n";
  }
  auto sh = [&](const std::string& args, const std::string& out) {
    const std::string cmd = "\"" + cli + "\" " + args + " -o \"" + (work / out).string() + "\" 2>/dev/null";
    const int rc = std::system(cmd.c_str());
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
  };
  const std::string traj = (work / "traj" / "trajectory.qpbotrj").string();
  const std::vector<std::pair<std::string, std::string>> runs = {
      {"simulate", "simulate -c \"" + (work / "low_mode.ini").string() + "\""},
      {"gauge-check", "gauge-check --set gauge.input=\"" + traj + "\""},
      {"estimates", "estimates --set estimates.count=20 --set estimates.ids=paraproduct1,kpv,chain_rule,strichartz"},
      {"cauchy", "cauchy --set lattice.nmax=12 --set dynamics.t_end=0.05 --set cauchy.truncations=2,4,8"},
      {"dioph", "dioph --set dioph.scan_n=128 --set dioph.embed_n=128"},
      {"norms", "norms"}};
  if (sh(runs[0].second, "traj") != 0) return {false, "could not produce the gauge-check input"};
  std::size_t files = 0;
  for (const auto& [name, args] : runs) {
    const int a = sh(args, name + "_a"), b = sh(args, name + "_b");
    if (a != b || a > 1) return {false, name + ": exit " + std::to_string(a) + " / " + std::to_string(b)};
    for (const auto& ent : fs::directory_iterator(work / (name + "_a"))) {
      if (ent.path().extension() != ".csv") continue;
      ++files;
      if (read_file(ent.path().string()) != read_file((work / (name + "_b") / ent.path().filename()).string()))
        return {false, name + ": " + ent.path().filename().string() + " differs"};
    }
  }
  return {files >= 12, std::to_string(runs.size()) + " subcommands, " + std::to_string(files) +
                           " CSV files byte-identical across repeated runs"};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"conservation", conservation},
      {"galilean symmetry", galilean},
      {"integrator order", integrator_order},
      {"gauge identity", gauge_identity},
      {"gauge residual", gauge_residual_slope},
      {"cauchy decay", cauchy_decay},
      {"paraproduct constants", paraproduct_constants},
      {"refinement stability", refinement_stability},
      {"strichartz scaling", strichartz_scaling},
      {"diophantine thresholds", diophantine_thresholds},
      {"growth bounds", growth_bounds},
      {"bootstrap quantities", bootstrap},
      {"determinism", determinism}};
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::cout << (o.pass ? "PASS" : "FAIL") << " " << (i + 1) << " " << criteria[i].first << ": " << o.detail
              << " [" << fmt(secs) << " s]" << std::endl;
    if (!o.pass) ++failed;
  }
  std::cout << (criteria.size() - failed) << "/" << criteria.size() << " criteria passed" << std::endl;
  return failed == 0 ? 0 : 1;
}
