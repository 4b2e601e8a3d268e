#pragma once

// Subcommand drivers behind the command-line front end. Each driver reads a
// Config, writes its artifacts through an OutputSink and returns an exit
// status; run() maps exceptions onto the documented codes and always writes
// the manifest last.
//
// Exit codes: 0 pass, 1 tolerance failure, 2 usage/config/input error,
// 3 numerical divergence.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "config.hpp"
#include "diophantine.hpp"
#include "dynamics.hpp"
#include "estimates.hpp"
#include "gauge.hpp"
#include "io.hpp"
#include "manifest.hpp"
#include "random_fields.hpp"

namespace qpbo::app {

enum Status { pass = 0, tolerance_failure = 1, usage_error = 2, diverged = 3 };

inline const std::vector<std::string>& subcommands() {
  static const std::vector<std::string> s = {"simulate", "gauge-check", "estimates", "cauchy", "dioph", "norms"};
  return s;
}

// Anything thrown while interpreting `key` is reported against that key.
template <class F>
auto keyed(const std::string& key, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const ConfigError& e) {
    if (e.key().find('.') != std::string::npos) throw;
    // module-level validation knows only the bare field name
    const std::string what = e.what();
    const std::string msg = what.substr(std::min(what.size(), e.key().size() + 2));
    const auto dot = key.find('.');
    throw ConfigError(key.substr(0, dot) + "." + e.key(), msg);
  } catch (const std::exception& e) {
    throw ConfigError(key, e.what());
  }
}

inline DecayProfile profile_from_string(const std::string& key, const std::string& v) {
  if (v == "power") return DecayProfile::Power;
  if (v == "exponential") return DecayProfile::Exponential;
  throw ConfigError(key, "expected 'power' or 'exponential', got '" + v + "'");
}

inline SimulationConfig simulation_config(const Config& cfg, const Lattice& lat) {
  SimulationConfig s;
  s.model = keyed("dynamics.model", [&] { return model_from_string(cfg.str("dynamics.model")); });
  s.integrator = keyed("dynamics.integrator", [&] { return integrator_from_string(cfg.str("dynamics.integrator")); });
  s.dt = cfg.num("dynamics.dt");
  s.t_end = cfg.num("dynamics.t_end");
  s.cadence = static_cast<int>(cfg.integer("dynamics.cadence"));
  s.truncation = cfg.num("dynamics.truncation");
  s.delta = cfg.num("dynamics.delta");
  s.nonlinear = cfg.flag("dynamics.nonlinear");
  s.s1 = cfg.num("dynamics.s1");
  s.s2 = cfg.num("dynamics.s2");
  s.sigma = cfg.num("dynamics.sigma");
  s.seed = cfg.seed("run.seed");
  keyed("dynamics.dt", [&] { s.validate(lat); });
  return s;
}

// "n1 n2 re im; n1 n2 re im; ..."; with initial.real the mirror mode gets
// the conjugate.
inline SpectralField modes_field(const Config& cfg, const Lattice& lat) {
  const std::string key = "initial.modes";
  SpectralField f(lat);
  const bool real = cfg.flag("initial.real");
  std::istringstream all(cfg.str(key));
  std::string item;
  while (std::getline(all, item, ';')) {
    if (item.find_first_not_of(" \t") == std::string::npos) continue;
    std::istringstream in(item);
    int n1 = 0, n2 = 0;
    double re = 0.0, im = 0.0;
    if (!(in >> n1 >> n2 >> re)) throw ConfigError(key, "expected 'n1 n2 re [im]' entries separated by ';'");
    in >> im;
    if (!lat.contains(n1, n2)) throw ConfigError(key, "mode outside the lattice block");
    f[lat.index(n1, n2)] = cplx(re, im);
    if (real) {
      if (n1 == 0 && n2 == 0 && im != 0.0) throw ConfigError(key, "the zero mode of a real field must be real");
      f[lat.index(-n1, -n2)] = cplx(re, -im);
    }
  }
  return f;
}

struct InitialData {
  SpectralField u0;
  double galilean_shift = 0.0;
};

inline InitialData initial_data(const Config& cfg, const Lattice& lat) {
  const std::string kind = cfg.str("initial.kind");
  InitialData d{SpectralField(lat)};
  if (kind == "random") {
    RandomFieldSpec spec;
    spec.profile = profile_from_string("initial.profile", cfg.str("initial.profile"));
    spec.alpha = cfg.num("initial.alpha");
    spec.l2_norm = cfg.num("initial.l2_norm");
    spec.mean_zero = cfg.flag("initial.mean_zero");
    spec.real = cfg.flag("initial.real");
    d.u0 = random_field(lat, spec, cfg.seed("run.seed"), cfg.seed("initial.sample"), cfg.seed("initial.stream"));
  } else if (kind == "modes") {
    d.u0 = modes_field(cfg, lat);
  } else if (kind == "file") {
    const std::string path = cfg.str("initial.file");
    if (path.empty()) throw ConfigError("initial.file", "required when initial.kind = file");
    const std::string bytes = read_file(path);
    if (path.ends_with(".json")) {
      try {
        d.u0 = field_from_json(json::parse(bytes));
      } catch (const json::exception& e) {
        throw IoError("'" + path + "': " + e.what());
      }
    } else {
      d.u0 = decode_field(bytes);
    }
  } else {
    throw ConfigError("initial.kind", "expected 'random', 'modes' or 'file', got '" + kind + "'");
  }
  if (cfg.flag("initial.galilean_normalize")) {
    auto [v0, a] = galilean_normalize(d.u0);
    d.u0 = std::move(v0);
    d.galilean_shift = a;
  }
  return d;
}

inline EnsembleSpec ensemble_spec(const Config& cfg, const Lattice& lat) {
  EnsembleSpec e(lat);
  e.count = static_cast<int>(cfg.integer("estimates.count"));
  if (e.count < 1) throw ConfigError("estimates.count", "must be >= 1");
  e.field.profile = profile_from_string("estimates.profile", cfg.str("estimates.profile"));
  e.field.alpha = cfg.num("estimates.alpha");
  e.field.real = cfg.flag("estimates.real");
  e.amplitude = cfg.num("estimates.amplitude");
  e.seed = cfg.seed("run.seed");
  e.extremal = cfg.flag("estimates.extremal");
  return e;
}

// Shortest round-trip form, for labels (data columns keep %.17g).
inline std::string short_double(double x) {
  char buf[32];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, end);
}

inline std::string params_label(const std::map<std::string, double>& p) {
  std::string s;
  for (const auto& [k, v] : p) {
    if (!s.empty()) s += ";";
    s += k + "=" + short_double(v);
  }
  return s;
}

inline std::string gnuplot_stub(const std::string& data, const std::string& xlabel, const std::string& ylabel,
                                const std::vector<std::pair<int, int>>& columns, bool logscale = false) {
  std::string s = "# gnuplot -p " + data.substr(0, data.rfind('.')) + ".gp\n";
  s += "set datafile separator ','\nset key autotitle columnhead\n";
  s += "set xlabel '" + xlabel + "'\nset ylabel '" + ylabel + "'\n";
  if (logscale) s += "set logscale xy\n";
  for (std::size_t i = 0; i < columns.size(); ++i) {
    s += i == 0 ? "plot '" + data + "'" : ", ''";
    s += " using " + std::to_string(columns[i].first) + ":" + std::to_string(columns[i].second) + " with lines";
  }
  return s + "\n";
}

inline void record_lattice(OutputSink& sink, const Lattice& lat) {
  sink.manifest()["lattice"] = lattice_json(lat);
  sink.manifest()["omega"] = {lat.omega().w1(), lat.omega().w2()};
}

// ---------------------------------------------------------------- simulate

inline int run_simulate(const Config& cfg, OutputSink& sink) {
  const Lattice cfg_lat = cfg.lattice();
  InitialData init = initial_data(cfg, cfg_lat);
  const Lattice& lat = init.u0.lattice();
  record_lattice(sink, lat);
  const SimulationConfig sc = simulation_config(cfg, lat);
  const Trajectory tr = integrate(init.u0, sc);
  const bool real = is_real_model(sc.model);
  const double n = sc.truncation_for(lat);
  const double i2_tol = cfg.num("dynamics.i2_tol");
  const double nan = std::numeric_limits<double>::quiet_NaN();

  CsvTable obs({"t", "I1", "I2", "I3", "I4", "H_trunc", "l2", "linf", "x_norm", "y_norm"});
  double i2_0 = 0.0, i1_0 = 0.0, h_0 = 0.0, i2_drift = 0.0, i1_drift = 0.0, h_drift = 0.0;
  for (std::size_t i = 0; i < tr.size(); ++i) {
    const SpectralField& u = tr.states[i];
    Observables o{nan, u.norm2_sq(), nan, nan, nan};
    if (real) o = observables(u, n);
    if (i == 0) i2_0 = o.I2, i1_0 = o.I1, h_0 = o.H_trunc;
    i2_drift = std::max(i2_drift, i2_0 > 0.0 ? std::abs(o.I2 - i2_0) / i2_0 : std::abs(o.I2));
    if (real) {
      i1_drift = std::max(i1_drift, std::abs(o.I1 - i1_0));
      h_drift = std::max(h_drift, h_0 != 0.0 ? std::abs(o.H_trunc - h_0) / std::abs(h_0) : std::abs(o.H_trunc));
    }
    obs.row({tr.times[i], o.I1, o.I2, o.I3, o.I4, o.H_trunc, u.norm2(), lp_norm(u, inf), x_norm(u, sc.s1, sc.s2),
             y_norm(u, sc.sigma)});
  }
  sink.emit("observables.csv", obs.str());

  json summary = {{"model", to_string(sc.model)},
                  {"integrator", to_string(sc.integrator)},
                  {"steps_recorded", tr.size()},
                  {"truncation", n},
                  {"galilean_shift", init.galilean_shift},
                  {"i2_relative_drift", i2_drift},
                  {"i2_tol", i2_tol},
                  {"i2_pass", i2_drift <= i2_tol}};
  if (real) {
    summary["i1_absolute_drift"] = i1_drift;
    summary["h_trunc_relative_drift"] = h_drift;
  }
  int status = i2_drift <= i2_tol ? pass : tolerance_failure;

  if (const double c = cfg.num("growth.c"); c >= 0.0) {
    const GrowthReport g = growth_bound_check(tr, cfg.num("growth.s"), c);
    CsvTable gt({"t", "ratio", "exponent_integral"});
    for (std::size_t i = 0; i < g.times.size(); ++i) gt.row({g.times[i], g.ratio[i], g.exponent_integral[i]});
    sink.emit("growth.csv", gt.str());
    summary["growth"] = {{"c", c}, {"s", cfg.num("growth.s")}, {"max_ratio", g.max_ratio}, {"exceeded", g.exceeded}};
    if (g.exceeded) status = tolerance_failure;
  }

  if (cfg.flag("output.trajectory")) {
    sink.emit("trajectory.qpbotrj", encode_trajectory(tr));
    sink.emit("trajectory.json", container_sidecar(trajectory_magic, lat, tr.size(), tr.meta).dump(2) + "\n");
  }
  if (cfg.flag("output.field_json")) sink.emit("initial.json", field_to_json(tr.states[0]).dump(2) + "\n");
  if (cfg.flag("output.plot_stub"))
    sink.emit("observables.gp", gnuplot_stub("observables.csv", "t", "value", {{1, 3}, {1, 6}}));
  sink.emit("summary.json", summary.dump(2) + "\n");
  return status;
}

// ------------------------------------------------------------- gauge-check

inline double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) mx += std::log(x[i]), my += std::log(y[i]);
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxy += (std::log(x[i]) - mx) * (std::log(y[i]) - my);
    sxx += (std::log(x[i]) - mx) * (std::log(x[i]) - mx);
  }
  return sxx > 0.0 ? sxy / sxx : std::numeric_limits<double>::quiet_NaN();
}

inline int run_gauge_check(const Config& cfg, OutputSink& sink) {
  const std::string path = cfg.str("gauge.input");
  if (path.empty()) throw ConfigError("gauge.input", "a trajectory container is required");
  const Trajectory tr = decode_trajectory(read_file(path));
  const Lattice& lat = tr.lattice();
  record_lattice(sink, lat);
  sink.manifest()["input"] = {{"file", path}, {"slices", tr.size()}};
  const int pad = static_cast<int>(cfg.integer("gauge.pad"));
  if (pad < 1) throw ConfigError("gauge.pad", "must be >= 1");
  const double eta = cfg.num("gauge.eta");
  const double tol = cfg.num("gauge.reconstruction_tol");
  json summary = json::object();
  int status = pass;

  // residual against the sampling cadence
  CsvTable rt({"stride", "h", "slices", "max_residual", "max_interior"});
  std::vector<double> hs, rs;
  for (double sd : cfg.nums("gauge.strides")) {
    const auto k = static_cast<std::size_t>(sd);
    if (sd < 1 || static_cast<double>(k) != sd) throw ConfigError("gauge.strides", "strides must be positive integers");
    Trajectory sub;
    for (std::size_t i = 0; i < tr.size(); i += k) sub.push(tr.times[i], tr.states[i]);
    if (sub.size() < 3) continue;
    const GaugeResidualReport r = gauge_residual(sub, eta, pad);
    const double h = sub.times[1] - sub.times[0];
    rt.row({static_cast<long long>(k), h, static_cast<long long>(sub.size()), r.max_residual, r.max_interior});
    if (r.max_residual > 0.0) hs.push_back(h), rs.push_back(r.max_residual);
    if (k == 1) {
      CsvTable st({"t", "residual", "residual_j1", "residual_j2"});
      for (std::size_t i = 0; i < r.times.size(); ++i)
        st.row({r.times[i], r.residual[i], r.residual_j1[i], r.residual_j2[i]});
      sink.emit("residual_series.csv", st.str());
    }
  }
  sink.emit("residual.csv", rt.str());
  const double slope = hs.size() >= 2 ? loglog_slope(hs, rs) : std::numeric_limits<double>::quiet_NaN();
  const double smin = cfg.num("gauge.slope_min"), smax = cfg.num("gauge.slope_max");
  const bool slope_ok = hs.size() >= 2 && slope >= smin && slope <= smax;
  summary["residual_slope"] = {{"slope", slope}, {"min", smin}, {"max", smax}, {"points", hs.size()}, {"pass", slope_ok}};
  if (!slope_ok) status = tolerance_failure;

  // reconstruction identities on every slice
  const double c0 = tr.states[0].norm2_sq();
  CsvTable mt({"t", "fx_mismatch", "fxx_mismatch"});
  double worst = 0.0;
  for (std::size_t i = 0; i < tr.size(); ++i) {
    const GaugeState g = make_gauge_state(tr.states[i], tr.times[i], c0, pad);
    const double a = reconstruct_Fx(g, pad).mismatch, b = reconstruct_Fxx(g, pad).mismatch;
    worst = std::max({worst, a, b});
    mt.row({tr.times[i], a, b});
  }
  sink.emit("reconstruction.csv", mt.str());
  summary["reconstruction"] = {{"max_mismatch", worst}, {"tol", tol}, {"pass", worst <= tol}};
  if (!(worst <= tol)) status = tolerance_failure;

  // bootstrap quantities; default T' = five evenly spaced slice times
  BootstrapParams bp;
  bp.sigma = cfg.num("gauge.bootstrap_sigma");
  bp.eta = eta;
  bp.r = cfg.num("gauge.bootstrap_r");
  bp.p = cfg.num("gauge.bootstrap_p");
  bp.pad = pad;
  std::vector<double> tps = cfg.nums("gauge.t_prime");
  if (tps.empty())
    for (int j = 1; j <= 5; ++j) tps.push_back(tr.times[(tr.size() - 1) * j / 5]);
  std::sort(tps.begin(), tps.end());
  CsvTable bt({"t_prime", "I", "II"});
  bool monotone = true;
  double pI = -1.0, pII = -1.0;
  for (double tp : tps) {
    const BootstrapValues v = keyed("gauge.t_prime", [&] { return bootstrap_quantities(tr, tp, bp); });
    monotone = monotone && v.I >= pI && v.II >= pII;
    pI = v.I, pII = v.II;
    bt.row({tp, v.I, v.II});
  }
  sink.emit("bootstrap.csv", bt.str());
  summary["bootstrap"] = {{"nondecreasing", monotone}, {"in_theorem_range", bp.in_theorem_range()}};
  if (!monotone) status = tolerance_failure;

  if (cfg.flag("output.plot_stub"))
    sink.emit("residual.gp", gnuplot_stub("residual.csv", "h", "max residual", {{2, 4}}, true));
  sink.emit("summary.json", summary.dump(2) + "\n");
  return status;
}

// --------------------------------------------------------------- estimates

inline int run_estimates(const Config& cfg, OutputSink& sink) {
  const Lattice lat = cfg.lattice();
  record_lattice(sink, lat);
  const EnsembleSpec spec = ensemble_spec(cfg, lat);
  const bool refine = cfg.flag("estimates.refine");
  const bool ip = cfg.flag("estimates.integer_power");
  const double p = cfg.num("estimates.p");
  const double ctol = cfg.num("estimates.constant_tol"), rtol = cfg.num("estimates.refinement_tol");
  const double stol = cfg.num("estimates.strichartz_tol");

  std::vector<RatioReport> reps;
  json checks = json::array();
  int status = pass;
  auto maybe_refine = [&](const std::function<RatioReport(const EnsembleSpec&)>& check) {
    return refine ? with_refinement(spec, check) : check(spec);
  };
  for (const std::string& id : cfg.list("estimates.ids")) {
    const std::size_t first = reps.size();
    if (id == "embedding") {
      const double s1 = cfg.num("estimates.embed_s1"), s2 = cfg.num("estimates.embed_s2");
      reps.push_back(maybe_refine([&](const EnsembleSpec& e) { return embedding_ratio(e, s1, s2); }));
    } else if (id == "crucial") {
      const double s1 = cfg.num("estimates.crucial_s1"), s2 = cfg.num("estimates.crucial_s2");
      reps.push_back(maybe_refine([&](const EnsembleSpec& e) { return crucial_ratio(e, s1, s2); }));
    } else if (id == "kato_ponce") {
      const double s1 = cfg.num("estimates.kp_s1");
      reps.push_back(keyed("estimates.kp_s1", [&] {
        return maybe_refine([&](const EnsembleSpec& e) { return kato_ponce_ratio(e, s1, p); });
      }));
    } else if (id == "kpv") {
      const double s2 = cfg.num("estimates.kpv_s2");
      reps.push_back(keyed("estimates.kpv_s2", [&] {
        return maybe_refine([&](const EnsembleSpec& e) { return kpv_ratio(e, s2, p); });
      }));
    } else if (id == "paraproduct1" || id == "paraproduct2") {
      for (double s : cfg.nums("estimates.paraproduct_s"))
        reps.push_back(id == "paraproduct1" ? paraproduct1_ratio(spec, s, ip) : paraproduct2_ratio(spec, s, ip));
    } else if (id == "chain_rule") {
      const double s = cfg.num("estimates.chain_s"), cp = cfg.num("estimates.chain_p");
      reps.push_back(keyed("estimates.chain_s", [&] {
        return maybe_refine([&](const EnsembleSpec& e) { return chain_rule_ratio(e, s, cp); });
      }));
    } else if (id == "strichartz") {
      const double kappa = cfg.num("estimates.kappa");
      const std::vector<double> Ts = cfg.nums("estimates.T");
      auto rs = keyed("estimates.T", [&] { return strichartz_ratio(spec, kappa, Ts); });
      if (refine) {
        const auto rr = strichartz_ratio(spec.refined(), kappa, Ts);
        for (std::size_t j = 0; j < rs.size(); ++j) rs[j].max_refined = rr[j].max;
      }
      double lo = inf, hi = 0.0;
      for (const auto& r : rs) lo = std::min(lo, r.max), hi = std::max(hi, r.max);
      const double spread = lo > 0.0 ? hi / lo : inf;
      checks.push_back({{"check", "strichartz_T_spread"}, {"value", spread}, {"tol", stol}, {"pass", spread <= stol}});
      if (!(spread <= stol)) status = tolerance_failure;
      reps.insert(reps.end(), rs.begin(), rs.end());
    } else {
      throw ConfigError("estimates.ids", "unknown estimate '" + id + "'");
    }
    for (std::size_t k = first; k < reps.size(); ++k) {
      const RatioReport& r = reps[k];
      if (id.starts_with("paraproduct")) {
        const bool ok = r.max <= ctol;
        checks.push_back({{"check", id + "_constant"}, {"params", params_label(r.params)}, {"value", r.max},
                          {"tol", ctol}, {"pass", ok}});
        if (!ok) status = tolerance_failure;
      } else if (r.max_refined) {
        const double f = r.refinement_factor();
        const bool ok = f <= rtol;
        checks.push_back({{"check", id + "_refinement"}, {"params", params_label(r.params)}, {"value", f},
                          {"tol", rtol}, {"pass", ok}});
        if (!ok) status = tolerance_failure;
      }
    }
  }

  CsvTable samples({"id", "params", "nmax", "sample", "ratio"});
  CsvTable summary({"id", "params", "nmax", "kept", "skipped", "max", "mean", "q50", "q90", "q99", "max_refined",
                    "refinement_factor"});
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (const RatioReport& r : reps) {
    const std::string label = params_label(r.params);
    for (std::size_t i = 0; i < r.ratios.size(); ++i)
      samples.row({r.id, label, static_cast<long long>(r.nmax), static_cast<long long>(r.sample_index[i]), r.ratios[i]});
    summary.row({r.id, label, static_cast<long long>(r.nmax), static_cast<long long>(r.ratios.size()),
                 static_cast<long long>(r.skipped), r.max, r.mean, r.q50, r.q90, r.q99, r.max_refined.value_or(nan),
                 r.max_refined ? r.refinement_factor() : nan});
  }
  sink.emit("samples.csv", samples.str());
  sink.emit("estimates.csv", summary.str());
  sink.emit("summary.json", json{{"checks", checks}}.dump(2) + "\n");
  return status;
}

// ------------------------------------------------------------------ cauchy

inline int run_cauchy(const Config& cfg, OutputSink& sink) {
  const Lattice cfg_lat = cfg.lattice();
  const InitialData init = initial_data(cfg, cfg_lat);
  const Lattice& lat = init.u0.lattice();
  record_lattice(sink, lat);
  const SimulationConfig sc = simulation_config(cfg, lat);
  const std::vector<double> ns = cfg.nums("cauchy.truncations");
  if (ns.size() < 2) throw ConfigError("cauchy.truncations", "need at least two truncations");
  for (double n : ns)
    if (!(n > 0.0) || n > lat.box_capacity() * (1.0 + 1e-12))
      throw ConfigError("cauchy.truncations", "each truncation must lie in (0, " + std::to_string(lat.box_capacity()) +
                                                  "]; raise lattice.nmax");
  const CauchyReport rep = cauchy_study(init.u0, ns, cfg.num("cauchy.beta"), sc);

  CsvTable series({"n", "m", "t", "l2", "hs"});
  CsvTable pairs({"n", "m", "max_l2", "max_hs"});
  for (const CauchyPair& p : rep.pairs) {
    for (std::size_t i = 0; i < p.times.size(); ++i) series.row({p.n, p.m, p.times[i], p.l2[i], p.hs[i]});
    pairs.row({p.n, p.m, p.max_l2, p.max_hs});
  }
  sink.emit("cauchy_series.csv", series.str());
  sink.emit("cauchy.csv", pairs.str());
  sink.emit("summary.json", json{{"consecutive_decreasing", rep.consecutive_decreasing}}.dump(2) + "\n");
  return rep.consecutive_decreasing ? pass : tolerance_failure;
}

// ------------------------------------------------------------------ dioph

inline std::string interval_str(const Interval& i) {
  if (i.empty()) return "empty";
  return std::string(i.lo_open ? "(" : "[") + format_double(i.lo) + ", " + format_double(i.hi) + (i.hi_open ? ")" : "]");
}

inline int run_dioph(const Config& cfg, OutputSink& sink) {
  const FrequencyVector omega = cfg.omega();
  record_lattice(sink, cfg.lattice());
  const AlphaInput alpha = keyed("dioph.alpha", [&] { return parse_alpha(cfg.str("dioph.alpha")); });
  const int depth = static_cast<int>(cfg.integer("dioph.depth"));
  if (depth < 1) throw ConfigError("dioph.depth", "must be >= 1");
  const ContinuedFraction cf = continued_fraction(alpha, depth);
  const long long bound = cfg.integer("dioph.bound");
  const ApproximabilityReport ba = is_badly_approximable(cf, bigint(bound));

  CsvTable qt({"k", "a", "p", "q"});
  for (std::size_t k = 0; k < cf.depth(); ++k)
    qt.row({static_cast<long long>(k), cf.quotients[k].str(), cf.convergents[k].first.str(),
            cf.convergents[k].second.str()});
  sink.emit("quotients.csv", qt.str());

  const int N = static_cast<int>(cfg.integer("dioph.scan_n"));
  if (N < 1) throw ConfigError("dioph.scan_n", "must be >= 1");
  const SmallDivisorScan scan = small_divisor_scan(omega, N);
  CsvTable st({"R", "m", "n1", "n2"});
  for (const auto& r : scan.rows)
    st.row({static_cast<long long>(r.R), r.m, static_cast<long long>(r.argmax.n1), static_cast<long long>(r.argmax.n2)});
  sink.emit("small_divisors.csv", st.str());

  const EmbeddingThreshold th =
      keyed("dioph.mu", [&] { return embedding_threshold(cfg.num("dioph.mu"), cfg.num("dioph.s")); });
  CsvTable tt({"kind", "lo", "lo_open", "hi", "hi_open", "empty"});
  auto add = [&](const std::string& kind, const Interval& i) {
    tt.row({kind, i.lo, static_cast<long long>(i.lo_open), i.hi, static_cast<long long>(i.hi_open),
            static_cast<long long>(i.empty())});
  };
  add("general", th.general);
  add("general_with_theorem", th.with_theorem);
  if (th.refined) add("refined", *th.refined), add("refined_with_theorem", *th.refined_with_theorem);
  sink.emit("thresholds.csv", tt.str());

  const int en = static_cast<int>(cfg.integer("dioph.embed_n"));
  const EmbeddingScan es = keyed("dioph.embed_n", [&] {
    return embedding_constant_scan(omega, cfg.num("dioph.s"), cfg.num("dioph.sigma"), en);
  });

  json summary = {
      {"alpha", cfg.str("dioph.alpha")},
      {"depth", cf.depth()},
      {"truncated", cf.truncated},
      {"terminated", cf.terminated},
      {"badly_approximable", ba.badly_approximable},
      {"max_quotient", ba.max_quotient.str()},
      {"argmax", ba.argmax},
      {"small_divisor_slope", scan.slope},
      {"commensurable", scan.commensurable()},
      {"threshold_general", interval_str(th.general)},
      {"threshold_with_theorem", interval_str(th.with_theorem)},
      {"embedding_scan", {{"N", en}, {"max_ratio", es.max_ratio}, {"argmax", {es.argmax.n1, es.argmax.n2}},
                          {"growth", es.growth()}}}};
  if (th.refined) summary["threshold_refined"] = interval_str(*th.refined);
  if (cfg.flag("output.plot_stub"))
    sink.emit("small_divisors.gp", gnuplot_stub("small_divisors.csv", "R", "m(R)", {{1, 2}}, true));
  sink.emit("summary.json", summary.dump(2) + "\n");
  return pass;
}

// ------------------------------------------------------------------ norms

inline int run_norms(const Config& cfg, OutputSink& sink) {
  const Lattice cfg_lat = cfg.lattice();
  const InitialData init = initial_data(cfg, cfg_lat);
  const SpectralField& u = init.u0;
  record_lattice(sink, u.lattice());
  const double s1 = cfg.num("norms.s1"), s2 = cfg.num("norms.s2"), s = cfg.num("norms.s");
  const double sigma = cfg.num("norms.sigma");
  CsvTable t({"norm", "value"});
  keyed("norms.p", [&] {
    for (double p : cfg.nums("norms.p")) t.row({"L" + format_double(p), lp_norm(u, p)});
    for (double p : cfg.nums("norms.p"))
      t.row({"H^{" + format_double(s1) + "," + format_double(s2) + "," + format_double(p) + "}",
             anisotropic_norm(u, s1, s2, p)});
  });
  t.row({"H^" + format_double(s), keyed("norms.s", [&] { return sobolev_norm(u, s); })});
  t.row({"X", keyed("norms.s1", [&] { return x_norm(u, s1, s2); })});
  t.row({"Y", keyed("norms.sigma", [&] { return y_norm(u, sigma); })});
  sink.emit("norms.csv", t.str());
  if (cfg.flag("output.field_json")) sink.emit("field.json", field_to_json(u).dump(2) + "\n");
  return pass;
}

// ------------------------------------------------------------------ run

inline int dispatch(const std::string& sub, const Config& cfg, OutputSink& sink) {
  if (sub == "simulate") return run_simulate(cfg, sink);
  if (sub == "gauge-check") return run_gauge_check(cfg, sink);
  if (sub == "estimates") return run_estimates(cfg, sink);
  if (sub == "cauchy") return run_cauchy(cfg, sink);
  if (sub == "dioph") return run_dioph(cfg, sink);
  if (sub == "norms") return run_norms(cfg, sink);
  throw ConfigError("subcommand", "unknown subcommand '" + sub + "'");
}

// Runs one subcommand end to end; diagnostics go to `err`.
inline int run(const std::string& sub, const Config& cfg, const std::filesystem::path& out, std::ostream& err = std::cerr) {
  OutputSink sink(out, sub);
  sink.manifest()["config"] = cfg.echo();
  sink.manifest()["seed"] = cfg.str("run.seed");
  int status = pass;
  try {
    status = dispatch(sub, cfg, sink);
  } catch (const DivergedError& e) {
    err << "qpbo " << sub << ": diverged: " << e.what() << "\n";
    sink.manifest()["error"] = e.what();
    sink.emit("last_good_state.qpbofld", encode_field(e.last_good_state()));
    status = diverged;
  } catch (const std::exception& e) {
    err << "qpbo " << sub << ": error: " << e.what() << "\n";
    sink.manifest()["error"] = e.what();
    status = usage_error;
  }
  try {
    sink.finish(status);
  } catch (const std::exception& e) {
    err << "qpbo " << sub << ": cannot write manifest: " << e.what() << "\n";
    return usage_error;
  }
  return status;
}

}  // namespace qpbo::app
