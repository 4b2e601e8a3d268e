#pragma once

// INI run configuration. Every section and key is declared in the schema
// below with its default; anything else is rejected with a ConfigError that
// names "section.key". Values are read through typed getters that report the
// offending key on parse failure.

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "errors.hpp"
#include "spectral_core.hpp"

namespace qpbo {

using ConfigSchema = std::map<std::string, std::map<std::string, std::string>>;

inline const ConfigSchema& config_schema() {
  static const ConfigSchema s = {
      {"run", {{"seed", "1"}, {"tag", "run"}}},
      {"lattice", {{"omega", "golden"}, {"normalize", "true"}, {"nmax", "8"}, {"grid", "0"}}},
      {"dynamics",
       {{"model", "BO"},
        {"integrator", "IFRK4"},
        {"dt", "1e-3"},
        {"t_end", "1"},
        {"cadence", "1"},
        {"truncation", "0"},
        {"delta", "-1"},
        {"nonlinear", "true"},
        {"s1", "2"},
        {"s2", "1"},
        {"sigma", "0.9"},
        {"i2_tol", "1e-10"}}},
      {"initial",
       {{"kind", "random"},
        {"profile", "exponential"},
        {"alpha", "1"},
        {"l2_norm", "1"},
        {"mean_zero", "true"},
        {"real", "true"},
        {"sample", "0"},
        {"stream", "0"},
        {"modes", ""},
        {"file", ""},
        {"galilean_normalize", "false"}}},
      {"gauge",
       {{"input", ""},
        {"pad", "4"},
        {"eta", "0.01"},
        {"strides", "1,2,4,8"},
        {"slope_min", "1.7"},
        {"slope_max", "2.3"},
        {"reconstruction_tol", "1e-8"},
        {"bootstrap_sigma", "0.9"},
        {"bootstrap_r", "0.8"},
        {"bootstrap_p", "64"},
        {"t_prime", ""}}},
      {"estimates",
       {{"ids", "paraproduct1,paraproduct2"},
        {"count", "200"},
        {"profile", "power"},
        {"alpha", "3"},
        {"amplitude", "1"},
        {"real", "true"},
        {"extremal", "false"},
        {"refine", "false"},
        {"embed_s1", "2"},
        {"embed_s2", "1"},
        {"crucial_s1", "4"},
        {"crucial_s2", "1"},
        {"kp_s1", "2"},
        {"kpv_s2", "0.75"},
        {"p", "2"},
        {"paraproduct_s", "0,1,2"},
        {"integer_power", "false"},
        {"chain_s", "0.5"},
        {"chain_p", "4"},
        {"kappa", "0.3"},
        {"T", "0.25,0.5,1"},
        {"constant_tol", "1.05"},
        {"refinement_tol", "1.5"},
        {"strichartz_tol", "2"}}},
      {"cauchy", {{"truncations", "4,8,16"}, {"beta", "0.5"}}},
      {"dioph",
       {{"alpha", "phi"},
        {"depth", "30"},
        {"bound", "10"},
        {"scan_n", "512"},
        {"mu", "2"},
        {"s", "2"},
        {"sigma", "0.9"},
        {"embed_n", "512"}}},
      {"growth", {{"c", "-1"}, {"s", "2"}}},
      {"norms", {{"s1", "2"}, {"s2", "1"}, {"sigma", "0.9"}, {"s", "2"}, {"p", "2,4,inf"}}},
      {"output", {{"trajectory", "true"}, {"plot_stub", "true"}, {"field_json", "false"}}},
  };
  return s;
}

class Config {
 public:
  Config() : values_(config_schema()) {}

  static Config from_string(const std::string& text) {
    std::istringstream in(text);
    boost::property_tree::ptree pt;
    try {
      boost::property_tree::ini_parser::read_ini(in, pt);
    } catch (const boost::property_tree::ini_parser_error& e) {
      throw ConfigError("line " + std::to_string(e.line()), e.message());
    }
    Config c;
    for (const auto& [section, body] : pt) {
      if (body.empty() && !body.data().empty()) throw ConfigError(section, "key outside any section");
      if (!config_schema().count(section)) throw ConfigError(section, "unknown section");
      for (const auto& [key, v] : body) c.set(section + "." + key, v.data());
    }
    return c;
  }

  static Config from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config", "cannot read '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return from_string(ss.str());
  }

  // "section.key" = value; the key must exist in the schema.
  void set(const std::string& dotted, const std::string& value) {
    const auto dot = dotted.find('.');
    if (dot == std::string::npos) throw ConfigError(dotted, "expected section.key");
    const std::string section = dotted.substr(0, dot), key = dotted.substr(dot + 1);
    const auto s = values_.find(section);
    if (s == values_.end()) throw ConfigError(section, "unknown section");
    const auto k = s->second.find(key);
    if (k == s->second.end()) throw ConfigError(dotted, "unknown key");
    k->second = trim(value);
  }

  const std::string& str(const std::string& dotted) const {
    const auto dot = dotted.find('.');
    if (dot != std::string::npos) {
      const auto s = values_.find(dotted.substr(0, dot));
      if (s != values_.end()) {
        const auto k = s->second.find(dotted.substr(dot + 1));
        if (k != s->second.end()) return k->second;
      }
    }
    throw ConfigError(dotted, "not in the schema");
  }

  double num(const std::string& key) const { return parse_double(key, str(key)); }

  long long integer(const std::string& key) const {
    const std::string& v = str(key);
    long long x = 0;
    const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
    if (ec != std::errc() || p != v.data() + v.size()) throw ConfigError(key, "expected an integer, got '" + v + "'");
    return x;
  }

  std::uint64_t seed(const std::string& key) const {
    const std::string& v = str(key);
    std::uint64_t x = 0;
    const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
    if (ec != std::errc() || p != v.data() + v.size()) throw ConfigError(key, "expected an unsigned integer, got '" + v + "'");
    return x;
  }

  bool flag(const std::string& key) const {
    const std::string& v = str(key);
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw ConfigError(key, "expected a boolean, got '" + v + "'");
  }

  std::vector<double> nums(const std::string& key) const {
    std::vector<double> out;
    for (const auto& item : list(key)) out.push_back(parse_double(key, item));
    return out;
  }

  std::vector<std::string> list(const std::string& key) const {
    std::vector<std::string> out;
    std::string item;
    std::istringstream in(str(key));
    while (std::getline(in, item, ',')) {
      item = trim(item);
      if (!item.empty()) out.push_back(item);
    }
    return out;
  }

  // "golden" or "w1,w2"; normalized unless lattice.normalize is false.
  FrequencyVector omega() const {
    FrequencyVector w = FrequencyVector::golden();
    if (str("lattice.omega") != "golden") {
      const auto v = nums("lattice.omega");
      if (v.size() != 2) throw ConfigError("lattice.omega", "expected 'golden' or 'w1,w2'");
      try {
        w = FrequencyVector(v[0], v[1]);
      } catch (const std::exception& e) {
        throw ConfigError("lattice.omega", e.what());
      }
      if (flag("lattice.normalize")) w = w.normalized();
    }
    return w;
  }

  Lattice lattice() const {
    const long long n = integer("lattice.nmax"), g = integer("lattice.grid");
    if (n < 1 || n > 512) throw ConfigError("lattice.nmax", "must lie in 1..512");
    if (g != 0 && g < 2 * n + 1) throw ConfigError("lattice.grid", "must be 0 (default) or >= 2 nmax + 1");
    return Lattice(omega(), static_cast<int>(n), static_cast<int>(g));
  }

  nlohmann::json echo() const {
    nlohmann::json j = nlohmann::json::object();
    for (const auto& [section, body] : values_)
      for (const auto& [key, v] : body) j[section][key] = v;
    return j;
  }

 private:
  static std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r\n");
    std::string t = s.substr(a, b - a + 1);
    if (t.size() >= 2 && t.front() == '"' && t.back() == '"') t = t.substr(1, t.size() - 2);
    return t;
  }

  static double parse_double(const std::string& key, const std::string& v) {
    if (v == "inf") return std::numeric_limits<double>::infinity();
    if (v == "-inf") return -std::numeric_limits<double>::infinity();
    double x = 0.0;
    const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
    if (ec != std::errc() || p != v.data() + v.size() || v.empty())
      throw ConfigError(key, "expected a number, got '" + v + "'");
    return x;
  }

  ConfigSchema values_;
};

}  // namespace qpbo
