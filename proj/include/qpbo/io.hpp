#pragma once

// Field / trajectory containers, JSON forms and the CSV dialect.
//
// Binary field container (all integers and doubles little-endian):
//   0   char[8]  "QPBOFLD1"
//   8   u32      version (1)
//   12  i32      nmax
//   16  i32      grid G
//   20  u32      reserved (0)
//   24  f64      omega_1
//   32  f64      omega_2
//   40  u64      coefficient count = (2 nmax + 1)^2
//   48  count x (f64 re, f64 im), row-major: index (n1+nmax)*side + (n2+nmax)
// Trajectory container "QPBOTRJ1": the same header with a u64 slice count at
// 48, then per slice an f64 time followed by the coefficients. Metadata goes
// to a JSON sidecar next to the container.
//
// CSV: comma separated, header row, LF line endings, doubles as %.17g
// ("inf", "-inf", "nan" for non-finite), strings quoted only when they
// contain a comma, quote or newline.

#include <array>
#include <bit>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <json.hpp>

#include "errors.hpp"
#include "spectral_core.hpp"
#include "trajectory.hpp"

namespace qpbo {

using json = nlohmann::json;

inline constexpr std::string_view field_magic = "QPBOFLD1";
inline constexpr std::string_view trajectory_magic = "QPBOTRJ1";
inline constexpr std::uint32_t container_version = 1;

namespace detail {

inline void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}
inline void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}
inline void put_f64(std::string& out, double x) { put_u64(out, std::bit_cast<std::uint64_t>(x)); }

class Reader {
 public:
  explicit Reader(std::string_view data) : d_(data) {}
  void need(std::size_t n) const {
    if (pos_ + n > d_.size()) throw IoError("container truncated at byte " + std::to_string(pos_));
  }
  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(d_[pos_ + i])) << (8 * i);
    pos_ += 8;
    return v;
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(d_[pos_ + i])) << (8 * i);
    pos_ += 4;
    return v;
  }
  double f64() { return std::bit_cast<double>(u64()); }
  std::string_view bytes(std::size_t n) {
    need(n);
    auto s = d_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  bool done() const { return pos_ == d_.size(); }

 private:
  std::string_view d_;
  std::size_t pos_ = 0;
};

inline void put_header(std::string& out, std::string_view magic, const Lattice& lat) {
  out.append(magic);
  put_u32(out, container_version);
  put_u32(out, static_cast<std::uint32_t>(lat.nmax()));
  put_u32(out, static_cast<std::uint32_t>(lat.grid()));
  put_u32(out, 0);
  put_f64(out, lat.omega().w1());
  put_f64(out, lat.omega().w2());
  put_u64(out, lat.size());
}

inline Lattice get_header(Reader& r, std::string_view magic) {
  if (r.bytes(8) != magic) throw IoError("bad magic: expected " + std::string(magic));
  if (const auto v = r.u32(); v != container_version) throw IoError("unsupported container version " + std::to_string(v));
  const auto nmax = static_cast<std::int32_t>(r.u32());
  const auto grid = static_cast<std::int32_t>(r.u32());
  (void)r.u32();
  const double w1 = r.f64(), w2 = r.f64();
  const std::uint64_t count = r.u64();
  if (nmax < 0 || grid < 2 * nmax + 1) throw IoError("container header: invalid nmax/grid");
  Lattice lat(FrequencyVector(w1, w2), nmax, grid);
  if (count != lat.size()) throw IoError("container header: coefficient count does not match nmax");
  return lat;
}

inline void put_coeffs(std::string& out, const SpectralField& f) {
  for (const cplx& c : f.coeffs()) {
    put_f64(out, c.real());
    put_f64(out, c.imag());
  }
}

inline SpectralField get_coeffs(Reader& r, const Lattice& lat) {
  SpectralField f(lat);
  for (std::size_t i = 0; i < lat.size(); ++i) {
    const double re = r.f64(), im = r.f64();
    f[i] = cplx(re, im);
  }
  return f;
}

}  // namespace detail

inline std::string encode_field(const SpectralField& f) {
  std::string out;
  out.reserve(48 + 16 * f.size());
  detail::put_header(out, field_magic, f.lattice());
  detail::put_coeffs(out, f);
  return out;
}

inline SpectralField decode_field(std::string_view data) {
  detail::Reader r(data);
  const Lattice lat = detail::get_header(r, field_magic);
  SpectralField f = detail::get_coeffs(r, lat);
  if (!r.done()) throw IoError("field container: trailing bytes");
  return f;
}

inline std::string encode_trajectory(const Trajectory& traj) {
  if (traj.empty()) throw PreconditionError("encode_trajectory: empty trajectory");
  const Lattice& lat = traj.lattice();
  std::string out;
  out.reserve(56 + traj.size() * (8 + 16 * lat.size()));
  detail::put_header(out, trajectory_magic, lat);
  detail::put_u64(out, traj.size());
  for (std::size_t i = 0; i < traj.size(); ++i) {
    traj.states[i].check_same(traj.states[0]);
    detail::put_f64(out, traj.times[i]);
    detail::put_coeffs(out, traj.states[i]);
  }
  return out;
}

inline Trajectory decode_trajectory(std::string_view data) {
  detail::Reader r(data);
  const Lattice lat = detail::get_header(r, trajectory_magic);
  const std::uint64_t n = r.u64();
  r.need(n * (8 + 16 * lat.size()));
  Trajectory t;
  for (std::uint64_t i = 0; i < n; ++i) {
    const double time = r.f64();
    t.push(time, detail::get_coeffs(r, lat));
  }
  if (!r.done()) throw IoError("trajectory container: trailing bytes");
  return t;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline json lattice_json(const Lattice& lat) {
  return {{"nmax", lat.nmax()}, {"grid", lat.grid()}, {"omega", {lat.omega().w1(), lat.omega().w2()}}};
}

// Sidecar describing a binary container.
inline json container_sidecar(std::string_view magic, const Lattice& lat, std::size_t slices,
                              const std::map<std::string, std::string>& meta = {}) {
  json j = lattice_json(lat);
  j["format"] = std::string(magic);
  j["version"] = container_version;
  j["byte_order"] = "little";
  j["coefficient_count"] = lat.size();
  j["layout"] = "row-major, index (n1+nmax)*side + (n2+nmax), (re, im) f64 pairs";
  if (magic == trajectory_magic) j["slices"] = slices;
  j["meta"] = meta;
  return j;
}

// Human-readable form: nonzero coefficients as [n1, n2, re, im].
inline json field_to_json(const SpectralField& f) {
  json j = lattice_json(f.lattice());
  j["format"] = "qpbo-field";
  json cs = json::array();
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (f[i] == cplx{}) continue;
    const Mode m = f.lattice().mode(i);
    cs.push_back({m.n1, m.n2, f[i].real(), f[i].imag()});
  }
  j["coefficients"] = std::move(cs);
  return j;
}

inline SpectralField field_from_json(const json& j) {
  try {
    if (j.at("format") != "qpbo-field") throw IoError("field json: format must be 'qpbo-field'");
    const auto& w = j.at("omega");
    const Lattice lat(FrequencyVector(w.at(0).get<double>(), w.at(1).get<double>()), j.at("nmax").get<int>(),
                      j.at("grid").get<int>());
    SpectralField f(lat);
    for (const auto& c : j.at("coefficients")) {
      const int n1 = c.at(0).get<int>(), n2 = c.at(1).get<int>();
      if (!lat.contains(n1, n2)) throw IoError("field json: mode outside the block");
      f[lat.index(n1, n2)] = cplx(c.at(2).get<double>(), c.at(3).get<double>());
    }
    return f;
  } catch (const json::exception& e) {
    throw IoError(std::string("field json: ") + e.what());
  }
}

inline std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

class CsvTable {
 public:
  using Cell = std::variant<double, long long, std::string>;

  explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

  CsvTable& row(std::vector<Cell> cells) {
    if (cells.size() != header_.size())
      throw PreconditionError("csv row has " + std::to_string(cells.size()) + " cells, header has " +
                              std::to_string(header_.size()));
    rows_.push_back(std::move(cells));
    return *this;
  }

  std::size_t rows() const { return rows_.size(); }

  std::string str() const {
    std::string out;
    emit(out, header_);
    for (const auto& r : rows_) {
      for (std::size_t i = 0; i < r.size(); ++i) {
        if (i) out.push_back(',');
        std::visit(
            [&](const auto& v) {
              using T = std::decay_t<decltype(v)>;
              if constexpr (std::is_same_v<T, double>) out += format_double(v);
              else if constexpr (std::is_same_v<T, long long>) out += std::to_string(v);
              else out += quote(v);
            },
            r[i]);
      }
      out.push_back('\n');
    }
    return out;
  }

 private:
  static std::string quote(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) {
      if (c == '"') q.push_back('"');
      q.push_back(c);
    }
    return q + "\"";
  }
  static void emit(std::string& out, const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out.push_back(',');
      out += quote(cells[i]);
    }
    out.push_back('\n');
  }

  std::vector<std::string> header_;
  std::vector<std::vector<Cell>> rows_;
};

// Minimal reader for the dialect above (used by tests and gauge-check inputs).
inline std::vector<std::vector<std::string>> parse_csv(std::string_view text) {
  std::vector<std::vector<std::string>> out;
  std::vector<std::string> row;
  std::string cell;
  bool quoted = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (quoted) {
      if (c == '"' && i + 1 < text.size() && text[i + 1] == '"') cell.push_back('"'), ++i;
      else if (c == '"') quoted = false;
      else cell.push_back(c);
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      row.push_back(std::move(cell));
      cell.clear();
    } else if (c == '\n') {
      row.push_back(std::move(cell));
      cell.clear();
      out.push_back(std::move(row));
      row.clear();
    } else {
      cell.push_back(c);
    }
  }
  if (!cell.empty() || !row.empty()) row.push_back(std::move(cell)), out.push_back(std::move(row));
  return out;
}

}  // namespace qpbo
