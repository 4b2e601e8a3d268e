#pragma once

// Run manifests and atomic artifact emission. Every artifact is written to a
// temporary sibling and renamed into place; its SHA-256 is recorded, and the
// manifest itself goes out last so a present manifest means a complete run.
// QPBO_OUTPUT_DIR, if set, overrides the output directory.

#include <openssl/evp.h>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "errors.hpp"

namespace qpbo {

inline constexpr std::string_view tool_version = "0.1.0";

inline std::string sha256_hex(std::string_view data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1) throw IoError("sha256 failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hex[md[i] >> 4]);
    out.push_back(hex[md[i] & 15]);
  }
  return out;
}

inline void write_file_atomic(const std::filesystem::path& path, std::string_view content) {
  namespace fs = std::filesystem;
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write '" + tmp.string() + "'");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) throw IoError("short write to '" + tmp.string() + "'");
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw IoError("cannot rename into '" + path.string() + "': " + ec.message());
}

inline std::string utc_timestamp() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

inline std::filesystem::path resolve_output_dir(const std::string& requested) {
  if (const char* env = std::getenv("QPBO_OUTPUT_DIR"); env && *env) return env;
  return requested.empty() ? std::filesystem::path("out") : std::filesystem::path(requested);
}

class OutputSink {
 public:
  OutputSink(std::filesystem::path dir, std::string subcommand)
      : dir_(std::move(dir)), start_(utc_timestamp()), t0_(std::chrono::steady_clock::now()) {
    manifest_["tool"] = "qpbo";
    manifest_["version"] = std::string(tool_version);
    manifest_["subcommand"] = std::move(subcommand);
    manifest_["outputs"] = nlohmann::json::array();
  }

  const std::filesystem::path& dir() const { return dir_; }
  nlohmann::json& manifest() { return manifest_; }

  std::filesystem::path emit(const std::string& name, std::string_view content) {
    const auto path = dir_ / name;
    write_file_atomic(path, content);
    manifest_["outputs"].push_back({{"file", name}, {"bytes", content.size()}, {"sha256", sha256_hex(content)}});
    return path;
  }

  // Writes manifest.json; call once, after every artifact.
  std::filesystem::path finish(int exit_status) {
    manifest_["start"] = start_;
    manifest_["end"] = utc_timestamp();
    manifest_["wall_seconds"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_).count();
    manifest_["exit_status"] = exit_status;
    const auto path = dir_ / "manifest.json";
    write_file_atomic(path, manifest_.dump(2) + "\n");
    return path;
  }

 private:
  std::filesystem::path dir_;
  nlohmann::json manifest_;
  std::string start_;
  std::chrono::steady_clock::time_point t0_;
};

}  // namespace qpbo
