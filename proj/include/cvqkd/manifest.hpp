#pragma once

#include <cstdint>
#include <ctime>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <openssl/evp.h>

#include "cvqkd/version.hpp"

namespace cvqkd {

// Filesystem-level failure (open, read, write); maps to the CLI's exit
// code 4.
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline std::string sha256_hex(std::string_view bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1)
    throw std::runtime_error("sha256_hex: digest failure");
  static const char* hex = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hex[md[i] >> 4]);
    out.push_back(hex[md[i] & 0xf]);
  }
  return out;
}

inline std::string sha256_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << f.rdbuf();
  return sha256_hex(ss.str());
}

inline std::string iso8601_utc_now() {
  const std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

struct OutputDigest {
  std::string name;    // file name relative to the output directory
  std::string sha256;  // hex digest of the file bytes
};

// Record of one tool invocation. The digests pin the outputs: a re-run with
// the embedded configuration must reproduce every one of them byte for
// byte. Timestamps are informational and excluded from that contract.
struct RunManifest {
  std::string tool_version = kVersion;
  std::string command;
  std::uint64_t seed = 0;
  std::string started_at;
  std::string finished_at;
  std::vector<OutputDigest> outputs;
  std::string config_echo;  // the full configuration, config-file syntax
};

inline void write_manifest(std::ostream& os, const RunManifest& m) {
  os << "# cvqkd run manifest\n";
  os << "tool_version = " << m.tool_version << "\n";
  os << "command = " << m.command << "\n";
  os << "seed = " << m.seed << "\n";
  os << "started_at = " << m.started_at << "\n";
  os << "finished_at = " << m.finished_at << "\n";
  os << "[outputs]\n";
  for (const auto& o : m.outputs) os << o.name << " = sha256:" << o.sha256 << "\n";
  // config comes last because it is the one multi-line block
  os << "[config]\n";
  os << m.config_echo;
}

inline RunManifest read_manifest(std::istream& is) {
  RunManifest m;
  m.tool_version.clear();
  std::string line;
  enum class Part { Head, Outputs, Config } part = Part::Head;
  std::ostringstream config;
  while (std::getline(is, line)) {
    if (part == Part::Config) {
      config << line << "\n";
      continue;
    }
    if (line == "[outputs]") {
      part = Part::Outputs;
      continue;
    }
    if (line == "[config]") {
      part = Part::Config;
      continue;
    }
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find(" = ");
    if (eq == std::string::npos) throw IoError("manifest: malformed line '" + line + "'");
    const std::string key = line.substr(0, eq);
    const std::string val = line.substr(eq + 3);
    if (part == Part::Outputs) {
      if (val.rfind("sha256:", 0) != 0) throw IoError("manifest: bad digest for '" + key + "'");
      m.outputs.push_back({key, val.substr(7)});
    } else if (key == "tool_version") {
      m.tool_version = val;
    } else if (key == "command") {
      m.command = val;
    } else if (key == "seed") {
      m.seed = std::stoull(val);
    } else if (key == "started_at") {
      m.started_at = val;
    } else if (key == "finished_at") {
      m.finished_at = val;
    } else {
      throw IoError("manifest: unknown key '" + key + "'");
    }
  }
  m.config_echo = config.str();
  return m;
}

}  // namespace cvqkd
