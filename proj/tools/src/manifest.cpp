#include "manifest.hpp"

#include <cstdio>
#include <ctime>
#include <fstream>
#include <vector>

#include "embcomm/error.hpp"

namespace embcomm::cli {

nlohmann::ordered_json manifest_to_json(const Manifest& manifest) {
  nlohmann::ordered_json doc;
  doc["command"] = manifest.command;
  doc["tool_version"] = manifest.tool_version;
  doc["parameters"] = manifest.parameters;
  if (manifest.seed) {
    doc["seed"] = *manifest.seed;
  } else {
    doc["seed"] = nullptr;
  }
  doc["input_digests"] = manifest.input_digests;
  doc["timestamp"] = manifest.timestamp;
  return doc;
}

Manifest manifest_from_json(const nlohmann::ordered_json& doc) {
  if (!doc.is_object() || !doc.contains("command") || !doc.contains("parameters")) {
    throw ValidationError("not a manifest: expected \"command\" and \"parameters\"");
  }
  Manifest manifest;
  manifest.command = doc["command"].get<std::string>();
  manifest.tool_version =
      doc.contains("tool_version") ? doc["tool_version"].get<std::string>() : "";
  manifest.parameters = doc["parameters"];
  if (doc.contains("seed") && !doc["seed"].is_null()) {
    manifest.seed = doc["seed"].get<std::uint64_t>();
  }
  if (doc.contains("input_digests")) manifest.input_digests = doc["input_digests"];
  if (doc.contains("timestamp")) manifest.timestamp = doc["timestamp"].get<std::string>();
  return manifest;
}

std::string now_utc_iso8601() {
  const std::time_t now = std::time(nullptr);
  std::tm utc{};
  gmtime_r(&now, &utc);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &utc);
  return buf;
}

std::string file_digest(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open input file " + path.string());
  std::uint64_t hash = 0xCBF29CE484222325ull;
  char buf[65536];
  while (in.read(buf, sizeof buf) || in.gcount() > 0) {
    const std::streamsize n = in.gcount();
    for (std::streamsize i = 0; i < n; ++i) {
      hash ^= static_cast<unsigned char>(buf[i]);
      hash *= 0x100000001B3ull;
    }
  }
  char hex[32];
  std::snprintf(hex, sizeof hex, "fnv1a64:%016llx",
                static_cast<unsigned long long>(hash));
  return hex;
}

}  // namespace embcomm::cli
