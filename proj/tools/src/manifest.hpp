#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include <json.hpp>

namespace embcomm::cli {

inline constexpr const char* kToolVersion = "0.1.0";

// Reproducibility record embedded in every report: the command, its fully
// resolved parameters, the seed when one applies, digests of the input files,
// and the run timestamp. Re-running from a manifest reproduces the output
// byte for byte (the timestamp is reused).
struct Manifest {
  std::string command;
  std::string tool_version = kToolVersion;
  nlohmann::ordered_json parameters = nlohmann::ordered_json::object();
  std::optional<std::uint64_t> seed;
  nlohmann::ordered_json input_digests = nlohmann::ordered_json::object();
  std::string timestamp;
};

nlohmann::ordered_json manifest_to_json(const Manifest& manifest);
Manifest manifest_from_json(const nlohmann::ordered_json& doc);

std::string now_utc_iso8601();

// 64-bit FNV-1a over the file bytes, rendered as "fnv1a64:<16 hex digits>".
std::string file_digest(const std::filesystem::path& path);

}  // namespace embcomm::cli
