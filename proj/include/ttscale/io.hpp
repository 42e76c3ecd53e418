#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace ttscale {

inline constexpr std::string_view kToolVersion = "0.1.0";

std::string read_file(const std::filesystem::path& path);

/// Writes to a temporary file in the destination directory, syncs it and
/// renames it over `path`, so readers never observe a partial file.
void atomic_write(const std::filesystem::path& path, std::string_view bytes);

std::string sha256_hex(std::string_view bytes);
std::string sha256_file(const std::filesystem::path& path);

/// Reproducibility header attached to every artifact: tool version, the
/// effective configuration and the SHA-256 of each input file.
struct ArtifactHeader {
  nlohmann::json config = nlohmann::json::object();
  std::map<std::string, std::string> input_digests;

  void add_input(const std::filesystem::path& path);
  [[nodiscard]] nlohmann::json to_json() const;
};

/// JSON Lines body preceded by a {"_meta": header} line.
std::string jsonl_with_header(const ArtifactHeader& header,
                              const std::vector<nlohmann::json>& records);

/// A JSON object with the header stored under "_meta".
std::string json_with_header(const ArtifactHeader& header, nlohmann::json body);

/// Sidecar path for formats that cannot carry the header themselves.
std::filesystem::path meta_sidecar(const std::filesystem::path& artifact);

}  // namespace ttscale
