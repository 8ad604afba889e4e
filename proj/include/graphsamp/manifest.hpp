#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace graphsamp {

// Run record written next to every primary output: the exact argv replays
// the run, the resolved config documents every effective value.
struct RunManifest {
  std::string command;
  std::vector<std::string> argv;
  nlohmann::json resolved;
  nlohmann::json versions;
  std::optional<std::uint64_t> master_seed;
  std::string started;
  std::string finished;
  std::vector<std::string> outputs;
};

nlohmann::json tool_versions();
std::string iso8601_utc_now();

void save_manifest(const RunManifest& m, const std::filesystem::path& path);
RunManifest load_manifest(const std::filesystem::path& path);

// Manifest path convention: "<output>.manifest.json".
std::filesystem::path manifest_path_for(const std::filesystem::path& output);

}  // namespace graphsamp
