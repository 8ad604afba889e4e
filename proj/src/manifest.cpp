#include "graphsamp/manifest.hpp"

#include <ctime>
#include <fstream>

#include <Eigen/Core>

#include "graphsamp/errors.hpp"
#include "graphsamp/graph.hpp"

namespace graphsamp {

nlohmann::json tool_versions() {
  nlohmann::json v;
  v["graphsamp"] = "0.1.0";
  v["eigen"] = std::to_string(EIGEN_WORLD_VERSION) + "." +
               std::to_string(EIGEN_MAJOR_VERSION) + "." +
               std::to_string(EIGEN_MINOR_VERSION);
  return v;
}

std::string iso8601_utc_now() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void save_manifest(const RunManifest& m, const std::filesystem::path& path) {
  nlohmann::json j;
  j["command"] = m.command;
  j["argv"] = m.argv;
  j["resolved"] = m.resolved;
  j["versions"] = m.versions;
  if (m.master_seed) j["master_seed"] = *m.master_seed;
  j["started"] = m.started;
  j["finished"] = m.finished;
  j["outputs"] = m.outputs;
  write_file_atomic(path, j.dump(2) + "\n");
}

RunManifest load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open manifest: " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("bad manifest JSON: " + std::string(e.what()));
  }
  RunManifest m;
  try {
    m.command = j.at("command").get<std::string>();
    m.argv = j.at("argv").get<std::vector<std::string>>();
    m.resolved = j.value("resolved", nlohmann::json::object());
    m.versions = j.value("versions", nlohmann::json::object());
    if (j.contains("master_seed"))
      m.master_seed = j.at("master_seed").get<std::uint64_t>();
    m.started = j.value("started", "");
    m.finished = j.value("finished", "");
    m.outputs = j.value("outputs", std::vector<std::string>{});
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("bad manifest: " + std::string(e.what()));
  }
  return m;
}

std::filesystem::path manifest_path_for(const std::filesystem::path& output) {
  std::filesystem::path p = output;
  p += ".manifest.json";
  return p;
}

}  // namespace graphsamp
