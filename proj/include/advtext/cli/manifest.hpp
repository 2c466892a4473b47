#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

namespace advtext::cli {

// Provenance record written as manifest.json into every artifact directory.
struct RunManifest {
  std::string command;
  std::vector<std::string> argv;
  nlohmann::ordered_json config = nlohmann::ordered_json::object();
  std::string config_hash;
  std::map<std::string, std::string> dataset_hashes;
  std::vector<std::string> model_ids;
  std::map<std::string, std::string> input_hashes;  // path -> content hash
  std::uint64_t seed = 0;
  std::string version;
  std::vector<std::string> outputs;  // file names relative to the directory
  std::string status = "running";    // running | complete | failed
  std::string error;
  std::string started_at;
  std::string finished_at;

  nlohmann::ordered_json to_json() const;
  static RunManifest from_json(const nlohmann::json& j);
  static RunManifest read(const std::filesystem::path& dir);
};

// "<version> (<git describe>)" of this build.
std::string version_stamp();

// An artifact directory for one run. While the run is open the directory
// holds a `.partial` marker; complete() removes it, fail() keeps it.
class RunDirectory {
 public:
  RunDirectory(std::filesystem::path dir, RunManifest manifest);

  const std::filesystem::path& path() const { return dir_; }
  RunManifest& manifest() { return manifest_; }
  // Registers an output file and returns its full path.
  std::filesystem::path output(const std::string& name);
  void complete();
  void fail(const std::string& message);

 private:
  void write_manifest() const;
  std::filesystem::path dir_;
  RunManifest manifest_;
};

// Content hash of a file.
std::string file_hash(const std::filesystem::path& path);

}  // namespace advtext::cli
