#include "advtext/cli/manifest.hpp"

#include <algorithm>
#include <fstream>
#include <iterator>

#include "advtext/core/error.hpp"
#include "advtext/core/hash.hpp"
#include "advtext/humaneval/store.hpp"

#ifndef ADVTEXT_VERSION
#define ADVTEXT_VERSION "0.0.0"
#endif
#ifndef ADVTEXT_GIT_DESCRIBE
#define ADVTEXT_GIT_DESCRIBE "unknown"
#endif

namespace advtext::cli {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

std::string version_stamp() {
  return std::string(ADVTEXT_VERSION) + " (" + ADVTEXT_GIT_DESCRIBE + ")";
}

ojson RunManifest::to_json() const {
  ojson j;
  j["command"] = command;
  j["argv"] = argv;
  j["config"] = config;
  j["config_hash"] = config_hash;
  j["dataset_hashes"] = dataset_hashes;
  j["model_ids"] = model_ids;
  j["input_hashes"] = input_hashes;
  j["seed"] = seed;
  j["version"] = version;
  j["outputs"] = outputs;
  j["status"] = status;
  if (!error.empty()) j["error"] = error;
  j["started_at"] = started_at;
  j["finished_at"] = finished_at;
  return j;
}

RunManifest RunManifest::from_json(const nlohmann::json& j) {
  RunManifest m;
  m.command = j.at("command").get<std::string>();
  m.argv = j.value("argv", std::vector<std::string>{});
  m.config = j.value("config", ojson::object());
  m.config_hash = j.value("config_hash", "");
  m.dataset_hashes = j.value("dataset_hashes", std::map<std::string, std::string>{});
  m.model_ids = j.value("model_ids", std::vector<std::string>{});
  m.input_hashes = j.value("input_hashes", std::map<std::string, std::string>{});
  m.seed = j.value("seed", std::uint64_t{0});
  m.version = j.value("version", "");
  m.outputs = j.value("outputs", std::vector<std::string>{});
  m.status = j.value("status", "");
  m.error = j.value("error", "");
  m.started_at = j.value("started_at", "");
  m.finished_at = j.value("finished_at", "");
  return m;
}

RunManifest RunManifest::read(const fs::path& dir) {
  std::ifstream in(dir / "manifest.json");
  if (!in) throw InvalidArgument("no manifest in " + dir.string());
  return from_json(nlohmann::json::parse(in));
}

std::string file_hash(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidArgument("cannot read " + path.string());
  Fnv1a64 h;
  char buf[1 << 16];
  while (in.read(buf, sizeof buf) || in.gcount() > 0)
    h.update(std::string_view(buf, static_cast<std::size_t>(in.gcount())));
  return h.hex();
}

RunDirectory::RunDirectory(fs::path dir, RunManifest manifest)
    : dir_(std::move(dir)), manifest_(std::move(manifest)) {
  fs::create_directories(dir_);
  manifest_.version = version_stamp();
  manifest_.started_at = humaneval::utc_timestamp();
  manifest_.status = "running";
  std::ofstream(dir_ / ".partial") << manifest_.command << '\n';
  write_manifest();
}

fs::path RunDirectory::output(const std::string& name) {
  if (std::find(manifest_.outputs.begin(), manifest_.outputs.end(), name) ==
      manifest_.outputs.end())
    manifest_.outputs.push_back(name);
  return dir_ / name;
}

void RunDirectory::write_manifest() const {
  const fs::path tmp = dir_ / "manifest.json.tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    if (!out) throw Error("cannot write manifest in " + dir_.string());
    out << manifest_.to_json().dump(2) << '\n';
  }
  fs::rename(tmp, dir_ / "manifest.json");
}

void RunDirectory::complete() {
  manifest_.status = "complete";
  manifest_.finished_at = humaneval::utc_timestamp();
  write_manifest();
  fs::remove(dir_ / ".partial");
}

void RunDirectory::fail(const std::string& message) {
  manifest_.status = "failed";
  manifest_.error = message;
  manifest_.finished_at = humaneval::utc_timestamp();
  write_manifest();
}

}  // namespace advtext::cli
