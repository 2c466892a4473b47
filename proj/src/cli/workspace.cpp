#include "advtext/cli/workspace.hpp"

#include <fstream>

#include "advtext/cli/manifest.hpp"
#include "advtext/core/dataset.hpp"
#include "advtext/core/error.hpp"

namespace advtext::cli {

namespace fs = std::filesystem;
using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

void check_name(const std::string& what, const std::string& name) {
  if (name.empty()) throw InvalidArgument(what + " name is required");
  for (char c : name) {
    const bool ok = std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' ||
                    c == '.' || c == '+';
    if (!ok || name == "." || name == "..")
      throw InvalidArgument("invalid " + what + " name: " + name);
  }
}

fs::path Workspace::dataset_dir(const std::string& name) const {
  if (name.find('/') != std::string::npos && fs::is_directory(name)) return name;
  check_name("dataset", name);
  return datasets_dir() / name;
}

fs::path Workspace::model_dir(const std::string& name) const {
  if (name.find('/') != std::string::npos && fs::is_directory(name)) return name;
  check_name("model", name);
  return models_dir() / name;
}

namespace {

json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot read " + path.string());
  return json::parse(in);
}

void write_json(const fs::path& path, const ojson& j) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

}  // namespace

DatasetBundle Workspace::load_dataset(const std::string& name) const {
  DatasetBundle b;
  b.dir = dataset_dir(name);
  if (!fs::exists(b.dir / "dataset.json"))
    throw InvalidArgument("unknown dataset: " + name + " (run ingest first)");
  const json info = read_json(b.dir / "dataset.json");
  b.info = info;
  b.name = info.at("name").get<std::string>();
  b.hash = info.at("hash").get<std::string>();
  DatasetSchema schema;
  schema.id_column = "id";
  schema.labels = info.at("labels").get<std::vector<std::string>>();
  schema.dataset_tag = b.name;
  b.full = advtext::load_dataset(b.dir / "full.jsonl", DatasetFormat::kJsonl, schema).dataset;
  b.train = advtext::load_dataset(b.dir / "train.jsonl", DatasetFormat::kJsonl, schema).dataset;
  b.test = advtext::load_dataset(b.dir / "test.jsonl", DatasetFormat::kJsonl, schema).dataset;
  if (fs::exists(b.dir / "lexicon.json"))
    b.lexicon = read_json(b.dir / "lexicon.json").get<std::map<std::string, std::string>>();
  if (fs::exists(b.dir / "thesaurus.json"))
    b.thesaurus = read_json(b.dir / "thesaurus.json")
                      .get<std::map<std::string, std::vector<std::string>>>();
  return b;
}

std::vector<std::string> write_dataset_bundle(const DatasetBundle& b, const fs::path& dir) {
  fs::create_directories(dir);
  std::vector<std::string> files = {"full.jsonl", "train.jsonl", "test.jsonl", "dataset.json"};
  write_dataset_jsonl(b.full, dir / "full.jsonl");
  write_dataset_jsonl(b.train, dir / "train.jsonl");
  write_dataset_jsonl(b.test, dir / "test.jsonl");
  write_json(dir / "dataset.json", b.info);
  if (!b.lexicon.empty()) {
    write_json(dir / "lexicon.json", ojson(b.lexicon));
    files.push_back("lexicon.json");
  }
  if (!b.thesaurus.empty()) {
    write_json(dir / "thesaurus.json", ojson(b.thesaurus));
    files.push_back("thesaurus.json");
  }
  return files;
}

std::shared_ptr<const VictimModel> Workspace::load_model(const std::string& name) const {
  const fs::path dir = model_dir(name);
  if (!fs::exists(dir / "spec.json"))
    throw InvalidArgument("unknown model: " + name + " (run train first)");
  return std::make_shared<const VictimModel>(advtext::load_model(dir).model);
}

std::optional<fs::path> Workspace::latest_attack_log(const std::string& dataset,
                                                     const std::string& model) const {
  if (!fs::is_directory(runs_dir())) return std::nullopt;
  std::optional<fs::path> best;
  std::string best_time;
  for (const auto& entry : fs::directory_iterator(runs_dir())) {
    if (!entry.is_directory() || !fs::exists(entry.path() / "manifest.json")) continue;
    if (fs::exists(entry.path() / ".partial")) continue;
    RunManifest m;
    try {
      m = RunManifest::read(entry.path());
    } catch (const std::exception&) {
      continue;
    }
    if (m.command != "attack" || m.status != "complete") continue;
    if (m.config.value("dataset", "") != dataset || m.config.value("model", "") != model)
      continue;
    const std::string key = m.finished_at + entry.path().filename().string();
    if (!best || key > best_time) {
      best = entry.path() / "log.jsonl";
      best_time = key;
    }
  }
  return best;
}

}  // namespace advtext::cli
