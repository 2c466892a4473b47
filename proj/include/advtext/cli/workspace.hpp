#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "advtext/core/types.hpp"
#include "advtext/models/victim.hpp"

namespace advtext::cli {

// A stored dataset: both splits plus the optional POS lexicon and
// thesaurus that ship with synthetic corpora.
struct DatasetBundle {
  std::string name;
  std::filesystem::path dir;
  LabeledDataset full;
  LabeledDataset train;
  LabeledDataset test;
  std::string hash;
  std::map<std::string, std::string> lexicon;
  std::map<std::string, std::vector<std::string>> thesaurus;
  nlohmann::ordered_json info = nlohmann::ordered_json::object();
};

// Directory layout under one root:
//   datasets/<name>/{full,train,test}.jsonl, dataset.json, manifest.json
//   models/<name>/{spec.json,vocab.txt,weights.bin,report.json,manifest.json}
//   runs/<command>-.../{log.jsonl,metrics.csv,...,manifest.json}
class Workspace {
 public:
  explicit Workspace(std::filesystem::path root) : root_(std::move(root)) {}

  const std::filesystem::path& root() const { return root_; }
  std::filesystem::path datasets_dir() const { return root_ / "datasets"; }
  std::filesystem::path models_dir() const { return root_ / "models"; }
  std::filesystem::path runs_dir() const { return root_ / "runs"; }

  // A name that is an existing directory is used as a path.
  std::filesystem::path dataset_dir(const std::string& name) const;
  std::filesystem::path model_dir(const std::string& name) const;

  DatasetBundle load_dataset(const std::string& name) const;
  std::shared_ptr<const VictimModel> load_model(const std::string& name) const;

  // Newest completed attack run against `model` on `dataset`.
  std::optional<std::filesystem::path> latest_attack_log(const std::string& dataset,
                                                         const std::string& model) const;

 private:
  std::filesystem::path root_;
};

// Writes the split files and dataset.json of a bundle into `dir`; returns
// the file names written.
std::vector<std::string> write_dataset_bundle(const DatasetBundle& bundle,
                                              const std::filesystem::path& dir);

// Throws InvalidArgument unless `name` is a plain file-name token.
void check_name(const std::string& what, const std::string& name);

}  // namespace advtext::cli
