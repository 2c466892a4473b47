#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "advtext/core/types.hpp"

namespace advtext {

enum class DatasetFormat { kCsv, kJsonl };

DatasetFormat parse_dataset_format(std::string_view s);

// Column map for ingestion. `labels` declares the label space in order; a
// row whose label is not declared is an error. When `labels` is empty the
// space is inferred from the file (sorted raw values).
struct DatasetSchema {
  std::string text_column = "text";
  std::string label_column = "label";
  std::optional<std::string> id_column;
  std::vector<std::string> labels;
  std::string dataset_tag;
};

struct LoadedDataset {
  LabeledDataset dataset;
  std::size_t dropped_count = 0;  // rows whose text was blank
  std::vector<std::string> warnings;
};

LoadedDataset load_dataset(const std::filesystem::path& path, DatasetFormat format,
                           const DatasetSchema& schema);

// Writes a dataset as line-delimited records with id/text/label/dataset_tag.
void write_dataset_jsonl(const LabeledDataset& dataset,
                         const std::filesystem::path& path);

using LabelMapping = std::map<std::string, std::string>;

// Renames classes. The mapping must cover every class and be injective; the
// new label space keeps the old class order.
LabeledDataset remap_labels(const LabeledDataset& dataset, const LabelMapping& mapping);

LabelMapping invert_mapping(const LabelMapping& mapping);

struct TrainTestSplit {
  LabeledDataset train;
  LabeledDataset test;
};

// |test| = round-half-even(test_fraction * N). Deterministic per seed;
// relative order inside each part follows the input.
TrainTestSplit split(const LabeledDataset& dataset, double test_fraction,
                     std::uint64_t seed);

// n distinct examples, deterministic per seed.
std::vector<Example> sample_examples(const LabeledDataset& dataset, std::size_t n,
                                     std::uint64_t seed);

// Content hash of a dataset file or in-memory dataset, hex encoded.
std::string dataset_hash(const LabeledDataset& dataset);

}  // namespace advtext
