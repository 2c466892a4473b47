#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "advtext/core/types.hpp"

// Synthetic two-class review corpus for CPU-only runs. Sentences are built
// from templates whose slots draw on synonym groups, so a thesaurus and a
// POS lexicon come with the data.
namespace advtext::desk {

struct ToyCorpusConfig {
  std::size_t size = 2000;
  std::uint64_t seed = 0;
  // Probability that a sentiment slot draws from the other class.
  double noise = 0.1;
  std::string name = "toy";
};

struct ToyCorpus {
  LabeledDataset dataset;  // labels {"negative", "positive"}
  std::map<std::string, std::string> lexicon;  // word -> Universal POS tag
  std::map<std::string, std::vector<std::string>> thesaurus;
};

ToyCorpus make_toy_corpus(const ToyCorpusConfig& config);

}  // namespace advtext::desk
