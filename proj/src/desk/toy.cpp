#include "advtext/desk/toy.hpp"

#include <cmath>

#include "advtext/core/error.hpp"
#include "advtext/core/rng.hpp"

namespace advtext::desk {

namespace {

using Group = std::vector<std::string>;

const std::vector<Group> kPosAdj = {
    {"good", "great", "fine", "nice", "decent"},
    {"excellent", "superb", "outstanding", "splendid"},
    {"pleasant", "lovely", "delightful", "charming"},
    {"friendly", "welcoming", "helpful", "kind"},
};
const std::vector<Group> kNegAdj = {
    {"bad", "poor", "weak", "mediocre", "shabby"},
    {"terrible", "awful", "horrible", "dreadful"},
    {"unpleasant", "nasty", "gloomy", "dismal"},
    {"rude", "unfriendly", "unhelpful", "careless"},
};
const std::vector<Group> kPosVerb = {
    {"loved", "adored", "enjoyed", "liked"},
    {"recommend", "endorse", "praise", "applaud"},
};
const std::vector<Group> kNegVerb = {
    {"hated", "loathed", "disliked", "despised"},
    {"regret", "resent", "lament", "deplore"},
};
const std::vector<Group> kNoun = {
    {"food", "meal", "dish", "dinner"},
    {"hotel", "place", "venue", "lodge"},
    {"staff", "crew", "team", "personnel"},
    {"room", "suite", "chamber", "quarters"},
    {"movie", "film", "picture", "feature"},
    {"service", "assistance", "support", "help"},
};
const std::vector<Group> kAdv = {
    {"really", "truly", "genuinely", "honestly"},
    {"quite", "rather", "fairly", "pretty"},
};
const std::vector<Group> kNeutralAdj = {
    {"large", "big", "huge", "vast"},
    {"new", "modern", "recent", "fresh"},
};
const std::vector<Group> kNeutralVerb = {
    {"visited", "tried", "toured", "checked"},
};

// Templates over slot names; anything else is literal. Every template
// renders to at least nine whitespace tokens.
const std::vector<std::vector<std::string>> kTemplates = {
    {"the", "NOUN", "was", "ADV", "ADJ", "and", "the", "NOUN", "was", "ADJ", "."},
    {"we", "NVERB", "the", "NADJ", "NOUN", "and", "it", "was", "ADV", "ADJ", "."},
    {"i", "VERB", "this", "NOUN", ",", "the", "NOUN", "felt", "ADJ", "too", "."},
    {"our", "NOUN", "at", "the", "NADJ", "NOUN", "was", "ADJ", "and", "ADJ", "."},
    {"honestly", "the", "NOUN", "seemed", "ADJ", "and", "we", "VERB", "the", "NOUN", "."},
    {"they", "VERB", "the", "NOUN", "because", "the", "NOUN", "was", "ADV", "ADJ", "."},
};

// Earlier group members are more frequent (weights 1/(i+1)^1.5).
const std::string& pick(const Group& g, Rng& rng) {
  double total = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) total += std::pow(double(i + 1), -1.5);
  double u = rng.uniform() * total;
  for (std::size_t i = 0; i < g.size(); ++i) {
    u -= std::pow(double(i + 1), -1.5);
    if (u <= 0.0) return g[i];
  }
  return g.back();
}

const Group& pick_group(const std::vector<Group>& groups, Rng& rng) {
  return groups[static_cast<std::size_t>(rng.below(groups.size()))];
}

std::string render(const std::vector<std::string>& tokens) {
  std::string out;
  for (const auto& t : tokens) {
    if (!out.empty() && t != "," && t != ".") out.push_back(' ');
    out += t;
  }
  return out;
}

}  // namespace

ToyCorpus make_toy_corpus(const ToyCorpusConfig& config) {
  if (config.noise < 0.0 || config.noise > 1.0)
    throw InvalidArgument("noise must be a probability");
  ToyCorpus corpus;
  corpus.dataset.name = config.name;
  corpus.dataset.label_space = LabelSpace({"negative", "positive"});
  corpus.dataset.split_seed = config.seed;

  auto add_groups = [&](const std::vector<Group>& groups, const std::string& tag) {
    for (const auto& g : groups) {
      for (const auto& w : g) {
        corpus.lexicon[w] = tag;
        auto& syn = corpus.thesaurus[w];
        for (const auto& other : g)
          if (other != w) syn.push_back(other);
      }
    }
  };
  add_groups(kPosAdj, "ADJ");
  add_groups(kNegAdj, "ADJ");
  add_groups(kNeutralAdj, "ADJ");
  add_groups(kPosVerb, "VERB");
  add_groups(kNegVerb, "VERB");
  add_groups(kNeutralVerb, "VERB");
  add_groups(kNoun, "NOUN");
  add_groups(kAdv, "ADV");
  for (const char* w : {"the", "this"}) corpus.lexicon[w] = "DET";
  for (const char* w : {"we", "i", "it", "they", "our"}) corpus.lexicon[w] = "PRON";
  for (const char* w : {"was", "felt", "seemed"}) corpus.lexicon[w] = "VERB";
  for (const char* w : {"and"}) corpus.lexicon[w] = "CCONJ";
  for (const char* w : {"at", "because"}) corpus.lexicon[w] = "ADP";
  for (const char* w : {"too", "honestly"}) corpus.lexicon[w] = "ADV";
  for (const char* w : {",", "."}) corpus.lexicon[w] = "PUNCT";

  Rng rng(config.seed);
  for (std::size_t i = 0; i < config.size; ++i) {
    const LabelIndex y = static_cast<LabelIndex>(rng.below(2));
    const auto& tpl = kTemplates[static_cast<std::size_t>(rng.below(kTemplates.size()))];
    std::vector<std::string> tokens;
    for (const auto& slot : tpl) {
      const bool flip = rng.uniform() < config.noise;
      const bool positive = (y == 1) != flip;
      if (slot == "ADJ")
        tokens.push_back(pick(pick_group(positive ? kPosAdj : kNegAdj, rng), rng));
      else if (slot == "VERB")
        tokens.push_back(pick(pick_group(positive ? kPosVerb : kNegVerb, rng), rng));
      else if (slot == "NOUN")
        tokens.push_back(pick(pick_group(kNoun, rng), rng));
      else if (slot == "ADV")
        tokens.push_back(pick(pick_group(kAdv, rng), rng));
      else if (slot == "NADJ")
        tokens.push_back(pick(pick_group(kNeutralAdj, rng), rng));
      else if (slot == "NVERB")
        tokens.push_back(pick(pick_group(kNeutralVerb, rng), rng));
      else
        tokens.push_back(slot);
    }
    Example e;
    e.id = config.name + "-" + std::to_string(i);
    e.text = render(tokens);
    e.gold_label = y;
    e.dataset_tag = config.name;
    corpus.dataset.examples.push_back(std::move(e));
  }
  return corpus;
}

}  // namespace advtext::desk
