#include "fixtures.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

#include <fmt/format.h>

#include "advtext/core/attack_log.hpp"

namespace fixtures {

using namespace advtext;
namespace fs = std::filesystem;

Prediction shaped(std::size_t k, LabelIndex gold, double gold_prob, bool gold_wins) {
  std::vector<double> s(k, 0.0);
  s[gold] = gold_prob;
  if (gold_wins) {
    for (std::size_t c = 0; c < k; ++c)
      if (c != gold) s[c] = (1.0 - gold_prob) / static_cast<double>(k - 1);
  } else {
    s[(gold + 1) % k] = 1.0 - gold_prob;
  }
  Prediction p(s);
  if ((p.label() == gold) != gold_wins)
    throw std::logic_error(fmt::format("cannot shape p={} over {} classes", gold_prob, k));
  return p;
}

AttackLogEntry success_entry(const std::string& id, const std::string& model,
                             const std::string& tag, const std::string& original,
                             const std::string& adversarial) {
  AttackLogEntry e;
  e.example_id = id;
  e.model_id = model;
  e.dataset_tag = tag;
  e.gold_label = 0;
  e.original_text = original;
  e.original_prediction = shaped(2, 0, 0.9, true);
  e.adversarial_text = adversarial;
  e.adversarial_prediction = shaped(2, 0, 0.2, false);
  e.status = AttackStatus::kSuccess;
  e.substitutions.push_back({0, "w", "v", 0, "ADJ", "ADJ", 0.9, 0.7, true});
  e.query_count = 12;
  e.config_hash = "fixture";
  return e;
}

std::vector<AttackLogEntry> attack_log(const reference::AttackRow& row, std::size_t n) {
  const std::size_t n_s = static_cast<std::size_t>(std::llround(row.att_sr * n / 100.0));
  const std::size_t n_f = n - n_s;
  const double N = static_cast<double>(n), S = static_cast<double>(n_s),
               F = static_cast<double>(n_f);
  const double B = row.acc_ba / 100.0, A = row.acc_aa / 100.0;
  const double floor_p = 1.0 / static_cast<double>(row.classes);

  // Unchanged failures and a shared original probability when that leaves
  // a flippable success probability; otherwise the failures are perturbed
  // too and take the slack.
  double fo = B, fa = B, so = B;
  double sa = (N * A - F * B) / S;
  if (!(sa >= 0.0 && sa < 0.5)) {
    sa = 0.3;
    fa = (N * A - S * sa) / F;
    if (fa > 1.0) {
      sa = 0.49;
      fa = (N * A - S * sa) / F;
    }
    fo = std::max(B, fa);
    so = (N * B - F * fo) / S;
  }
  if (!(fo > floor_p && fa > floor_p && fa <= fo && fo <= 1.0 && so > floor_p && so <= 1.0))
    throw std::logic_error("no fixture for row " + std::string(row.model));

  std::vector<AttackLogEntry> log;
  for (std::size_t i = 0; i < n; ++i) {
    const bool success = i < n_s;
    AttackLogEntry e;
    e.example_id = fmt::format("{}-{}-{:04}", row.dataset, row.model, i);
    e.model_id = row.model;
    e.dataset_tag = row.dataset;
    e.gold_label = i % row.classes;
    e.original_text = fmt::format("original example {}", i);
    e.original_prediction = shaped(row.classes, e.gold_label, success ? so : fo, true);
    e.config_hash = "fixture";
    e.query_count = 8;
    if (success) {
      e.status = AttackStatus::kSuccess;
      e.adversarial_text = fmt::format("adversarial example {}", i);
      e.adversarial_prediction = shaped(row.classes, e.gold_label, sa, false);
      e.substitutions.push_back({0, "original", "adversarial", 0, "NOUN", "NOUN", 0.9,
                                 so - sa, true});
    } else {
      e.status = AttackStatus::kFailed;
      if (fa < fo) {
        e.adversarial_text = fmt::format("perturbed example {}", i);
        e.adversarial_prediction = shaped(row.classes, e.gold_label, fa, true);
      }
    }
    e.validate();
    log.push_back(std::move(e));
  }
  return log;
}

std::vector<NamedClassifier> TransferFixture::named() const {
  std::vector<NamedClassifier> out;
  for (const auto& [id, c] : victims) out.push_back({id, c.get()});
  return out;
}

TransferFixture transfer_fixture(const std::string& dataset, std::size_t n) {
  TransferFixture f;
  std::map<std::string, std::map<std::string, LabelIndex>> tables;
  for (const auto& row : reference::kTransfer) {
    if (row.dataset != dataset) continue;
    auto& log = f.logs[row.source];
    if (log.empty())
      for (std::size_t i = 0; i < n; ++i)
        log.push_back(success_entry(fmt::format("{}-{:03}", row.source, i), row.source, dataset,
                                    fmt::format("{} original {}", row.source, i),
                                    fmt::format("{} adversarial {}", row.source, i)));
    const auto kx = static_cast<std::size_t>(std::llround(row.acc_x * n / 100.0));
    const auto ka = static_cast<std::size_t>(std::llround(row.acc_xadv * n / 100.0));
    auto& table = tables[row.victim];
    for (std::size_t i = 0; i < n; ++i) {
      table[log[i].original_text] = i < kx ? 0 : 1;
      table[*log[i].adversarial_text] = i < ka ? 0 : 1;
    }
  }
  for (auto& [victim, table] : tables)
    f.victims[victim] = std::make_unique<mock::LookupClassifier>(2, table, 1);
  return f;
}

OracleSession MockCorpus::session() const {
  OracleSession s;
  s.classifier = std::make_unique<mock::KeywordClassifier>(2, keywords);
  s.mlm = std::make_unique<mock::ThesaurusMlm>(thesaurus);
  s.tagger = std::make_unique<mock::LexiconTagger>(lexicon);
  s.similarity = std::make_unique<mock::OverlapSimilarity>();
  return s;
}

MockCorpus mock_corpus(std::size_t size, std::size_t planted) {
  MockCorpus c;
  c.data.name = "mock";
  c.data.label_space = LabelSpace({"positive", "negative"});
  const std::vector<std::string> positive = {"excellent", "superb", "wonderful"};
  const std::vector<std::string> negative = {"awful", "dreadful", "terrible"};
  for (const auto& w : positive) c.keywords[w] = 0;
  for (const auto& w : negative) c.keywords[w] = 1;
  c.keywords["bad"] = 1;
  c.keywords["poor"] = 1;
  // Decoys: a neutral adjective (uniform scores keep label 0) and a verb
  // (POS mismatch).
  for (std::size_t i = 0; i < positive.size(); ++i)
    c.thesaurus[positive[i]] = {"fine", "shine", negative[i]};
  c.thesaurus["bad"] = {"poor", "crawl"};
  for (const auto& w : positive) c.lexicon[w] = "ADJ";
  for (const auto& w : negative) c.lexicon[w] = "ADJ";
  for (const char* w : {"bad", "poor", "weak", "fine", "memorable", "dull"}) c.lexicon[w] = "ADJ";
  for (const char* w : {"shine", "crawl", "was", "felt"}) c.lexicon[w] = "VERB";
  for (const char* w : {"truly", "really"}) c.lexicon[w] = "ADV";
  const std::vector<std::string> nouns = {"plot", "cast", "story", "ending", "music",
                                          "script", "camera", "pacing", "dialogue", "score"};
  const std::vector<std::string> films = {"film", "movie", "series", "show", "drama"};
  for (const auto& n : nouns) c.lexicon[n] = "NOUN";
  for (const auto& n : films) c.lexicon[n] = "NOUN";

  for (std::size_t i = 0; i < size; ++i) {
    const bool plant = i < planted;
    const std::string& noun = nouns[i % nouns.size()];
    const std::string& film = films[(i / nouns.size()) % films.size()];
    const std::string keyword = plant ? positive[i % positive.size()] : "bad";
    const std::string tail = plant ? "memorable" : "dull";
    Example e;
    e.id = fmt::format("mock-{:02}", i);
    e.text = fmt::format("the {} of this {} was {} and truly {}", noun, film, keyword, tail);
    e.gold_label = plant ? 0 : 1;
    e.dataset_tag = "mock";
    if (plant) c.planted.insert(e.id);
    c.data.examples.push_back(std::move(e));
  }
  return c;
}

std::vector<AttackLogEntry> success_log(const std::string& model, std::size_t n,
                                        const std::string& tag) {
  std::vector<AttackLogEntry> log;
  for (std::size_t i = 0; i < n; ++i)
    log.push_back(success_entry(fmt::format("{}-{:03}", model, i), model, tag,
                                fmt::format("{} original sentence {}", model, i),
                                fmt::format("{} adversarial sentence {}", model, i)));
  return log;
}

namespace {

// Ratings in {4, 5} over `count` tasks summing to `sum`.
std::vector<int> spread(int sum, int count) {
  const int fives = sum - 4 * count;
  if (fives < 0 || fives > count) throw std::logic_error("rating sum out of reach");
  std::vector<int> v(static_cast<std::size_t>(count), 4);
  for (int i = 0; i < fives; ++i) v[static_cast<std::size_t>(i)] = 5;
  return v;
}

}  // namespace

RatedStudy rated_study(std::uint64_t seed) {
  using namespace humaneval;
  constexpr std::size_t kPerModel = 50;
  std::map<std::string, std::vector<AttackLogEntry>> logs;
  for (const auto& row : reference::kHuman) logs[row.model] = success_log(row.model, kPerModel);
  RatedStudy r;
  r.study = build_study(logs, kPerModel, seed, "reference");
  r.evaluators = {{"ling-1", Group::kLinguist, "L1"},
                  {"ling-2", Group::kLinguist, "L2"},
                  {"non-1", Group::kNonLinguist, "N1"},
                  {"non-2", Group::kNonLinguist, "N2"}};

  for (const auto& row : reference::kHuman) {
    for (std::size_t g = 0; g < 2; ++g) {
      const double grammar = g == 0 ? row.grammar_linguist : row.grammar_non_linguist;
      const double semantic = g == 0 ? row.semantic_linguist : row.semantic_non_linguist;
      // Per evaluator: ratio = sum / 250 * 100, so the pair of sums totals
      // 5 * percent, split as evenly as integers allow.
      const int g_total = static_cast<int>(std::lround(grammar * 5.0));
      const int s_total = static_cast<int>(std::lround(semantic * 5.0));
      for (std::size_t k = 0; k < 2; ++k) {
        const Evaluator& ev = r.evaluators[2 * g + k];
        const int g_sum = k == 0 ? g_total / 2 : g_total - g_total / 2;
        const int s_sum = k == 0 ? s_total / 2 : s_total - s_total / 2;
        const auto adv = spread(g_sum, kPerModel);
        const auto sem = spread(s_sum, kPerModel);
        std::size_t ai = 0, si = 0;
        for (const auto& t : r.study.grammar) {
          if (t.source_model != row.model) continue;
          const int v = t.hidden_origin == Origin::kOriginal ? 5 : adv[ai++];
          r.ratings.push_back({t.task_id, ev.id, v, "2024-01-01T00:00:00.000Z"});
        }
        for (const auto& t : r.study.semantic) {
          if (t.source_model != row.model) continue;
          r.ratings.push_back({t.task_id, ev.id, sem[si++], "2024-01-01T00:00:00.000Z"});
        }
      }
    }
  }
  return r;
}

TempDir::TempDir() {
  std::random_device rd;
  for (;;) {
    path_ = fs::temp_directory_path() / fmt::format("advtext-test-{:016x}",
                                                    (std::uint64_t{rd()} << 32) | rd());
    if (fs::create_directory(path_)) break;
  }
}

TempDir::~TempDir() {
  std::error_code ec;
  fs::remove_all(path_, ec);
}

}  // namespace fixtures
