#include <doctest.h>

#include <random>
#include <set>

#include "advtext/attack/engine.hpp"
#include "advtext/core/attack_log.hpp"
#include "advtext/core/dataset.hpp"
#include "advtext/core/text.hpp"
#include "advtext/desk/learned.hpp"
#include "advtext/desk/toy.hpp"
#include "advtext/oracles/mock.hpp"
#include "fixtures.hpp"
#include "micro.hpp"

using namespace advtext;

namespace {

std::string random_text(std::mt19937_64& gen) {
  static const std::vector<std::string> pool = {"alpha", "beta", "ممتاز", "café", "\"q\"",
                                                "tab\there", "line\nbreak", "😀", "ß", "\\"};
  std::string s;
  const std::size_t n = 1 + gen() % 6;
  for (std::size_t i = 0; i < n; ++i) s += (i ? " " : "") + pool[gen() % pool.size()];
  return s;
}

Prediction random_prediction(std::mt19937_64& gen, std::size_t k) {
  std::vector<double> logits(k);
  for (auto& l : logits) l = std::uniform_real_distribution<double>(-3, 3)(gen);
  return Prediction::from_logits(logits);
}

const desk::DeskOracles& desk_oracles() {
  static const auto toy = desk::make_toy_corpus({.size = 300, .seed = 4});
  static const desk::DeskOracles o = desk::DeskOracles::train(
      toy.dataset, toy.lexicon,
      {.mlm = {.dim = 16, .epochs = 3}, .glove = {.dim = 16, .min_count = 1, .epochs = 5}});
  return o;
}

}  // namespace

TEST_CASE("log round trip on random entries") {
  fixtures::TempDir dir;
  std::mt19937_64 gen(17);
  std::vector<AttackLogEntry> log;
  for (int i = 0; i < 200; ++i) {
    AttackLogEntry e;
    e.example_id = "id-" + std::to_string(i);
    e.model_id = "m";
    e.dataset_tag = "t";
    const std::size_t k = 2 + gen() % 3;
    e.original_text = random_text(gen);
    e.original_prediction = random_prediction(gen, k);
    e.gold_label = e.original_prediction.label();
    e.query_count = 1 + gen() % 100;
    e.config_hash = "h";
    switch (gen() % 3) {
      case 0: {
        Prediction adv = random_prediction(gen, k);
        while (adv.label() == e.original_prediction.label()) adv = random_prediction(gen, k);
        e.status = AttackStatus::kSuccess;
        e.adversarial_text = random_text(gen);
        e.adversarial_prediction = adv;
        e.substitutions.push_back({gen() % 5, "a", "b", gen() % 50, "NOUN", "NOUN",
                                   std::uniform_real_distribution<double>(0, 1)(gen), 0.1, true});
        break;
      }
      case 1: e.status = AttackStatus::kFailed; break;
      default: e.status = AttackStatus::kSkippedMisclassified;
    }
    log.push_back(e);
  }
  write_log(log, dir / "log.jsonl");
  CHECK(read_log(dir / "log.jsonl") == log);
}

TEST_CASE("remap then inverse is the identity on random datasets") {
  std::mt19937_64 gen(3);
  for (int t = 0; t < 20; ++t) {
    const std::size_t k = 2 + gen() % 4;
    std::vector<std::string> names;
    for (std::size_t i = 0; i < k; ++i) names.push_back("c" + std::to_string(i));
    LabeledDataset d;
    d.label_space = LabelSpace(names);
    for (int i = 0; i < 30; ++i) d.examples.push_back({std::to_string(i), "x", gen() % k, ""});
    LabelMapping m;
    std::vector<std::string> targets = names;
    std::shuffle(targets.begin(), targets.end(), gen);
    for (std::size_t i = 0; i < k; ++i) m[names[i]] = "new-" + targets[i];
    CHECK(remap_labels(remap_labels(d, m), invert_mapping(m)) == d);
  }
}

TEST_CASE("split partitions for many sizes and fractions") {
  for (std::size_t n : {2, 3, 7, 50, 101}) {
    for (double f : {0.1, 0.25, 0.5, 0.9}) {
      LabeledDataset d;
      d.label_space = LabelSpace({"a", "b"});
      for (std::size_t i = 0; i < n; ++i) d.examples.push_back({std::to_string(i), "x", i % 2, ""});
      const auto s = split(d, f, n);
      CHECK(s.train.size() + s.test.size() == n);
      std::set<std::string> ids;
      for (const auto& e : s.train.examples) ids.insert(e.id);
      for (const auto& e : s.test.examples) CHECK(ids.insert(e.id).second);
    }
  }
}

TEST_CASE("prediction invariants on random logits") {
  std::mt19937_64 gen(8);
  for (int i = 0; i < 500; ++i) {
    const Prediction p = random_prediction(gen, 2 + gen() % 4);
    double sum = 0;
    for (double s : p.scores()) {
      CHECK(s >= 0.0);
      CHECK(s <= 1.0);
      sum += s;
    }
    CHECK(std::abs(sum - 1.0) < 1e-6);
    for (std::size_t c = 0; c < p.num_classes(); ++c) CHECK(p.score(c) <= p.score(p.label()));
  }
}

TEST_CASE("learned masked LM keeps prefixes and ranks by score") {
  auto& o = desk_oracles();
  desk::CbowMlm mlm = o.mlm();
  const std::vector<std::string> tokens = {"the", "film", "was", "great", "and", "fun"};
  for (std::size_t pos = 0; pos < tokens.size(); ++pos) {
    std::vector<SynonymCandidate> prev;
    for (std::size_t k = 1; k <= 12; ++k) {
      const auto cur = mlm.mask_fill({tokens, pos, k});
      CHECK(cur.size() <= k);
      REQUIRE(prev.size() <= cur.size());
      for (std::size_t i = 0; i < prev.size(); ++i) CHECK(prev[i] == cur[i]);
      for (std::size_t i = 1; i < cur.size(); ++i) {
        CHECK(cur[i].mlm_rank > cur[i - 1].mlm_rank);
        CHECK(cur[i].mlm_score <= cur[i - 1].mlm_score);
      }
      // raw output may hold punctuation; the engine filters it
      for (const auto& c : keep_whole_words(cur, "[MASK]", k)) CHECK(text::is_whole_word(c.token));
      prev = cur;
    }
  }
  const auto dist = mlm.distribution(tokens, 3);
  double sum = 0;
  for (double p : dist) sum += p;
  CHECK(std::abs(sum - 1.0) < 1e-6);
}

TEST_CASE("similarity oracles are reflexive and symmetric") {
  auto& o = desk_oracles();
  desk::EmbeddingSimilarity emb(o.embeddings());
  mock::OverlapSimilarity overlap;
  std::mt19937_64 gen(2);
  const auto toy = desk::make_toy_corpus({.size = 40, .seed = 6});
  for (std::size_t i = 0; i + 1 < toy.dataset.size(); ++i) {
    const auto& a = toy.dataset.examples[i].text;
    const auto& b = toy.dataset.examples[i + 1].text;
    for (SimilarityScorer* s : {static_cast<SimilarityScorer*>(&emb),
                                static_cast<SimilarityScorer*>(&overlap)}) {
      CHECK(std::abs(s->similarity(a, a).value - 1.0) < 1e-6);
      CHECK(std::abs(s->similarity(a, b).value - s->similarity(b, a).value) < 1e-6);
      const double v = s->similarity(a, b).value;
      CHECK(v >= -1.0 - 1e-9);
      CHECK(v <= 1.0 + 1e-9);
    }
  }
  CHECK(emb.similarity("zzqx", "zzqx").value == doctest::Approx(1.0));
  CHECK(emb.similarity("zzqx", "qqzz").value == doctest::Approx(0.0));
}

TEST_CASE("desk sessions are independent views on shared weights") {
  auto& o = desk_oracles();
  auto s1 = o.session(std::make_unique<mock::KeywordClassifier>(2, std::map<std::string, LabelIndex>{}));
  auto s2 = o.session(std::make_unique<mock::KeywordClassifier>(2, std::map<std::string, LabelIndex>{}));
  const MaskedQuery q{{"the", "film", "was", "great"}, 3, 5};
  CHECK(s1.mlm->mask_fill(q) == s2.mlm->mask_fill(q));
  const auto tags = s1.tagger->pos_tag({"the", "film", "qqqzzz"});
  CHECK(tags.tags.size() == 3);
  CHECK(tags.tags[2] == "X");
}

TEST_CASE("query count matches classify calls on random instances") {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto m = fixtures::micro_instance(seed);
    auto session = m.session();
    CountingClassifier counter(*session.classifier);
    const OracleSet set{counter, *session.mlm, *session.tagger, *session.similarity};
    const auto r = AttackEngine(m.config()).attack(m.example(), set);
    CHECK(r.entry.query_count == counter.count());
    if (m.config().importance_mode == ImportanceMode::kOnce)
      CHECK(r.entry.query_count <= m.words.size() + 1 + r.candidates_evaluated + 1);
    CHECK_NOTHROW(r.entry.validate());
  }
}

TEST_CASE("attack outcome is deterministic per instance") {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto m = fixtures::micro_instance(seed);
    const auto s1 = m.session(), s2 = m.session();
    const AttackEngine engine(m.config());
    CHECK(engine.attack(m.example(), s1.view()).entry ==
          engine.attack(m.example(), s2.view()).entry);
  }
}
