#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "advtext/core/dataset.hpp"
#include "advtext/core/error.hpp"
#include "advtext/core/rng.hpp"
#include "advtext/desk/toy.hpp"
#include "advtext/eval/metrics.hpp"
#include "advtext/oracles/mock.hpp"
#include "fixtures.hpp"

using namespace advtext;
namespace ref = fixtures::reference;

namespace {

// Two-class entry with gold 0; `after` < 0.5 marks a success.
AttackLogEntry entry(const std::string& id, double before, std::optional<double> after) {
  AttackLogEntry e;
  e.example_id = id;
  e.model_id = "m";
  e.dataset_tag = "t";
  e.original_text = "text " + id;
  e.original_prediction = Prediction({before, 1.0 - before});
  e.query_count = 5;
  e.config_hash = "h";
  e.status = AttackStatus::kFailed;
  if (after) {
    e.adversarial_text = "adv " + id;
    e.adversarial_prediction = Prediction({*after, 1.0 - *after});
    if (*after < 0.5) e.status = AttackStatus::kSuccess;
    e.substitutions.push_back({0, "text", "adv", 0, "NOUN", "NOUN", 0.9, before - *after, *after < 0.5});
  }
  e.validate();
  return e;
}

double mean(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

}  // namespace

TEST_CASE("metrics on a four-entry hand fixture") {
  const std::vector<double> before = {0.9, 0.8, 0.7, 0.6};
  const std::vector<double> after = {0.9, 0.3, 0.7, 0.1};
  std::vector<AttackLogEntry> log;
  for (std::size_t i = 0; i < 4; ++i)
    log.push_back(entry(std::to_string(i), before[i],
                        before[i] == after[i] ? std::nullopt : std::optional(after[i])));
  const MetricsReport r = compute_metrics(log);
  CHECK(r.acc_ba == doctest::Approx(100.0 * mean(before)));
  CHECK(r.acc_aa == doctest::Approx(100.0 * mean(after)));
  CHECK(r.acc_ba == doctest::Approx(75.0));
  CHECK(r.acc_aa == doctest::Approx(50.0));
  CHECK(r.att_dr == doctest::Approx(25.0));
  CHECK(r.att_sr == doctest::Approx(50.0));
  CHECK(r.n_success == 2);
  CHECK(r.mean_perturbed_words == doctest::Approx(1.0));
  CHECK(r.mean_queries == doctest::Approx(5.0));
  CHECK(compute_metrics(log).to_json() == r.to_json());
}

TEST_CASE("no successes means no damage") {
  std::vector<AttackLogEntry> log;
  for (int i = 0; i < 10; ++i) log.push_back(entry(std::to_string(i), 0.7, std::nullopt));
  const MetricsReport r = compute_metrics(log);
  CHECK(r.att_sr == 0.0);
  CHECK(r.att_dr == doctest::Approx(0.0));
  CHECK(r.acc_ba == doctest::Approx(70.0));
}

TEST_CASE("skipped and error entries") {
  std::vector<AttackLogEntry> log = {entry("a", 0.8, 0.2), entry("b", 0.6, std::nullopt)};
  AttackLogEntry skip = entry("c", 0.4, std::nullopt);
  skip.status = AttackStatus::kSkippedMisclassified;
  skip.query_count = 1;
  AttackLogEntry err = entry("d", 0.9, std::nullopt);
  err.status = AttackStatus::kError;
  log.push_back(skip);
  log.push_back(err);
  const MetricsReport r = compute_metrics(log);
  CHECK(r.n_samples == 3);
  CHECK(r.n_error == 1);
  CHECK(r.n_skipped == 1);
  CHECK(r.att_sr == doctest::Approx(100.0 / 3.0));
  CHECK(r.acc_ba == doctest::Approx(100.0 * (0.8 + 0.6 + 0.4) / 3.0));
  CHECK(r.acc_aa == doctest::Approx(100.0 * (0.2 + 0.6 + 0.4) / 3.0));
  CHECK(r.att_sr_excl == doctest::Approx(50.0));
  CHECK(r.acc_ba_excl == doctest::Approx(70.0));
  CHECK(r.acc_aa_excl == doctest::Approx(40.0));
  CHECK(r.conf_ba == doctest::Approx(100.0 * (0.8 + 0.6 + 0.6) / 3.0));
}

TEST_CASE("metrics input errors") {
  CHECK_THROWS_WITH_AS(compute_metrics({}), doctest::Contains("empty log"), InvalidArgument);
  auto a = entry("a", 0.8, 0.2);
  auto b = entry("b", 0.8, 0.2);
  b.config_hash = "other";
  CHECK_THROWS_AS(compute_metrics({a, b}), InvalidArgument);
}

TEST_CASE("att_dr is non-negative when no gold probability rises") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(seed);
    std::vector<AttackLogEntry> log;
    for (int i = 0; i < 30; ++i) {
      const double b = 0.5 + 0.49 * rng.uniform();
      const double a = b * rng.uniform();
      log.push_back(entry(std::to_string(i), b, a));
    }
    CHECK(compute_metrics(log).att_dr >= 0.0);
  }
}

TEST_CASE("reference attack table reproduced from fixture logs") {
  for (const auto& row : ref::kAttack) {
    const auto log = fixtures::attack_log(row);
    const MetricsReport r = compute_metrics(log);
    INFO(row.model << "/" << row.dataset);
    CHECK(std::abs(r.att_sr - row.att_sr) <= 0.01);
    CHECK(std::abs(r.acc_ba - row.acc_ba) <= 0.01);
    CHECK(std::abs(r.acc_aa - row.acc_aa) <= 0.01);
    CHECK(std::abs(r.att_dr - row.att_dr) <= 0.01);
    CHECK(std::abs(r.att_dr - (r.acc_ba - r.acc_aa)) <= 0.01);
  }
}

TEST_CASE("transfer on four pairs with one flip") {
  std::vector<AttackLogEntry> log;
  std::map<std::string, LabelIndex> table;
  for (int i = 0; i < 4; ++i) {
    log.push_back(fixtures::success_entry("e" + std::to_string(i), "src", "t",
                                          "orig " + std::to_string(i), "adv " + std::to_string(i)));
    table["orig " + std::to_string(i)] = 0;
    table["adv " + std::to_string(i)] = i == 2 ? 1 : 0;
  }
  mock::LookupClassifier victim(2, table, 1);
  const auto cells = transfer_matrix({{"src", log}}, {{"vic", &victim}}, 4);
  REQUIRE(cells.size() == 1);
  CHECK(cells[0].acc_x == doctest::Approx(100.0));
  CHECK(cells[0].acc_xadv == doctest::Approx(75.0));
  CHECK(cells[0].delta == doctest::Approx(25.0));
  CHECK(cells[0].consistency == doctest::Approx(75.0));
}

TEST_CASE("insensitive victim shows no transfer") {
  const auto log = fixtures::success_log("src", 10);
  mock::KeywordClassifier victim(2, {{"nothing", 1}});
  const auto cells = transfer_matrix({{"src", log}}, {{"vic", &victim}}, 10);
  REQUIRE(cells.size() == 1);
  CHECK(cells[0].acc_x == cells[0].acc_xadv);
  CHECK(cells[0].delta == 0.0);
}

TEST_CASE("transfer excludes the diagonal and flags short logs") {
  mock::KeywordClassifier a(2, {}), b(2, {});
  const auto cells = transfer_matrix(
      {{"a", fixtures::success_log("a", 5)}, {"b", fixtures::success_log("b", 2)}},
      {{"a", &a}, {"b", &b}}, 3);
  REQUIRE(cells.size() == 2);
  for (const auto& c : cells) CHECK(c.source_model != c.victim_model);
  const auto& short_cell = cells[0].source_model == "b" ? cells[0] : cells[1];
  CHECK_FALSE(short_cell.available);
  CHECK(short_cell.successes_available == 2);
  const auto& ok = cells[0].source_model == "a" ? cells[0] : cells[1];
  CHECK(ok.available);
  CHECK(ok.n == 3);
}

TEST_CASE("reference transfer table reproduced") {
  for (const char* dataset : {"hard", "msda"}) {
    auto fx = fixtures::transfer_fixture(dataset);
    const auto cells = transfer_matrix(fx.logs, fx.named(), 245);
    CHECK(cells.size() == 6);
    for (const auto& row : ref::kTransfer) {
      if (std::string(row.dataset) != dataset) continue;
      const TransferCell* cell = nullptr;
      for (const auto& c : cells)
        if (c.source_model == row.source && c.victim_model == row.victim) cell = &c;
      REQUIRE(cell != nullptr);
      INFO(dataset << " " << row.source << "->" << row.victim);
      CHECK(std::abs(cell->delta - row.delta) <= 0.01);
      CHECK(std::abs(cell->acc_x - row.acc_x) <= 0.01);
      CHECK(std::abs(cell->acc_xadv - row.acc_xadv) <= 0.01);
    }
  }
}

TEST_CASE("defense arithmetic") {
  for (const auto& row : ref::kDefense) {
    const DefenseReport r = defense_report(row.acc_ba, row.acc_aa, row.adversarial_training_acc);
    CHECK(std::abs(r.recovery - (row.adversarial_training_acc - row.acc_aa)) <= 0.01);
    CHECK(r.recovery >= ref::kMinRecovery);
  }
  CHECK(defense_report(88.59, 73.90, 76.51).recovery == doctest::Approx(2.61));
  CHECK_THROWS_AS(defense_report(101.0, 50.0, 50.0), InvalidArgument);
  CHECK_THROWS_AS(defense_report(50.0, -1.0, 50.0), InvalidArgument);
}

TEST_CASE("adversarial examples keep gold labels and ids") {
  std::vector<AttackLogEntry> log = {entry("a", 0.8, 0.2), entry("b", 0.7, std::nullopt),
                                     entry("c", 0.9, 0.6)};
  const auto adv = adversarial_examples(log);
  REQUIRE(adv.size() == 1);
  CHECK(adv[0].text == "adv a");
  CHECK(adv[0].gold_label == 0);
  CHECK(adv[0].id != "a");
}

TEST_CASE("csv exports have one row per metric or cell") {
  const auto r = compute_metrics({entry("a", 0.8, 0.2)});
  const std::string m = metrics_csv({r});
  CHECK(m.rfind("model_id,dataset_tag,metric,value\n", 0) == 0);
  CHECK(m.find("att_sr,100.0000") != std::string::npos);
  mock::KeywordClassifier b(2, {});
  const auto cells = transfer_matrix({{"a", fixtures::success_log("a", 2)}}, {{"b", &b}}, 5);
  const std::string t = transfer_csv(cells);
  CHECK(std::count(t.begin(), t.end(), '\n') == 2);
  const std::string d = defense_csv({defense_report(90.0, 60.0, 70.0)});
  CHECK(d.find("10.0000") != std::string::npos);
  CHECK_FALSE(render_metrics_table({r}).empty());
}

TEST_CASE("defense on a toy victim raises replay accuracy") {
  const auto toy = desk::make_toy_corpus({.size = 400, .seed = 3});
  const auto parts = split(toy.dataset, 0.25, 1);
  ModelSpec spec;
  spec.arch = Arch::kWordCnn;
  spec.arch_params = {{"filters", 8}};
  spec.embedding_dim = 16;
  spec.label_space = toy.dataset.label_space;
  TrainConfig cfg;
  cfg.epochs = 4;
  cfg.learning_rate = 0.01;
  cfg.pretrain_embeddings = false;
  const auto victim = train_victim(spec, parts.train, parts.test, cfg);

  auto sessions = [&](std::shared_ptr<const VictimModel> m) {
    OracleSession s;
    s.classifier = std::make_unique<ModelClassifier>(std::move(m));
    s.mlm = std::make_unique<mock::ThesaurusMlm>(toy.thesaurus);
    s.tagger = std::make_unique<mock::LexiconTagger>(toy.lexicon);
    s.similarity = std::make_unique<mock::OverlapSimilarity>();
    return s;
  };
  AttackConfig ac;
  ac.sim_threshold = 0.5;
  const AttackEngine engine(ac);
  const auto shared = std::make_shared<const VictimModel>(victim.model);
  const auto log = run_attacks(parts.test.examples, engine, [&] { return sessions(shared); }, 1);
  const auto adv = adversarial_examples(log);
  REQUIRE(adv.size() >= 5);

  TrainConfig tune = cfg;
  tune.epochs = 3;
  const auto outcome = run_defense(victim.model, parts.train, parts.test, log, engine, sessions, tune);
  CHECK(outcome.report.n_augmented == adv.size());
  CHECK(outcome.report.replay_before == doctest::Approx(0.0));
  CHECK(outcome.report.replay_after > outcome.report.replay_before);
  CHECK(outcome.reattack_log.size() == log.size());
  for (std::size_t i = 0; i < log.size(); ++i)
    CHECK(outcome.reattack_log[i].example_id == log[i].example_id);

  std::vector<AttackLogEntry> none;
  for (auto e : log) {
    if (e.status != AttackStatus::kSuccess) none.push_back(e);
  }
  const auto control = run_defense(victim.model, parts.train, parts.test, none, engine, sessions, tune);
  CHECK(control.report.n_augmented == 0);
  CHECK(control.report.replay_after == 0.0);
}
