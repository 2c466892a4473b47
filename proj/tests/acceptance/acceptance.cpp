// Prints one PASS/FAIL line per acceptance criterion; exit status 1 when
// any criterion fails. --skip-desk leaves out the two trained-model runs.
#include <chrono>
#include <cmath>
#include <cstring>
#include <functional>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "advtext/attack/audit.hpp"
#include "advtext/attack/engine.hpp"
#include "advtext/core/dataset.hpp"
#include "advtext/desk/learned.hpp"
#include "advtext/desk/toy.hpp"
#include "advtext/eval/metrics.hpp"
#include "advtext/humaneval/study.hpp"
#include "advtext/models/victim.hpp"
#include "advtext/oracles/mock.hpp"
#include "fixtures.hpp"
#include "micro.hpp"

using namespace advtext;
namespace ref = fixtures::reference;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  std::string name;
  double budget_s;
  std::function<Verdict()> run;
};

bool close(double a, double b, double tol = 0.01) { return std::abs(a - b) <= tol + 1e-9; }

Verdict metric_arithmetic() {
  std::string worst;
  double max_err = 0.0;
  for (const auto& row : ref::kAttack) {
    const MetricsReport r = compute_metrics(fixtures::attack_log(row));
    for (auto [got, want] : {std::pair{r.att_sr, row.att_sr}, {r.acc_ba, row.acc_ba},
                             {r.acc_aa, row.acc_aa}, {r.att_dr, row.att_dr}}) {
      if (std::abs(got - want) > max_err) {
        max_err = std::abs(got - want);
        worst = fmt::format("{}/{}", row.model, row.dataset);
      }
    }
  }
  const MetricsReport bert = compute_metrics(fixtures::attack_log(ref::kAttack[4]));
  return {max_err <= 0.01,
          fmt::format("6 cells, max err {:.4f}{}; bert/hard att_dr {:.2f}", max_err,
                      worst.empty() ? "" : " at " + worst, bert.att_dr)};
}

Verdict transfer_arithmetic() {
  std::size_t matched = 0;
  double max_err = 0.0;
  bool diagonal = false;
  for (const char* dataset : {"hard", "msda"}) {
    auto fx = fixtures::transfer_fixture(dataset);
    const auto cells = transfer_matrix(fx.logs, fx.named(), 245);
    for (const auto& c : cells) diagonal |= c.source_model == c.victim_model;
    for (const auto& row : ref::kTransfer) {
      if (std::string(row.dataset) != dataset) continue;
      for (const auto& c : cells) {
        if (c.source_model != row.source || c.victim_model != row.victim) continue;
        ++matched;
        max_err = std::max({max_err, std::abs(c.delta - row.delta), std::abs(c.acc_x - row.acc_x),
                            std::abs(c.acc_xadv - row.acc_xadv)});
      }
    }
  }
  return {matched == 12 && max_err <= 0.01 && !diagonal,
          fmt::format("{}/12 cells, max err {:.4f}, diagonal {}", matched, max_err,
                      diagonal ? "present" : "excluded")};
}

Verdict defense_arithmetic() {
  bool ok = true;
  std::string detail;
  for (const auto& row : ref::kDefense) {
    const DefenseReport r = defense_report(row.acc_ba, row.acc_aa, row.adversarial_training_acc);
    ok &= close(r.recovery, row.adversarial_training_acc - row.acc_aa) &&
          r.recovery >= ref::kMinRecovery;
    detail += fmt::format("{}{} recovery {:.2f}", detail.empty() ? "" : ", ", row.dataset,
                          r.recovery);
  }
  return {ok, detail};
}

Verdict mock_end_to_end() {
  const auto corpus = fixtures::mock_corpus(50, 30);
  const AttackEngine engine{AttackConfig{}};
  const auto log = run_attacks(corpus.data.examples, engine, [&] { return corpus.session(); }, 1);
  const MetricsReport r = compute_metrics(log);
  const auto session = corpus.session();
  std::size_t unsound = 0;
  for (const auto& e : log) {
    if (e.status != AttackStatus::kSuccess) continue;
    if (!audit_success(e, session.view(), engine.config(), engine.stopwords()).empty()) ++unsound;
  }
  return {r.att_sr >= 60.0 && unsound == 0,
          fmt::format("att_sr {:.2f}, {} successes, {} unsound", r.att_sr, r.n_success, unsound)};
}

Verdict brute_force() {
  std::size_t flips = 0, violations = 0;
  for (std::uint64_t s = 0; s < 200; ++s) {
    const auto m = fixtures::micro_instance(50000 + s);
    if (!fixtures::brute_force_top_flip(m)) continue;
    ++flips;
    const auto session = m.session();
    const auto r = AttackEngine(m.config()).attack(m.example(), session.view());
    if (r.entry.status != AttackStatus::kSuccess) ++violations;
  }
  return {violations == 0,
          fmt::format("200 instances, {} with a top-position flip, {} violations", flips,
                      violations)};
}

Verdict importance_oracle() {
  const StopwordList none{std::vector<std::string>{}};
  mock::KeywordClassifier one(2, {{"good", 0}});
  mock::KeywordClassifier two(2, {{"good", 0}, {"great", 0}});
  struct Case {
    Classifier* clf;
    std::string text;
    std::vector<double> expected;  // by position
  };
  const std::vector<Case> cases = {
      {&one, "good plot overall", {0.9 - 0.5, 0.0, 0.0}},
      {&two, "plot good great", {0.0, 81.0 / 82.0 - 0.9, 81.0 / 82.0 - 0.9}},
      {&two, "good", {0.9 - 0.5}},
  };
  double max_err = 0.0;
  bool queries_ok = true;
  for (const auto& c : cases) {
    CountingClassifier counter(*c.clf);
    const CleanedText cleaned = clean(c.text, none);
    const auto ranking = rank_word_importance(c.text, cleaned, counter);
    queries_ok &= counter.count() == cleaned.size() + 1;
    for (const auto& e : ranking.entries)
      max_err = std::max(max_err, std::abs(e.score - c.expected.at(e.position)));
  }
  return {max_err <= 1e-9 && queries_ok,
          fmt::format("{} cases, max err {:.2e}, query count {}", cases.size(), max_err,
                      queries_ok ? "len+1" : "WRONG")};
}

Verdict human_eval() {
  using namespace humaneval;
  Study s;
  s.study_id = "hand";
  s.grammar = {{"o", "x", Origin::kOriginal, "m"}, {"a", "y", Origin::kAdversarial, "m"}};
  s.semantic = {{"p", "x", "y", "m"}};
  const std::vector<Evaluator> ev = {{"e1", Group::kLinguist, ""}, {"e2", Group::kLinguist, ""}};
  // e1: adversarial 4 / original 5; e2: 4 / 4
  const std::vector<RatingRecord> six = {{"o", "e1", 5, ""}, {"a", "e1", 4, ""},
                                         {"p", "e1", 4, ""}, {"o", "e2", 4, ""},
                                         {"a", "e2", 4, ""}, {"p", "e2", 5, ""}};
  const auto single = aggregate({six[0], six[1], six[2]}, s, {ev[0]});
  const double r80 = single.find("linguist", "m")->grammatical_ratio;
  const double s80 = single.find("linguist", "m")->semantic_percentage;
  const auto both = aggregate(six, s, ev);
  const double r90 = both.find("linguist", "m")->grammatical_ratio;
  bool ok = close(r80, 80.0) && close(s80, 80.0) && close(r90, 90.0);

  const auto rs = fixtures::rated_study();
  const auto report = aggregate(rs.ratings, rs.study, rs.evaluators);
  double max_err = 0.0;
  for (const auto& row : ref::kHuman) {
    const auto* o = report.find("overall", row.model);
    if (!o) return {false, std::string("no overall row for ") + row.model};
    max_err = std::max({max_err, std::abs(o->grammatical_ratio - row.grammar_overall),
                        std::abs(o->semantic_percentage - row.semantic_overall)});
  }
  ok &= max_err <= 0.01;
  return {ok, fmt::format("hand ratio {:.2f} (pair mean {:.2f}), reference overall max err {:.4f}, "
                          "bert grammar overall {:.2f}",
                          r80, r90, max_err, report.find("overall", "bert")->grammatical_ratio)};
}

// Shared by the two trained-model criteria.
struct DeskRun {
  desk::ToyCorpus toy;
  TrainTestSplit parts;
  std::optional<TrainedModel> victim;
  std::optional<desk::DeskOracles> oracles;
  std::vector<AttackLogEntry> log;
  std::unique_ptr<AttackEngine> engine;
};

DeskRun& desk_run() {
  static DeskRun run = [] {
    DeskRun r;
    r.toy = desk::make_toy_corpus({.size = 2000, .seed = 2024});
    r.parts = split(r.toy.dataset, 0.2, 7);
    ModelSpec spec;
    spec.arch = Arch::kTransformer;
    spec.arch_params = {{"d_model", 32}, {"heads", 2}, {"layers", 1}, {"ff", 64}};
    spec.label_space = r.toy.dataset.label_space;
    spec.seed = 1;
    TrainConfig cfg;
    cfg.epochs = 3;
    r.victim = train_victim(spec, r.parts.train, r.parts.test, cfg);
    r.oracles = desk::DeskOracles::train(r.parts.train, r.toy.lexicon, {});
    r.engine = std::make_unique<AttackEngine>(AttackConfig{});
    const auto model = std::make_shared<const VictimModel>(r.victim->model);
    const auto sample = sample_examples(r.parts.test, 100, 21);
    r.log = run_attacks(sample, *r.engine,
                        [&] { return r.oracles->session(std::make_unique<ModelClassifier>(model)); },
                        1);
    return r;
  }();
  return run;
}

Verdict desk_smoke() {
  auto& r = desk_run();
  const MetricsReport m = compute_metrics(r.log);
  return {m.att_sr > 0.0 && m.acc_aa < m.acc_ba,
          fmt::format("eval acc {:.3f}, 100 attacks: att_sr {:.2f}, acc_ba {:.2f}, acc_aa {:.2f}",
                      r.victim->report.eval_accuracy, m.att_sr, m.acc_ba, m.acc_aa)};
}

Verdict desk_defense() {
  auto& r = desk_run();
  TrainConfig cfg;
  cfg.epochs = 3;
  const auto sessions = [&](std::shared_ptr<const VictimModel> m) {
    return r.oracles->session(std::make_unique<ModelClassifier>(std::move(m)));
  };
  const auto out = run_defense(r.victim->model, r.parts.train, r.parts.test, r.log, *r.engine,
                               sessions, cfg);
  const auto& d = out.report;
  return {d.n_augmented > 0 && d.replay_after > d.replay_before,
          fmt::format("{} adversarial examples, replay {:.2f} -> {:.2f}; re-attack acc_aa "
                      "{:.2f} -> {:.2f}",
                      d.n_augmented, d.replay_before, d.replay_after, d.acc_aa,
                      d.adversarial_training_acc)};
}

}  // namespace

int main(int argc, char** argv) {
  bool skip_desk = false;
  for (int i = 1; i < argc; ++i)
    if (std::strcmp(argv[i], "--skip-desk") == 0) skip_desk = true;

  std::vector<Criterion> criteria = {
      {"metric arithmetic", 1.0, metric_arithmetic},
      {"transfer arithmetic", 1.0, transfer_arithmetic},
      {"defense arithmetic", 1.0, defense_arithmetic},
      {"mock end-to-end attack", 30.0, mock_end_to_end},
      {"brute-force equivalence", 60.0, brute_force},
      {"importance ranking oracle", 1.0, importance_oracle},
      {"human-eval aggregation", 1.0, human_eval},
  };
  if (!skip_desk) {
    criteria.push_back({"desk-scale real-model smoke", 1800.0, desk_smoke});
    criteria.push_back({"desk-scale defense replay", 1800.0, desk_defense});
  }

  int failed = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = c.run();
    } catch (const std::exception& e) {
      v = {false, std::string("threw: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (secs > c.budget_s) {
      v.pass = false;
      v.detail += fmt::format("; over budget {:.0f} s", c.budget_s);
    }
    failed += !v.pass;
    std::cout << fmt::format("{} {:<30} {:>8.2f} s  {}\n", v.pass ? "PASS" : "FAIL", c.name, secs,
                             v.detail);
  }
  if (skip_desk) std::cout << "SKIP desk-scale criteria (--skip-desk)\n";
  std::cout << fmt::format("{} of {} criteria passed\n", criteria.size() - failed,
                           criteria.size());
  return failed ? 1 : 0;
}
