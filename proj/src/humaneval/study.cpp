#include "advtext/humaneval/study.hpp"

#include <algorithm>
#include <set>

#include <fmt/format.h>

#include "advtext/core/error.hpp"
#include "advtext/core/rng.hpp"

namespace advtext::humaneval {

std::string_view to_string(Group g) {
  return g == Group::kLinguist ? "linguist" : "non_linguist";
}

Group parse_group(std::string_view s) {
  if (s == "linguist") return Group::kLinguist;
  if (s == "non_linguist" || s == "non-linguist") return Group::kNonLinguist;
  throw InvalidArgument("unknown evaluator group: " + std::string(s));
}

std::string_view to_string(Origin o) {
  return o == Origin::kOriginal ? "original" : "adversarial";
}

Origin parse_origin(std::string_view s) {
  if (s == "original") return Origin::kOriginal;
  if (s == "adversarial") return Origin::kAdversarial;
  throw InvalidArgument("unknown origin: " + std::string(s));
}

const std::array<std::string, 5>& grammar_anchors() {
  static const std::array<std::string, 5> a = {"strongly incorrect", "incorrect",
                                               "correct to some extent", "correct",
                                               "strongly correct"};
  return a;
}

const std::array<std::string, 5>& semantic_anchors() {
  static const std::array<std::string, 5> a = {"strongly dissimilar", "dissimilar",
                                               "similar to some extent", "similar",
                                               "strongly similar"};
  return a;
}

nlohmann::ordered_json client_view(const GrammarTask& t) {
  nlohmann::ordered_json j;
  j["task_id"] = t.task_id;
  j["kind"] = "grammar";
  j["text"] = t.text;
  j["anchor_labels"] = grammar_anchors();
  return j;
}

nlohmann::ordered_json client_view(const SemanticTask& t) {
  nlohmann::ordered_json j;
  j["task_id"] = t.task_id;
  j["kind"] = "semantic";
  j["reference"] = t.original_text;
  j["candidate"] = t.adversarial_text;
  j["anchor_labels"] = semantic_anchors();
  return j;
}

Study build_study(const std::map<std::string, std::vector<AttackLogEntry>>& logs_by_model,
                  std::size_t per_model, std::uint64_t seed, std::string study_id,
                  const std::vector<std::string>& dataset_allowlist) {
  Study study;
  study.study_id = std::move(study_id);
  study.seed = seed;
  const std::set<std::string> allowed(dataset_allowlist.begin(), dataset_allowlist.end());

  Rng id_rng(derive_seed(seed, 0));
  std::set<std::string> used;
  auto fresh_id = [&] {
    for (;;) {
      std::string id = fmt::format("t{:016x}", id_rng.next_u64());
      if (used.insert(id).second) return id;
    }
  };

  std::uint64_t stream = 1;
  for (const auto& [model, log] : logs_by_model) {
    std::vector<const AttackLogEntry*> pool;
    for (const auto& e : log) {
      if (e.status != AttackStatus::kSuccess || !e.adversarial_text) continue;
      if (!allowed.empty() && !allowed.count(e.dataset_tag)) continue;
      pool.push_back(&e);
    }
    if (pool.size() < per_model)
      throw StudyError(fmt::format("model {} has {} eligible successes, {} needed", model,
                                   pool.size(), per_model));
    std::stable_sort(pool.begin(), pool.end(),
                     [](auto a, auto b) { return a->example_id < b->example_id; });
    Rng rng(derive_seed(seed, stream++));
    for (std::size_t i = 0; i < per_model; ++i) {
      const std::size_t j = i + static_cast<std::size_t>(rng.below(pool.size() - i));
      std::swap(pool[i], pool[j]);
      const AttackLogEntry& e = *pool[i];
      study.grammar.push_back({"", e.original_text, Origin::kOriginal, model});
      study.grammar.push_back({"", *e.adversarial_text, Origin::kAdversarial, model});
      study.semantic.push_back({"", e.original_text, *e.adversarial_text, model});
    }
  }
  Rng order(derive_seed(seed, 0xFFFF));
  order.shuffle(std::span<GrammarTask>(study.grammar));
  order.shuffle(std::span<SemanticTask>(study.semantic));
  for (auto& t : study.grammar) t.task_id = fresh_id();
  for (auto& t : study.semantic) t.task_id = fresh_id();
  return study;
}

const CellScore* StudyReport::find(std::string_view group, std::string_view model) const {
  for (const auto& c : cells)
    if (c.group == group && c.source_model == model) return &c;
  return nullptr;
}

nlohmann::ordered_json StudyReport::to_json() const {
  nlohmann::ordered_json j;
  j["study_id"] = study_id;
  j["complete"] = complete;
  j["cells"] = nlohmann::ordered_json::array();
  for (const auto& c : cells) {
    nlohmann::ordered_json r;
    r["group"] = c.group;
    r["source_model"] = c.source_model;
    r["grammatical_ratio"] = c.grammatical_ratio;
    r["semantic_percentage"] = c.semantic_percentage;
    r["pooled_grammatical_ratio"] = c.pooled_grammatical_ratio;
    r["pooled_semantic_percentage"] = c.pooled_semantic_percentage;
    r["n_evaluators"] = c.n_evaluators;
    r["n_ratings"] = c.n_ratings;
    j["cells"].push_back(r);
  }
  j["missing"] = missing;
  return j;
}

namespace {

struct Acc {
  double sum = 0.0;
  std::size_t n = 0;
  void add(double v) {
    sum += v;
    ++n;
  }
  double mean() const { return sum / static_cast<double>(n); }
};

struct Tally {
  Acc original, adversarial, semantic;
  std::size_t count() const { return original.n + adversarial.n + semantic.n; }
};

}  // namespace

StudyReport aggregate(const std::vector<RatingRecord>& ratings, const Study& study,
                      const std::vector<Evaluator>& evaluators) {
  std::map<std::string, const GrammarTask*> grammar;
  std::map<std::string, const SemanticTask*> semantic;
  std::set<std::string> models;
  for (const auto& t : study.grammar) {
    grammar[t.task_id] = &t;
    models.insert(t.source_model);
  }
  for (const auto& t : study.semantic) {
    semantic[t.task_id] = &t;
    models.insert(t.source_model);
  }

  // tallies[evaluator][model]
  std::map<std::string, std::map<std::string, Tally>> tallies;
  std::map<std::string, std::set<std::string>> rated;
  for (const auto& r : ratings) {
    if (r.value < 1 || r.value > 5) throw StudyError("rating outside 1..5");
    if (!rated[r.evaluator_id].insert(r.task_id).second) continue;
    if (auto g = grammar.find(r.task_id); g != grammar.end()) {
      Tally& t = tallies[r.evaluator_id][g->second->source_model];
      (g->second->hidden_origin == Origin::kOriginal ? t.original : t.adversarial).add(r.value);
    } else if (auto s = semantic.find(r.task_id); s != semantic.end()) {
      tallies[r.evaluator_id][s->second->source_model].semantic.add(r.value);
    }
  }

  StudyReport report;
  report.study_id = study.study_id;
  const std::size_t total = study.grammar.size() + study.semantic.size();
  for (const auto& ev : evaluators) {
    std::size_t have = 0;
    for (const auto& id : rated[ev.id]) have += grammar.count(id) + semantic.count(id);
    report.missing[ev.id] = total - have;
    if (have < total) report.complete = false;
  }

  for (const auto& model : models) {
    std::vector<CellScore> group_cells;
    for (Group g : {Group::kLinguist, Group::kNonLinguist}) {
      CellScore cell;
      cell.group = std::string(to_string(g));
      cell.source_model = model;
      Acc ratio, sem;
      Tally pooled;
      for (const auto& ev : evaluators) {
        if (ev.group != g) continue;
        auto it = tallies[ev.id].find(model);
        if (it == tallies[ev.id].end() || it->second.count() == 0) continue;
        const Tally& t = it->second;
        ++cell.n_evaluators;
        cell.n_ratings += t.count();
        if (t.adversarial.n) {
          if (t.original.n == 0)
            throw StudyError("evaluator " + ev.id + " has no original ratings for " + model);
          ratio.add(100.0 * t.adversarial.mean() / t.original.mean());
        }
        if (t.semantic.n) sem.add(100.0 * t.semantic.mean() / 5.0);
        pooled.original.sum += t.original.sum;
        pooled.original.n += t.original.n;
        pooled.adversarial.sum += t.adversarial.sum;
        pooled.adversarial.n += t.adversarial.n;
        pooled.semantic.sum += t.semantic.sum;
        pooled.semantic.n += t.semantic.n;
      }
      if (cell.n_evaluators == 0) continue;
      if (ratio.n) {
        cell.grammatical_ratio = ratio.mean();
        cell.pooled_grammatical_ratio =
            100.0 * pooled.adversarial.mean() / pooled.original.mean();
      }
      if (sem.n) {
        cell.semantic_percentage = sem.mean();
        cell.pooled_semantic_percentage = 100.0 * pooled.semantic.mean() / 5.0;
      }
      group_cells.push_back(cell);
    }
    if (group_cells.empty()) continue;
    CellScore overall;
    overall.group = "overall";
    overall.source_model = model;
    const double k = static_cast<double>(group_cells.size());
    for (const auto& c : group_cells) {
      overall.grammatical_ratio += c.grammatical_ratio / k;
      overall.semantic_percentage += c.semantic_percentage / k;
      overall.pooled_grammatical_ratio += c.pooled_grammatical_ratio / k;
      overall.pooled_semantic_percentage += c.pooled_semantic_percentage / k;
      overall.n_evaluators += c.n_evaluators;
      overall.n_ratings += c.n_ratings;
    }
    for (auto& c : group_cells) report.cells.push_back(std::move(c));
    report.cells.push_back(overall);
  }
  return report;
}

}  // namespace advtext::humaneval
