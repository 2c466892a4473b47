#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "advtext/core/types.hpp"

namespace advtext::humaneval {

enum class Group { kLinguist, kNonLinguist };
std::string_view to_string(Group g);
Group parse_group(std::string_view s);

enum class Origin { kOriginal, kAdversarial };
std::string_view to_string(Origin o);
Origin parse_origin(std::string_view s);

struct Evaluator {
  std::string id;
  Group group = Group::kLinguist;
  std::string display_alias;
};

struct GrammarTask {
  std::string task_id;
  std::string text;
  Origin hidden_origin = Origin::kOriginal;  // never sent to a rating client
  std::string source_model;
};

struct SemanticTask {
  std::string task_id;
  std::string original_text;  // shown as the reference
  std::string adversarial_text;
  std::string source_model;
};

struct Study {
  std::string study_id;
  std::uint64_t seed = 0;
  std::vector<GrammarTask> grammar;
  std::vector<SemanticTask> semantic;
};

struct RatingRecord {
  std::string task_id;
  std::string evaluator_id;
  int value = 0;
  std::string timestamp;  // ISO-8601 UTC, set by the store when empty
};

// Five anchor labels, value 1 first.
const std::array<std::string, 5>& grammar_anchors();
const std::array<std::string, 5>& semantic_anchors();

// Client-facing task views. Grammar views carry no origin field.
nlohmann::ordered_json client_view(const GrammarTask& t);
nlohmann::ordered_json client_view(const SemanticTask& t);

// Samples per_model successes from each model's log (optionally only from
// the allowed dataset tags), then emits one grammar task per original and
// per adversarial text, shuffled, and one semantic task per pair. Task ids
// are random and say nothing about origin. Throws StudyError when a log has
// too few successes.
Study build_study(const std::map<std::string, std::vector<AttackLogEntry>>& logs_by_model,
                  std::size_t per_model, std::uint64_t seed, std::string study_id = "study",
                  const std::vector<std::string>& dataset_allowlist = {});

// Scores for one (group, source_model) cell. Headline values average the
// per-evaluator scores; the pooled_* values pool all ratings of the group.
struct CellScore {
  std::string group;  // "linguist", "non_linguist" or "overall"
  std::string source_model;
  double grammatical_ratio = 0.0;
  double semantic_percentage = 0.0;
  double pooled_grammatical_ratio = 0.0;
  double pooled_semantic_percentage = 0.0;
  std::size_t n_evaluators = 0;
  std::size_t n_ratings = 0;
};

struct StudyReport {
  std::string study_id;
  std::vector<CellScore> cells;
  // Count of (task, evaluator) pairs without a rating, per evaluator.
  std::map<std::string, std::size_t> missing;
  bool complete = true;

  const CellScore* find(std::string_view group, std::string_view model) const;
  nlohmann::ordered_json to_json() const;
};

// Mean adversarial grammar rating over mean original grammar rating, x100;
// semantic percentage is mean semantic rating / 5, x100. "overall" rows are
// the mean of the group rows. Ratios are not clamped. Throws StudyError when
// an evaluator rated adversarial grammar tasks of a model but no original.
StudyReport aggregate(const std::vector<RatingRecord>& ratings, const Study& study,
                      const std::vector<Evaluator>& evaluators);

}  // namespace advtext::humaneval
