#pragma once

#include <cstddef>
#include <filesystem>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "advtext/core/error.hpp"
#include "advtext/humaneval/study.hpp"

struct sqlite3;

namespace advtext::humaneval {

class NotFound : public StudyError {
 public:
  using StudyError::StudyError;
};
class Conflict : public StudyError {
 public:
  using StudyError::StudyError;
};
class OutOfRange : public StudyError {
 public:
  using StudyError::StudyError;
};

// Single-file SQLite store. Schema:
//   studies(study_id PK, seed, created_at)
//   tasks(task_id PK, study_id FK, kind 'grammar'|'semantic', position,
//         source_model, text, reference_text, hidden_origin)
//   evaluators(evaluator_id PK, grp 'linguist'|'non_linguist', display_alias,
//              created_at)
//   ratings(rating_id PK, task_id FK, evaluator_id FK, value 1..5,
//           created_at, UNIQUE(task_id, evaluator_id))
// Triggers reject UPDATE and DELETE on ratings, so the table is append-only.
class StudyStore {
 public:
  explicit StudyStore(const std::filesystem::path& path);
  ~StudyStore();
  StudyStore(const StudyStore&) = delete;
  StudyStore& operator=(const StudyStore&) = delete;

  void save_study(const Study& study);
  Study load_study(const std::string& study_id) const;
  std::vector<std::string> study_ids() const;
  bool has_study(const std::string& study_id) const;

  // Idempotent for an identical record; a changed group throws Conflict.
  void register_evaluator(const Evaluator& evaluator);
  std::optional<Evaluator> evaluator(const std::string& id) const;
  std::vector<Evaluator> evaluators() const;

  enum class SubmitResult { kStored, kDuplicate };
  // Throws OutOfRange for a value outside 1..5, NotFound for an unknown task
  // or evaluator, and Conflict for a second rating with a different value.
  SubmitResult submit_rating(RatingRecord record);

  std::vector<RatingRecord> ratings(const std::string& study_id) const;
  // Unrated tasks of the study for this evaluator, grammar tasks first, in
  // stored order. limit 0 means all.
  std::vector<nlohmann::ordered_json> next_tasks(const std::string& study_id,
                                                 const std::string& evaluator_id,
                                                 std::size_t limit = 0) const;
  std::size_t task_count(const std::string& study_id) const;
  std::size_t rated_count(const std::string& study_id, const std::string& evaluator_id) const;

 private:
  void exec(const char* sql) const;
  sqlite3* db_ = nullptr;
  mutable std::mutex mu_;
};

std::string utc_timestamp();

}  // namespace advtext::humaneval
