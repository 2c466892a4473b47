#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace advtext {

using LabelIndex = std::size_t;

// Ordered, unique class names. Label indices are positions in this list.
class LabelSpace {
 public:
  LabelSpace() = default;
  explicit LabelSpace(std::vector<std::string> class_names);

  std::size_t size() const { return names_.size(); }
  const std::vector<std::string>& class_names() const { return names_; }
  const std::string& name(LabelIndex i) const { return names_.at(i); }
  bool contains(LabelIndex i) const { return i < names_.size(); }
  std::optional<LabelIndex> index_of(std::string_view name) const;

  friend bool operator==(const LabelSpace&, const LabelSpace&) = default;

 private:
  std::vector<std::string> names_;
};

struct Example {
  std::string id;
  std::string text;
  LabelIndex gold_label = 0;
  std::string dataset_tag;

  friend bool operator==(const Example&, const Example&) = default;
};

struct LabeledDataset {
  std::string name;
  LabelSpace label_space;
  std::vector<Example> examples;
  std::uint64_t split_seed = 0;

  std::size_t size() const { return examples.size(); }
  bool empty() const { return examples.empty(); }
  // Throws DataError when a label is out of range or an id repeats.
  void validate() const;
  std::vector<std::size_t> class_counts() const;

  friend bool operator==(const LabeledDataset&, const LabeledDataset&) = default;
};

// Soft-label classifier output.
class Prediction {
 public:
  Prediction() = default;
  // Validates: scores in [0,1] summing to 1 within 1e-6. Label is the argmax
  // with lowest-index tie-break.
  explicit Prediction(std::vector<double> scores);

  static Prediction uniform(std::size_t num_classes);
  // Softmax over raw logits.
  static Prediction from_logits(const std::vector<double>& logits);

  LabelIndex label() const { return label_; }
  const std::vector<double>& scores() const { return scores_; }
  double score(LabelIndex i) const { return scores_.at(i); }
  std::size_t num_classes() const { return scores_.size(); }

  friend bool operator==(const Prediction&, const Prediction&) = default;

 private:
  LabelIndex label_ = 0;
  std::vector<double> scores_;
};

struct CandidateSubstitution {
  std::size_t position = 0;  // index into the cleaned content-word list
  std::string original_word;
  std::string synonym;
  std::size_t mlm_rank = 0;
  std::string pos_original;
  std::string pos_candidate;
  double similarity = 0.0;
  double victim_score_delta = 0.0;  // drop in original-label probability
  bool flipped = false;

  friend bool operator==(const CandidateSubstitution&,
                         const CandidateSubstitution&) = default;
};

enum class AttackStatus { kSuccess, kFailed, kSkippedMisclassified, kError };

std::string_view to_string(AttackStatus status);
AttackStatus parse_attack_status(std::string_view s);

struct AttackLogEntry {
  std::string example_id;
  std::string model_id;
  std::string dataset_tag;
  LabelIndex gold_label = 0;
  std::string original_text;
  Prediction original_prediction;
  std::optional<std::string> adversarial_text;
  std::optional<Prediction> adversarial_prediction;
  AttackStatus status = AttackStatus::kFailed;
  std::vector<CandidateSubstitution> substitutions;
  std::size_t query_count = 0;
  std::string config_hash;
  std::string note;

  // Checks the record-level invariants; throws InvalidArgument on violation.
  void validate() const;

  friend bool operator==(const AttackLogEntry&, const AttackLogEntry&) = default;
};

}  // namespace advtext
