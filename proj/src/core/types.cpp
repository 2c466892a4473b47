#include "advtext/core/types.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <unordered_set>

#include "advtext/core/error.hpp"

namespace advtext {

LabelSpace::LabelSpace(std::vector<std::string> class_names)
    : names_(std::move(class_names)) {
  if (names_.empty()) throw InvalidArgument("label space must not be empty");
  std::set<std::string> seen;
  for (const auto& n : names_) {
    if (!seen.insert(n).second)
      throw InvalidArgument("duplicate class name '" + n + "'");
  }
}

std::optional<LabelIndex> LabelSpace::index_of(std::string_view name) const {
  for (std::size_t i = 0; i < names_.size(); ++i)
    if (names_[i] == name) return i;
  return std::nullopt;
}

void LabeledDataset::validate() const {
  std::unordered_set<std::string> ids;
  for (std::size_t i = 0; i < examples.size(); ++i) {
    const auto& ex = examples[i];
    if (!label_space.contains(ex.gold_label))
      throw DataError("label index " + std::to_string(ex.gold_label) +
                          " outside label space of size " +
                          std::to_string(label_space.size()),
                      i + 1);
    if (!ids.insert(ex.id).second)
      throw DataError("duplicate example id '" + ex.id + "'", i + 1);
  }
}

std::vector<std::size_t> LabeledDataset::class_counts() const {
  std::vector<std::size_t> counts(label_space.size(), 0);
  for (const auto& ex : examples) ++counts.at(ex.gold_label);
  return counts;
}

Prediction::Prediction(std::vector<double> scores) : scores_(std::move(scores)) {
  if (scores_.empty()) throw InvalidArgument("prediction needs at least one score");
  double sum = 0.0;
  for (double s : scores_) {
    if (!(s >= 0.0 && s <= 1.0))
      throw InvalidArgument("prediction score outside [0,1]");
    sum += s;
  }
  if (std::abs(sum - 1.0) > 1e-6)
    throw InvalidArgument("prediction scores sum to " + std::to_string(sum));
  label_ = static_cast<LabelIndex>(
      std::max_element(scores_.begin(), scores_.end()) - scores_.begin());
}

Prediction Prediction::uniform(std::size_t num_classes) {
  if (num_classes == 0) throw InvalidArgument("uniform over zero classes");
  return Prediction(std::vector<double>(num_classes, 1.0 / num_classes));
}

Prediction Prediction::from_logits(const std::vector<double>& logits) {
  if (logits.empty()) throw InvalidArgument("empty logits");
  const double mx = *std::max_element(logits.begin(), logits.end());
  std::vector<double> p(logits.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    p[i] = std::exp(logits[i] - mx);
    sum += p[i];
  }
  for (auto& v : p) v /= sum;
  return Prediction(std::move(p));
}

std::string_view to_string(AttackStatus status) {
  switch (status) {
    case AttackStatus::kSuccess: return "success";
    case AttackStatus::kFailed: return "failed";
    case AttackStatus::kSkippedMisclassified: return "skipped_misclassified";
    case AttackStatus::kError: return "error";
  }
  return "error";
}

AttackStatus parse_attack_status(std::string_view s) {
  if (s == "success") return AttackStatus::kSuccess;
  if (s == "failed") return AttackStatus::kFailed;
  if (s == "skipped_misclassified") return AttackStatus::kSkippedMisclassified;
  if (s == "error") return AttackStatus::kError;
  throw InvalidArgument("unknown attack status '" + std::string(s) + "'");
}

void AttackLogEntry::validate() const {
  if (query_count < 1) throw InvalidArgument(example_id + ": query_count must be >= 1");
  if (status == AttackStatus::kSuccess) {
    if (!adversarial_text || !adversarial_prediction)
      throw InvalidArgument(example_id + ": success without adversarial example");
    if (adversarial_prediction->label() == original_prediction.label())
      throw InvalidArgument(example_id + ": success but label did not flip");
  }
  if (adversarial_text.has_value() != adversarial_prediction.has_value())
    throw InvalidArgument(example_id + ": adversarial text/prediction mismatch");
}

}  // namespace advtext
