#include "advtext/oracles/mock.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "advtext/core/error.hpp"
#include "advtext/core/text.hpp"

namespace advtext::mock {

KeywordClassifier::KeywordClassifier(std::size_t num_classes,
                                     std::map<std::string, LabelIndex> keywords,
                                     double strength)
    : num_classes_(num_classes), strength_(strength) {
  if (num_classes_ == 0) throw InvalidArgument("keyword classifier needs classes");
  for (auto& [word, label] : keywords) {
    if (label >= num_classes_) throw InvalidArgument("keyword label out of range");
    keywords_.emplace(text::normalize(word), label);
  }
}

Prediction KeywordClassifier::classify(std::string_view input) {
  std::vector<double> hits(num_classes_, 0.0);
  bool any = false;
  for (const auto& w : text::word_runs(input)) {
    auto it = keywords_.find(text::normalize(w));
    if (it != keywords_.end()) {
      hits[it->second] += 1.0;
      any = true;
    }
  }
  if (!any) return Prediction::uniform(num_classes_);
  for (auto& h : hits) h *= strength_;
  return Prediction::from_logits(hits);
}

ThesaurusMlm::ThesaurusMlm(std::map<std::string, std::vector<std::string>> entries) {
  for (auto& [word, syns] : entries) entries_.emplace(text::normalize(word), std::move(syns));
}

std::vector<SynonymCandidate> ThesaurusMlm::mask_fill(const MaskedQuery& query) {
  query.validate();
  std::vector<SynonymCandidate> out;
  auto it = entries_.find(text::normalize(query.tokens[query.mask_position]));
  if (it == entries_.end()) return out;
  for (const auto& s : it->second) {
    if (out.size() >= query.top_k) break;
    const std::size_t rank = out.size();
    out.push_back({s, rank, 1.0 / static_cast<double>(rank + 1)});
  }
  return out;
}

LexiconTagger::LexiconTagger(std::map<std::string, std::string> lexicon) {
  for (auto& [word, tag] : lexicon) lexicon_.emplace(text::normalize(word), std::move(tag));
}

PosTagSequence LexiconTagger::pos_tag(const std::vector<std::string>& tokens) {
  PosTagSequence out;
  out.tags.reserve(tokens.size());
  for (const auto& t : tokens) {
    auto it = lexicon_.find(text::normalize(t));
    out.tags.push_back(it == lexicon_.end() ? "X" : it->second);
  }
  return out;
}

SimilarityScore OverlapSimilarity::similarity(std::string_view a, std::string_view b) {
  const auto ta = text::split_whitespace(a);
  const auto tb = text::split_whitespace(b);
  const std::set<std::string> sa(ta.begin(), ta.end());
  const std::set<std::string> sb(tb.begin(), tb.end());
  if (sa.empty() && sb.empty()) return {1.0};
  std::size_t inter = 0;
  for (const auto& t : sa) inter += sb.count(t);
  const std::size_t uni = sa.size() + sb.size() - inter;
  return {static_cast<double>(inter) / static_cast<double>(uni)};
}

LookupClassifier::LookupClassifier(std::size_t num_classes,
                                   std::map<std::string, LabelIndex> table,
                                   LabelIndex fallback, double confidence)
    : num_classes_(num_classes),
      table_(table.begin(), table.end()),
      fallback_(fallback),
      confidence_(confidence) {
  if (num_classes_ < 2) throw InvalidArgument("lookup classifier needs >= 2 classes");
  if (!(confidence_ > 1.0 / num_classes_ && confidence_ <= 1.0))
    throw InvalidArgument("confidence must exceed the uniform share");
}

Prediction LookupClassifier::classify(std::string_view input) {
  auto it = table_.find(input);
  const LabelIndex label = it == table_.end() ? fallback_ : it->second;
  std::vector<double> scores(num_classes_,
                             (1.0 - confidence_) / static_cast<double>(num_classes_ - 1));
  scores[label] = confidence_;
  return Prediction(std::move(scores));
}

}  // namespace advtext::mock
