#include "advtext/attack/audit.hpp"

#include <set>

namespace advtext {

namespace {

// Text with every word token removed, used to compare the non-word
// skeleton of two sentences.
std::string skeleton(std::string_view input, const CleanedText& cleaned) {
  std::string out;
  std::size_t pos = 0;
  for (const auto& t : cleaned.tokens) {
    out.append(input.substr(pos, t.begin - pos));
    out.push_back('\x1f');
    pos = t.end;
  }
  out.append(input.substr(pos));
  return out;
}

}  // namespace

std::vector<std::string> audit_success(const AttackLogEntry& entry, const OracleSet& oracles,
                                       const AttackConfig& config,
                                       const StopwordList& stopwords) {
  std::vector<std::string> problems;
  if (entry.status != AttackStatus::kSuccess) {
    problems.push_back("entry is not a success");
    return problems;
  }
  if (!entry.adversarial_text) {
    problems.push_back("success without adversarial text");
    return problems;
  }
  const std::string& orig = entry.original_text;
  const std::string& adv = *entry.adversarial_text;

  const Prediction p_orig = oracles.classifier.classify(orig);
  const Prediction p_adv = oracles.classifier.classify(adv);
  if (p_orig.label() == p_adv.label()) problems.push_back("label does not flip on re-query");

  const double sim = oracles.similarity.similarity(orig, adv).value;
  if (sim < config.sim_threshold)
    problems.push_back("similarity " + std::to_string(sim) + " below threshold");

  const CleanedText c_orig = clean(orig, stopwords);
  const CleanedText c_adv = clean(adv, stopwords);
  if (c_orig.tokens.size() != c_adv.tokens.size()) {
    problems.push_back("word count differs between original and adversarial text");
    return problems;
  }
  if (skeleton(orig, c_orig) != skeleton(adv, c_adv))
    problems.push_back("non-word text differs");

  std::set<std::size_t> swapped;
  for (const auto& s : entry.substitutions) {
    if (s.position >= c_orig.size()) {
      problems.push_back("substitution position out of range");
      continue;
    }
    const std::size_t idx = c_orig.content[s.position];
    swapped.insert(idx);
    if (c_orig.tokens[idx].text != s.original_word)
      problems.push_back("logged original word does not match text at position " +
                         std::to_string(s.position));
    if (c_adv.tokens[idx].text != s.synonym)
      problems.push_back("logged synonym does not match text at position " +
                         std::to_string(s.position));
  }
  for (std::size_t i = 0; i < c_orig.tokens.size(); ++i) {
    if (!swapped.count(i) && c_orig.tokens[i].text != c_adv.tokens[i].text)
      problems.push_back("unlogged change at word " + std::to_string(i));
  }

  const auto tags_orig = oracles.tagger.pos_tag(c_orig.token_texts()).tags;
  const auto tags_adv = oracles.tagger.pos_tag(c_adv.token_texts()).tags;
  for (std::size_t idx : swapped) {
    if (coarse_pos(tags_orig.at(idx)) != coarse_pos(tags_adv.at(idx)))
      problems.push_back("POS mismatch at word " + std::to_string(idx));
  }
  return problems;
}

}  // namespace advtext
