#include "advtext/oracles/oracles.hpp"

#include <algorithm>
#include <cctype>

#include "advtext/core/error.hpp"
#include "advtext/core/text.hpp"

namespace advtext {

void MaskedQuery::validate() const {
  if (top_k < 1) throw InvalidArgument("top_k must be >= 1");
  if (mask_position >= tokens.size())
    throw InvalidArgument("mask position " + std::to_string(mask_position) +
                          " out of range for " + std::to_string(tokens.size()) +
                          " tokens");
}

std::vector<SynonymCandidate> keep_whole_words(std::vector<SynonymCandidate> raw,
                                               std::string_view mask_token,
                                               std::size_t top_k) {
  std::vector<SynonymCandidate> out;
  for (auto& c : raw) {
    if (out.size() >= top_k) break;
    if (c.token == mask_token) continue;
    if (c.token.rfind("##", 0) == 0) continue;
    if (!text::is_whole_word(c.token)) continue;
    c.mlm_rank = out.size();
    out.push_back(std::move(c));
  }
  return out;
}

std::string coarse_pos(std::string_view tag) {
  std::string t;
  for (char c : tag) t.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
  const auto starts = [&](std::string_view p) { return t.rfind(p, 0) == 0; };
  if (t == "NOUN" || t == "PROPN" || starts("NN") || starts("NOUN_")) return "NOUN";
  if (t == "VERB" || t == "AUX" || starts("VB") || starts("VERB_")) return "VERB";
  if (t == "ADJ" || starts("JJ") || starts("ADJ_")) return "ADJ";
  if (t == "ADV" || starts("RB") || starts("ADV_") || t == "WRB") return "ADV";
  return "OTHER";
}

}  // namespace advtext
