#include "micro.hpp"

#include <algorithm>
#include <random>
#include <set>
#include <sstream>

#include "advtext/attack/clean.hpp"
#include "advtext/oracles/mock.hpp"

namespace fixtures {

using namespace advtext;

namespace {

std::string join(const std::vector<std::string>& w) {
  std::string s;
  for (const auto& x : w) s += (s.empty() ? "" : " ") + x;
  return s;
}

std::set<std::string> token_set(const std::string& s) {
  std::istringstream in(s);
  std::set<std::string> out;
  for (std::string t; in >> t;) out.insert(t);
  return out;
}

std::string coarse(const std::map<std::string, std::string>& lexicon, const std::string& w) {
  auto it = lexicon.find(w);
  return it == lexicon.end() ? "OTHER" : it->second;
}

}  // namespace

double jaccard(const std::string& a, const std::string& b) {
  const auto sa = token_set(a), sb = token_set(b);
  std::size_t inter = 0;
  for (const auto& t : sa) inter += sb.count(t);
  const std::size_t uni = sa.size() + sb.size() - inter;
  return uni == 0 ? 1.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

Example MicroInstance::example() const {
  mock::KeywordClassifier clf(3, keywords);
  return {"micro", text, clf.classify(text).label(), "micro"};
}

OracleSession MicroInstance::session() const {
  OracleSession s;
  s.classifier = std::make_unique<mock::KeywordClassifier>(3, keywords);
  s.mlm = std::make_unique<mock::ThesaurusMlm>(thesaurus);
  s.tagger = std::make_unique<mock::LexiconTagger>(lexicon);
  s.similarity = std::make_unique<mock::OverlapSimilarity>();
  return s;
}

AttackConfig MicroInstance::config() const {
  AttackConfig c;
  c.sim_threshold = threshold;
  return c;
}

MicroInstance micro_instance(std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  auto pick = [&](std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(gen); };
  static const char* consonants = "bdfgklmnprstvz";
  static const char* vowels = "aeiou";
  const StopwordList stop = StopwordList::builtin();
  std::set<std::string> used;
  auto fresh_word = [&] {
    for (;;) {
      std::string w;
      const std::size_t syllables = 2 + pick(2);
      for (std::size_t i = 0; i < syllables; ++i) {
        w += consonants[pick(14)];
        w += vowels[pick(5)];
      }
      if (!stop.contains(w) && used.insert(w).second) return w;
    }
  };
  static const char* tags[] = {"NOUN", "VERB", "ADJ"};

  MicroInstance m;
  m.threshold = std::vector<double>{0.3, 0.5, 0.6}[pick(3)];
  const std::size_t n = 1 + pick(6);
  for (std::size_t i = 0; i < n; ++i) {
    m.words.push_back(fresh_word());
    m.lexicon[m.words.back()] = tags[pick(3)];
    if (pick(3) == 0) m.keywords[m.words.back()] = pick(3);
  }
  for (const auto& w : m.words) {
    const std::size_t k = pick(4);
    auto& list = m.thesaurus[w];
    for (std::size_t j = 0; j < k; ++j) {
      const std::string c = fresh_word();
      list.push_back(c);
      m.lexicon[c] = pick(3) == 0 ? tags[pick(3)] : m.lexicon[w];
      if (pick(2) == 0) m.keywords[c] = pick(3);
    }
  }
  m.text = join(m.words);
  return m;
}

std::optional<std::string> brute_force_top_flip(const MicroInstance& m) {
  mock::KeywordClassifier clf(3, m.keywords);
  const Prediction orig = clf.classify(m.text);
  const LabelIndex y = orig.label();
  std::size_t top = 0;
  double best = -1e300;
  for (std::size_t i = 0; i < m.words.size(); ++i) {
    std::vector<std::string> rest = m.words;
    rest.erase(rest.begin() + static_cast<std::ptrdiff_t>(i));
    const double score = orig.score(y) - clf.classify(join(rest)).score(y);
    if (score > best) {
      best = score;
      top = i;
    }
  }
  const std::string& word = m.words[top];
  auto it = m.thesaurus.find(word);
  if (it == m.thesaurus.end()) return std::nullopt;
  for (const auto& cand : it->second) {
    if (cand == word) continue;
    if (coarse(m.lexicon, cand) != coarse(m.lexicon, word)) continue;
    std::vector<std::string> swapped = m.words;
    swapped[top] = cand;
    const std::string text = join(swapped);
    if (jaccard(m.text, text) < m.threshold) continue;
    if (clf.classify(text).label() != y) return cand;
  }
  return std::nullopt;
}

}  // namespace fixtures
