#include "advtext/attack/clean.hpp"

#include <fstream>

#include "advtext/core/error.hpp"
#include "advtext/core/text.hpp"

namespace advtext {

namespace {

// Common Arabic function words (MSA and frequent dialectal forms) and the
// English function words of the usual NLTK-style list.
constexpr const char* kBuiltinStopwords[] = {
    // Arabic
    "من", "في", "على", "إلى", "الى", "عن", "مع", "هذا", "هذه", "ذلك", "تلك",
    "التي", "الذي", "الذين", "اللذان", "اللتان", "و", "أو", "او", "ثم", "لا",
    "لم", "لن", "ما", "ماذا", "كيف", "أين", "اين", "متى", "هل", "قد", "كان",
    "كانت", "يكون", "تكون", "إن", "ان", "أن", "إنه", "انه", "أنه", "كل",
    "بعض", "غير", "بين", "حتى", "عند", "عندما", "لكن", "لكنه", "لقد", "هو",
    "هي", "هم", "هن", "أنا", "انا", "نحن", "أنت", "انت", "أي", "اي", "بعد",
    "قبل", "فوق", "تحت", "منذ", "كما", "أيضا", "ايضا", "يا", "ب", "ل", "ك",
    "ف", "لي", "له", "لها", "لهم", "فيه", "فيها", "عليه", "عليها", "منه",
    "منها", "به", "بها", "هناك", "هنا", "وهو", "وهي", "وقد", "وكان", "وكل",
    "ولا", "ولم", "وفي", "ومن", "وعلى", "إذا", "اذا", "لو", "أم", "ام", "بل",
    "إلا", "الا", "عليك", "لك", "كذا", "شي", "شيء",
    // English
    "a", "an", "the", "is", "are", "was", "were", "be", "been", "being", "of",
    "in", "on", "at", "to", "for", "with", "and", "or", "but", "this", "that",
    "these", "those", "it", "its", "i", "you", "he", "she", "we", "they", "me",
    "my", "our", "your", "his", "her", "their", "them", "as", "by", "from",
    "so", "very", "not", "no", "do", "does", "did", "has", "have", "had",
    "will", "would", "can", "could", "there", "here", "all", "some", "just",
    "than", "then", "too", "also", "am", "if", "into", "about", "what",
    "which", "who", "whom", "when", "where", "why", "how", "s", "t", "don",
};

}  // namespace

StopwordList::StopwordList(const std::vector<std::string>& words) {
  for (const auto& w : words) words_.insert(text::normalize(w));
}

StopwordList StopwordList::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open stopword resource " + path.string());
  std::vector<std::string> words;
  std::string line;
  while (std::getline(in, line)) {
    std::string w = text::trim(line);
    if (w.empty() || w.front() == '#') continue;
    words.push_back(std::move(w));
  }
  return StopwordList(words);
}

StopwordList StopwordList::builtin() {
  std::vector<std::string> words(std::begin(kBuiltinStopwords), std::end(kBuiltinStopwords));
  return StopwordList(words);
}

StopwordList StopwordList::from_resource(const std::string& resource) {
  if (resource.empty() || resource == "builtin") return builtin();
  if (resource == "none") return StopwordList();
  return load(resource);
}

bool StopwordList::contains(std::string_view word) const {
  return words_.count(text::normalize(word)) > 0;
}

std::vector<std::string> CleanedText::words() const {
  std::vector<std::string> out;
  out.reserve(content.size());
  for (auto i : content) out.push_back(tokens[i].text);
  return out;
}

std::vector<std::string> CleanedText::token_texts() const {
  std::vector<std::string> out;
  out.reserve(tokens.size());
  for (const auto& t : tokens) out.push_back(t.text);
  return out;
}

CleanedText clean(std::string_view input, const StopwordList& stopwords) {
  CleanedText out;
  std::size_t pos = 0;
  std::size_t run_begin = 0;
  bool in_run = false;
  const auto close_run = [&](std::size_t end) {
    WordSpan span{std::string(input.substr(run_begin, end - run_begin)), run_begin, end,
                  false};
    span.stopword = stopwords.contains(span.text);
    if (!span.stopword) out.content.push_back(out.tokens.size());
    out.tokens.push_back(std::move(span));
    in_run = false;
  };
  while (pos < input.size()) {
    const std::size_t start = pos;
    const char32_t cp = text::decode_next(input, pos);
    const bool word_char = text::is_word_char(cp) || (in_run && cp == 0x0640);
    if (word_char && !in_run) {
      in_run = true;
      run_begin = start;
    } else if (!word_char && in_run) {
      close_run(start);
    }
  }
  if (in_run) close_run(input.size());
  return out;
}

std::string delete_span(std::string_view input, std::size_t begin, std::size_t end) {
  std::string out(input.substr(0, begin));
  out.append(input.substr(end));
  return text::collapse_spaces(out);
}

std::string replace_span(std::string_view input, std::size_t begin, std::size_t end,
                         std::string_view replacement) {
  std::string out(input.substr(0, begin));
  out.append(replacement);
  out.append(input.substr(end));
  return out;
}

void apply_replacement(CleanedText& cleaned, std::size_t token_index,
                       const std::string& replacement) {
  auto& target = cleaned.tokens.at(token_index);
  const auto old_len = static_cast<long long>(target.end - target.begin);
  const auto shift = static_cast<long long>(replacement.size()) - old_len;
  target.text = replacement;
  target.end = target.begin + replacement.size();
  for (std::size_t i = token_index + 1; i < cleaned.tokens.size(); ++i) {
    cleaned.tokens[i].begin = static_cast<std::size_t>(
        static_cast<long long>(cleaned.tokens[i].begin) + shift);
    cleaned.tokens[i].end = static_cast<std::size_t>(
        static_cast<long long>(cleaned.tokens[i].end) + shift);
  }
}

Segmentation segment(std::string_view input, const CleanedText& cleaned) {
  Segmentation out;
  std::size_t pos = 0;
  std::size_t next_token = 0;
  std::string other;
  const auto flush_other = [&] {
    if (!other.empty()) out.segments.push_back(std::move(other));
    other.clear();
  };
  while (pos < input.size()) {
    if (next_token < cleaned.tokens.size() && pos == cleaned.tokens[next_token].begin) {
      flush_other();
      const auto& t = cleaned.tokens[next_token];
      out.word_segment.push_back(out.segments.size());
      out.segments.push_back(std::string(input.substr(t.begin, t.end - t.begin)));
      pos = t.end;
      ++next_token;
      continue;
    }
    const std::size_t start = pos;
    const char32_t cp = text::decode_next(input, pos);
    if (text::is_space(cp)) {
      flush_other();
    } else {
      other.append(input.substr(start, pos - start));
    }
  }
  flush_other();
  if (out.word_segment.size() != cleaned.tokens.size())
    throw InvalidArgument("segmentation does not match cleaned token spans");
  return out;
}

}  // namespace advtext
