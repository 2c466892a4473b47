#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

namespace advtext {

class StopwordList {
 public:
  StopwordList() = default;
  explicit StopwordList(const std::vector<std::string>& words);

  // One word per line; '#' starts a comment line.
  static StopwordList load(const std::filesystem::path& path);
  // Arabic and English function words shipped with the library.
  static StopwordList builtin();
  // `resource` empty or "builtin" selects builtin(), otherwise load(resource).
  static StopwordList from_resource(const std::string& resource);

  bool contains(std::string_view word) const;
  std::size_t size() const { return words_.size(); }

 private:
  std::unordered_set<std::string> words_;
};

// A maximal run of letters/marks in the raw text, with byte offsets.
struct WordSpan {
  std::string text;
  std::size_t begin = 0;
  std::size_t end = 0;
  bool stopword = false;
};

// Output of cleaning: every word token of the raw text (stopwords
// included, so taggers see full context) plus the content-word subset fed to
// importance ranking. Emojis, digits, punctuation and other noise are not
// word tokens.
struct CleanedText {
  std::vector<WordSpan> tokens;
  std::vector<std::size_t> content;  // indices into tokens

  std::size_t size() const { return content.size(); }
  bool empty() const { return content.empty(); }
  const WordSpan& word(std::size_t position) const { return tokens.at(content.at(position)); }
  std::vector<std::string> words() const;
  std::vector<std::string> token_texts() const;
};

CleanedText clean(std::string_view text, const StopwordList& stopwords);

// Raw text with [begin, end) removed and whitespace runs collapsed.
std::string delete_span(std::string_view text, std::size_t begin, std::size_t end);

// Raw text with [begin, end) replaced; the rest is untouched.
std::string replace_span(std::string_view text, std::size_t begin, std::size_t end,
                         std::string_view replacement);

// Shifts spans after `token_index` to account for a replacement of that
// token by `replacement`, and updates the token text.
void apply_replacement(CleanedText& cleaned, std::size_t token_index,
                       const std::string& replacement);

// Segments raw text into word runs and non-space non-word runs; whitespace
// is dropped. `word_segment[i]` is the segment index of tokens[i].
struct Segmentation {
  std::vector<std::string> segments;
  std::vector<std::size_t> word_segment;
};
Segmentation segment(std::string_view text, const CleanedText& cleaned);

}  // namespace advtext
