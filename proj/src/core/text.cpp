#include "advtext/core/text.hpp"

#include <algorithm>
#include <array>

namespace advtext::text {

namespace {

struct Range {
  char32_t lo;
  char32_t hi;
};

constexpr std::array kLetterRanges = {
    Range{0x0041, 0x005A}, Range{0x0061, 0x007A}, Range{0x00AA, 0x00AA},
    Range{0x00B5, 0x00B5}, Range{0x00BA, 0x00BA}, Range{0x00C0, 0x00D6},
    Range{0x00D8, 0x00F6}, Range{0x00F8, 0x02AF}, Range{0x0370, 0x0373},
    Range{0x0376, 0x037D}, Range{0x0386, 0x0386}, Range{0x0388, 0x03FF},
    Range{0x0400, 0x0481}, Range{0x048A, 0x052F}, Range{0x0531, 0x0556},
    Range{0x0561, 0x0587}, Range{0x05D0, 0x05EA}, Range{0x0620, 0x063F},
    Range{0x0641, 0x064A}, Range{0x066E, 0x066F}, Range{0x0671, 0x06D3},
    Range{0x06D5, 0x06D5}, Range{0x06E5, 0x06E6}, Range{0x06EE, 0x06EF},
    Range{0x06FA, 0x06FC}, Range{0x06FF, 0x06FF}, Range{0x0750, 0x077F},
    Range{0x08A0, 0x08C9}, Range{0x0904, 0x0939}, Range{0x0958, 0x0961},
    Range{0x0E01, 0x0E30}, Range{0x1E00, 0x1FFF}, Range{0x3041, 0x3096},
    Range{0x30A1, 0x30FA}, Range{0x4E00, 0x9FFF}, Range{0xAC00, 0xD7A3},
    Range{0xFB50, 0xFBB1}, Range{0xFBD3, 0xFD3D}, Range{0xFD50, 0xFDC7},
    Range{0xFDF0, 0xFDFB}, Range{0xFE70, 0xFE74}, Range{0xFE76, 0xFEFC},
};

constexpr std::array kMarkRanges = {
    Range{0x0300, 0x036F}, Range{0x0483, 0x0489}, Range{0x0591, 0x05BD},
    Range{0x0610, 0x061A}, Range{0x064B, 0x065F}, Range{0x0670, 0x0670},
    Range{0x06D6, 0x06DC}, Range{0x06DF, 0x06E4}, Range{0x06E7, 0x06E8},
    Range{0x06EA, 0x06ED}, Range{0x08CA, 0x08FF}, Range{0x0900, 0x0903},
    Range{0x093A, 0x094F}, Range{0x0E31, 0x0E3A}, Range{0x0E47, 0x0E4E},
    Range{0x1AB0, 0x1AFF}, Range{0x1DC0, 0x1DFF}, Range{0x20D0, 0x20FF},
    Range{0xFE20, 0xFE2F},
};

template <std::size_t N>
bool in_ranges(const std::array<Range, N>& ranges, char32_t cp) {
  auto it = std::upper_bound(
      ranges.begin(), ranges.end(), cp,
      [](char32_t value, const Range& r) { return value < r.lo; });
  if (it == ranges.begin()) return false;
  --it;
  return cp >= it->lo && cp <= it->hi;
}

constexpr char32_t kTatweel = 0x0640;
constexpr char32_t kReplacement = 0xFFFD;

}  // namespace

char32_t decode_next(std::string_view s, std::size_t& pos) {
  const auto byte = [&](std::size_t i) {
    return static_cast<unsigned char>(s[i]);
  };
  const unsigned char b0 = byte(pos);
  if (b0 < 0x80) {
    ++pos;
    return b0;
  }
  int extra = 0;
  char32_t cp = 0;
  if ((b0 & 0xE0) == 0xC0) {
    extra = 1;
    cp = b0 & 0x1F;
  } else if ((b0 & 0xF0) == 0xE0) {
    extra = 2;
    cp = b0 & 0x0F;
  } else if ((b0 & 0xF8) == 0xF0) {
    extra = 3;
    cp = b0 & 0x07;
  } else {
    ++pos;
    return kReplacement;
  }
  if (pos + extra >= s.size()) {
    ++pos;
    return kReplacement;
  }
  for (int i = 1; i <= extra; ++i) {
    const unsigned char b = byte(pos + i);
    if ((b & 0xC0) != 0x80) {
      ++pos;
      return kReplacement;
    }
    cp = (cp << 6) | (b & 0x3F);
  }
  pos += extra + 1;
  return cp;
}

void append_utf8(std::string& out, char32_t cp) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

std::vector<char32_t> decode(std::string_view s) {
  std::vector<char32_t> out;
  out.reserve(s.size());
  std::size_t pos = 0;
  while (pos < s.size()) out.push_back(decode_next(s, pos));
  return out;
}

bool is_letter(char32_t cp) { return in_ranges(kLetterRanges, cp); }

bool is_mark(char32_t cp) { return in_ranges(kMarkRanges, cp); }

bool is_digit(char32_t cp) {
  return (cp >= U'0' && cp <= U'9') || (cp >= 0x0660 && cp <= 0x0669) ||
         (cp >= 0x06F0 && cp <= 0x06F9) || (cp >= 0x0966 && cp <= 0x096F);
}

bool is_space(char32_t cp) {
  return cp == U' ' || (cp >= 0x09 && cp <= 0x0D) || cp == 0x85 ||
         cp == 0xA0 || cp == 0x1680 || (cp >= 0x2000 && cp <= 0x200A) ||
         cp == 0x2028 || cp == 0x2029 || cp == 0x202F || cp == 0x205F ||
         cp == 0x3000;
}

bool is_whole_word(std::string_view token) {
  if (token.empty()) return false;
  bool has_letter = false;
  std::size_t pos = 0;
  while (pos < token.size()) {
    const char32_t cp = decode_next(token, pos);
    if (is_letter(cp)) {
      has_letter = true;
    } else if (!is_mark(cp) && cp != kTatweel) {
      return false;
    }
  }
  return has_letter;
}

std::string normalize(std::string_view token) {
  std::string out;
  out.reserve(token.size());
  std::size_t pos = 0;
  while (pos < token.size()) {
    char32_t cp = decode_next(token, pos);
    if (is_mark(cp) || cp == kTatweel) continue;
    if (cp >= U'A' && cp <= U'Z') cp += 32;
    else if (cp >= 0xC0 && cp <= 0xDE && cp != 0xD7) cp += 32;
    append_utf8(out, cp);
  }
  return out;
}

std::string trim(std::string_view s) {
  std::size_t begin = 0;
  std::size_t end = s.size();
  while (begin < end && (s[begin] == ' ' || (s[begin] >= '\t' && s[begin] <= '\r')))
    ++begin;
  while (end > begin &&
         (s[end - 1] == ' ' || (s[end - 1] >= '\t' && s[end - 1] <= '\r')))
    --end;
  return std::string(s.substr(begin, end - begin));
}

std::string collapse_spaces(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  bool pending_space = false;
  std::size_t pos = 0;
  while (pos < s.size()) {
    const std::size_t start = pos;
    const char32_t cp = decode_next(s, pos);
    if (is_space(cp)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) {
      out.push_back(' ');
      pending_space = false;
    }
    out.append(s.substr(start, pos - start));
  }
  return out;
}

std::vector<std::string> split_whitespace(std::string_view s) {
  std::vector<std::string> out;
  std::string current;
  std::size_t pos = 0;
  while (pos < s.size()) {
    const std::size_t start = pos;
    const char32_t cp = decode_next(s, pos);
    if (is_space(cp)) {
      if (!current.empty()) out.push_back(std::move(current));
      current.clear();
    } else {
      current.append(s.substr(start, pos - start));
    }
  }
  if (!current.empty()) out.push_back(std::move(current));
  return out;
}

std::vector<std::string> word_runs(std::string_view s) {
  std::vector<std::string> out;
  std::string current;
  std::size_t pos = 0;
  while (pos < s.size()) {
    const std::size_t start = pos;
    const char32_t cp = decode_next(s, pos);
    if (is_word_char(cp) || (cp == kTatweel && !current.empty())) {
      current.append(s.substr(start, pos - start));
    } else if (!current.empty()) {
      out.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) out.push_back(std::move(current));
  return out;
}

std::vector<std::string> word_symbol_tokens(std::string_view s) {
  std::vector<std::string> out;
  std::string word;
  std::size_t pos = 0;
  auto flush = [&] {
    if (!word.empty()) out.push_back(normalize(word));
    word.clear();
  };
  while (pos < s.size()) {
    const std::size_t start = pos;
    const char32_t cp = decode_next(s, pos);
    if (is_word_char(cp) || (cp == kTatweel && !word.empty())) {
      word.append(s.substr(start, pos - start));
    } else {
      flush();
      if (!is_space(cp)) out.emplace_back(s.substr(start, pos - start));
    }
  }
  flush();
  return out;
}

}  // namespace advtext::text
