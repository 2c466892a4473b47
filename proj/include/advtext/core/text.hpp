#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

// UTF-8 helpers and a small code-point classifier. The classifier covers the
// scripts this toolkit targets (Latin, Arabic, plus the other major
// alphabetic blocks) without pulling in ICU.
namespace advtext::text {

// Decodes one code point starting at `pos`, advancing `pos`. Invalid
// sequences decode as U+FFFD and advance by one byte.
char32_t decode_next(std::string_view s, std::size_t& pos);

void append_utf8(std::string& out, char32_t cp);

std::vector<char32_t> decode(std::string_view s);

bool is_letter(char32_t cp);
// Combining marks, including Arabic harakat and tanween.
bool is_mark(char32_t cp);
bool is_digit(char32_t cp);
bool is_space(char32_t cp);

inline bool is_word_char(char32_t cp) { return is_letter(cp) || is_mark(cp); }

// True when every code point is a letter or mark and there is at least one
// letter. Used to reject subword pieces, punctuation and digits.
bool is_whole_word(std::string_view token);

// Lowercases ASCII/Latin-1, strips combining marks (diacritics) and the
// Arabic tatweel. Used for stopword lookup and identity comparisons.
std::string normalize(std::string_view token);

std::string trim(std::string_view s);

// Collapses runs of whitespace to one ASCII space and trims the ends.
std::string collapse_spaces(std::string_view s);

std::vector<std::string> split_whitespace(std::string_view s);

// Normalized word runs plus every other non-space code point as its own
// token, in order.
std::vector<std::string> word_symbol_tokens(std::string_view s);

// Maximal runs of letters/marks, in order.
std::vector<std::string> word_runs(std::string_view s);

}  // namespace advtext::text
