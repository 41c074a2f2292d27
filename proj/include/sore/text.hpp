#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace sore::text {

// Decodes UTF-8 leniently; ill-formed sequences become U+FFFD.
std::u32string decode_utf8(std::string_view s);
void append_utf8(std::string& out, char32_t cp);
std::string encode_utf8(std::u32string_view s);

// Replaces ill-formed UTF-8 with U+FFFD so downstream code can assume valid input.
std::string sanitize_utf8(std::string_view s);

std::size_t codepoint_count(std::string_view s);
std::string truncate_codepoints(std::string_view s, std::size_t max_codepoints);

bool is_space(char32_t cp);
bool is_upper(char32_t cp);

// Collapses runs of Unicode whitespace to one ASCII space and trims both ends.
std::string normalize_whitespace(std::string_view s);

// Full Unicode lowercasing (root locale).
std::string to_lower(std::string_view s);

// NFKC, lowercase, then split on Unicode whitespace. Tokenizer for overlap metrics.
std::vector<std::string> eval_tokens(std::string_view s);

// Splits at `.`, `?` or `!` followed by whitespace and an uppercase letter.
// Pieces are whitespace-normalized; empty pieces are dropped.
std::vector<std::string> split_sentences(std::string_view s);

// Converts bytes in the named charset to UTF-8. Unknown charsets fall back to
// UTF-8 sanitization.
std::string to_utf8(std::string_view bytes, std::string_view charset);

}  // namespace sore::text
