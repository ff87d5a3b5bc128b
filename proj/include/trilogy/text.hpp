#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace trilogy::text {

// ASCII-only case folding. Keyword and concept matching is defined over
// folded text; non-ASCII bytes pass through untouched.
char fold_char(char c);
std::string fold(std::string_view s);

bool iequals(std::string_view a, std::string_view b);

std::string trim(std::string_view s);

// Splits on a single-character delimiter; keeps empty fields.
std::vector<std::string> split(std::string_view s, char delim);

// Splits on runs of whitespace; drops empty fields.
std::vector<std::string> split_ws(std::string_view s);

std::string join(const std::vector<std::string>& parts, std::string_view sep);

// Lowercased maximal runs of alphanumeric bytes. This is the token unit
// for all phrase matching: punctuation and whitespace both separate.
std::vector<std::string> tokenize(std::string_view s);

// Folds, tokenizes, and re-joins with single spaces. Two phrases with the
// same canonical form are the same phrase everywhere in the system.
std::string canonical_phrase(std::string_view s);

// Truncates to at most max_bytes without splitting a UTF-8 sequence.
std::string truncate_utf8(std::string_view s, std::size_t max_bytes);

// Collapses all whitespace runs to single spaces and trims the ends.
std::string collapse_ws(std::string_view s);

std::uint64_t fnv1a64(std::string_view s);
std::string to_hex(std::uint64_t v);

std::int64_t now_epoch_seconds();

}  // namespace trilogy::text
