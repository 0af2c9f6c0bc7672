#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

// UTF-8 aware text helpers shared by the search index, the classifiers and
// the output filters.
namespace tourdesk::text {

std::vector<char32_t> decode_utf8(std::string_view s);
std::string encode_utf8(char32_t cp);
std::string encode_utf8(const std::vector<char32_t>& cps);

std::size_t codepoint_length(std::string_view s);

// Cuts after max_codepoints code points; never splits a sequence.
std::string truncate_codepoints(std::string_view s, std::size_t max_codepoints);

// Full-width ASCII variants (U+FF01..U+FF5E) and U+3000 mapped to ASCII.
std::string fold_fullwidth(std::string_view s);

std::string to_lower_ascii(std::string_view s);
std::string trim(std::string_view s);
std::string collapse_whitespace(std::string_view s);

bool contains_question_mark(std::string_view s);
bool contains_exclamation(std::string_view s);
bool has_newline(std::string_view s);

// Case, whitespace and punctuation folded; used for de-duplication.
std::string fold_for_dedupe(std::string_view s);

enum class TokenizeMode { Words, CjkBigrams };

// Lowercased word tokens split on whitespace and punctuation. In CjkBigrams
// mode runs of non-ASCII letters are emitted as overlapping character bigrams.
std::vector<std::string> tokenize(std::string_view s, TokenizeMode mode = TokenizeMode::Words);

bool is_stopword(std::string_view token);

// Tokens minus stopwords, de-duplicated, first-occurrence order.
std::vector<std::string> content_tokens(std::string_view s, TokenizeMode mode = TokenizeMode::Words);

// Maximal digit runs after folding full-width digits and dropping grouping
// commas between digits ("1,200" -> "1200").
std::vector<std::string> digit_sequences(std::string_view s);

// True when every digit run of `output` is also a digit run somewhere in `context`.
bool digits_grounded(std::string_view output, const std::vector<std::string>& context);

// Text up to and including the first sentence terminator.
std::string first_sentence(std::string_view s);

std::vector<std::string> split_sentences(std::string_view s);

std::uint64_t fnv1a64(std::string_view s, std::uint64_t seed = 0xcbf29ce484222325ULL);

std::string replace_all(std::string s, std::string_view from, std::string_view to);

}  // namespace tourdesk::text
