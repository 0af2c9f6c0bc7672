#include "tourdesk/text.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <unordered_set>

namespace tourdesk::text {

namespace {

bool is_ascii_alnum(char32_t c) {
  return (c >= U'0' && c <= U'9') || (c >= U'a' && c <= U'z') || (c >= U'A' && c <= U'Z');
}

bool is_non_ascii_punct(char32_t c) {
  return (c >= 0x00A0 && c <= 0x00BF) || c == 0x00D7 || c == 0x00F7 ||
         (c >= 0x2000 && c <= 0x206F) || (c >= 0x2190 && c <= 0x23FF) ||
         (c >= 0x2500 && c <= 0x27BF) || (c >= 0x3000 && c <= 0x303F) || c == 0x30FB ||
         (c >= 0xFE30 && c <= 0xFE4F) || (c >= 0xFF00 && c <= 0xFF0F) ||
         (c >= 0xFF1A && c <= 0xFF20) || (c >= 0xFF3B && c <= 0xFF40) ||
         (c >= 0xFF5B && c <= 0xFF65) || c == 0xFEFF;
}

// 0 = separator, 1 = ASCII word char, 2 = non-ASCII word char
int char_class(char32_t c) {
  if (c < 0x80) return is_ascii_alnum(c) ? 1 : 0;
  return is_non_ascii_punct(c) ? 0 : 2;
}

char32_t fold_cp(char32_t c) {
  if (c >= 0xFF01 && c <= 0xFF5E) return c - 0xFF01 + 0x21;
  if (c == 0x3000) return U' ';
  return c;
}

bool is_terminator(char32_t c) {
  return c == U'.' || c == U'!' || c == U'?' || c == 0x3002 || c == 0xFF01 || c == 0xFF1F;
}

const std::unordered_set<std::string_view>& stopwords() {
  static const std::unordered_set<std::string_view> words = {
      "a",     "an",    "the",   "is",    "are",  "was",   "were",  "be",    "been",  "am",
      "it",    "its",   "this",  "that",  "these", "those", "of",    "to",    "in",    "on",
      "at",    "for",   "and",   "or",    "but",  "with",  "as",    "by",    "from",  "i",
      "you",   "he",    "she",   "we",    "they", "me",    "my",    "your",  "our",   "their",
      "them",  "us",    "do",    "does",  "did",  "have",  "has",   "had",   "so",    "if",
      "how",   "what",  "which", "who",   "whom", "can",   "could", "would", "should", "will",
      "there", "here",  "about", "any",   "some", "very",  "just",  "too",   "also",  "then",
      "than",  "into",  "up",    "out",   "s",    "t",     "m",     "re",    "ll",    "ve",
      "d",     "okay",  "ok",    "um",    "uh",   "hmm",   "well",  "oh",    "please", "tell",
      "like",  "much",  "many",  "really", "yes", "no",    "not",   "don",   "yeah",  "sure"};
  return words;
}

}  // namespace

std::vector<char32_t> decode_utf8(std::string_view s) {
  std::vector<char32_t> out;
  out.reserve(s.size());
  std::size_t i = 0;
  while (i < s.size()) {
    auto b0 = static_cast<unsigned char>(s[i]);
    std::size_t len = 1;
    char32_t cp = b0;
    if (b0 >= 0xF0 && b0 < 0xF8) {
      len = 4;
      cp = b0 & 0x07;
    } else if (b0 >= 0xE0) {
      len = 3;
      cp = b0 & 0x0F;
    } else if (b0 >= 0xC0) {
      len = 2;
      cp = b0 & 0x1F;
    } else if (b0 >= 0x80) {
      out.push_back(0xFFFD);
      ++i;
      continue;
    }
    if (i + len > s.size()) {
      out.push_back(0xFFFD);
      break;
    }
    for (std::size_t k = 1; k < len; ++k) {
      cp = (cp << 6) | (static_cast<unsigned char>(s[i + k]) & 0x3F);
    }
    out.push_back(cp);
    i += len;
  }
  return out;
}

std::string encode_utf8(char32_t cp) {
  std::string out;
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
  return out;
}

std::string encode_utf8(const std::vector<char32_t>& cps) {
  std::string out;
  out.reserve(cps.size());
  for (char32_t c : cps) out += encode_utf8(c);
  return out;
}

std::size_t codepoint_length(std::string_view s) {
  return static_cast<std::size_t>(std::count_if(
      s.begin(), s.end(), [](char c) { return (static_cast<unsigned char>(c) & 0xC0) != 0x80; }));
}

std::string truncate_codepoints(std::string_view s, std::size_t max_codepoints) {
  std::size_t count = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if ((static_cast<unsigned char>(s[i]) & 0xC0) != 0x80) {
      if (count == max_codepoints) return std::string(s.substr(0, i));
      ++count;
    }
  }
  return std::string(s);
}

std::string fold_fullwidth(std::string_view s) {
  auto cps = decode_utf8(s);
  for (auto& c : cps) c = fold_cp(c);
  return encode_utf8(cps);
}

std::string to_lower_ascii(std::string_view s) {
  std::string out(s);
  for (auto& c : out) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return out;
}

std::string trim(std::string_view s) {
  auto is_space = [](char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r'; };
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && is_space(s[b])) ++b;
  while (e > b && is_space(s[e - 1])) --e;
  return std::string(s.substr(b, e - b));
}

std::string collapse_whitespace(std::string_view s) {
  std::string out;
  bool pending = false;
  for (char c : s) {
    if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
      pending = !out.empty();
      continue;
    }
    if (pending) out.push_back(' ');
    pending = false;
    out.push_back(c);
  }
  return out;
}

bool contains_question_mark(std::string_view s) {
  return s.find('?') != std::string_view::npos || s.find("\xEF\xBC\x9F") != std::string_view::npos;
}

bool contains_exclamation(std::string_view s) {
  return s.find('!') != std::string_view::npos || s.find("\xEF\xBC\x81") != std::string_view::npos;
}

bool has_newline(std::string_view s) {
  return s.find('\n') != std::string_view::npos || s.find('\r') != std::string_view::npos;
}

std::string fold_for_dedupe(std::string_view s) {
  auto cps = decode_utf8(s);
  std::vector<char32_t> out;
  bool pending_space = false;
  for (char32_t c : cps) {
    c = fold_cp(c);
    if (c >= U'A' && c <= U'Z') c = c - U'A' + U'a';
    if (char_class(c) == 0) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(U' ');
    pending_space = false;
    out.push_back(c);
  }
  return encode_utf8(out);
}

std::vector<std::string> tokenize(std::string_view s, TokenizeMode mode) {
  std::vector<std::string> tokens;
  auto cps = decode_utf8(s);
  std::vector<char32_t> run;
  int run_class = 0;
  auto flush = [&]() {
    if (run.empty()) return;
    if (run_class == 2 && mode == TokenizeMode::CjkBigrams) {
      if (run.size() == 1) {
        tokens.push_back(encode_utf8(run));
      } else {
        for (std::size_t i = 0; i + 1 < run.size(); ++i) {
          tokens.push_back(encode_utf8(run[i]) + encode_utf8(run[i + 1]));
        }
      }
    } else {
      tokens.push_back(encode_utf8(run));
    }
    run.clear();
  };
  for (char32_t c : cps) {
    c = fold_cp(c);
    if (c >= U'A' && c <= U'Z') c = c - U'A' + U'a';
    int cls = char_class(c);
    if (cls != run_class) {
      flush();
      run_class = cls;
    }
    if (cls != 0) run.push_back(c);
  }
  flush();
  return tokens;
}

bool is_stopword(std::string_view token) { return stopwords().contains(token); }

std::vector<std::string> content_tokens(std::string_view s, TokenizeMode mode) {
  std::vector<std::string> out;
  for (auto& t : tokenize(s, mode)) {
    if (is_stopword(t)) continue;
    if (std::find(out.begin(), out.end(), t) == out.end()) out.push_back(std::move(t));
  }
  return out;
}

std::vector<std::string> digit_sequences(std::string_view s) {
  auto cps = decode_utf8(s);
  for (auto& c : cps) c = fold_cp(c);
  auto is_digit = [](char32_t c) { return c >= U'0' && c <= U'9'; };
  std::vector<std::string> out;
  std::string cur;
  for (std::size_t i = 0; i < cps.size(); ++i) {
    char32_t c = cps[i];
    if (is_digit(c)) {
      cur.push_back(static_cast<char>(c));
      continue;
    }
    bool grouping = c == U',' && !cur.empty() && i + 1 < cps.size() && is_digit(cps[i + 1]);
    if (grouping) continue;
    if (!cur.empty()) out.push_back(std::move(cur));
    cur.clear();
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

bool digits_grounded(std::string_view output, const std::vector<std::string>& context) {
  std::unordered_set<std::string> known;
  for (const auto& c : context) {
    for (auto& d : digit_sequences(c)) known.insert(std::move(d));
  }
  for (const auto& d : digit_sequences(output)) {
    if (!known.contains(d)) return false;
  }
  return true;
}

std::vector<std::string> split_sentences(std::string_view s) {
  auto cps = decode_utf8(s);
  std::vector<std::string> out;
  std::vector<char32_t> cur;
  for (std::size_t i = 0; i < cps.size(); ++i) {
    cur.push_back(cps[i]);
    if (!is_terminator(cps[i])) continue;
    // '.' inside numbers or abbreviations without a following space is not a boundary
    if (cps[i] == U'.' && i + 1 < cps.size() && cps[i + 1] != U' ' && cps[i + 1] != U'\n') continue;
    while (i + 1 < cps.size() && is_terminator(cps[i + 1])) cur.push_back(cps[++i]);
    auto sentence = trim(encode_utf8(cur));
    if (!sentence.empty()) out.push_back(std::move(sentence));
    cur.clear();
  }
  auto rest = trim(encode_utf8(cur));
  if (!rest.empty()) out.push_back(std::move(rest));
  return out;
}

std::string first_sentence(std::string_view s) {
  auto sentences = split_sentences(s);
  return sentences.empty() ? std::string() : sentences.front();
}

std::uint64_t fnv1a64(std::string_view s, std::uint64_t seed) {
  std::uint64_t h = seed;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string replace_all(std::string s, std::string_view from, std::string_view to) {
  if (from.empty()) return s;
  std::size_t pos = 0;
  while ((pos = s.find(from, pos)) != std::string::npos) {
    s.replace(pos, from.size(), to);
    pos += to.size();
  }
  return s;
}

}  // namespace tourdesk::text
