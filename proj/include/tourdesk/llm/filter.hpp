#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace tourdesk::llm {

enum class Reject {
  Empty,
  OverLength,
  MultiLine,
  ContainsQuestionMark,
  MissingQuestionMark,
  ForbiddenPhrase,
  UngroundedNumber,
  NoEcho,
  MissingName,
  MentionsOther,
  EndorsesOther,
};

std::string_view to_string(Reject r);

struct FilterPolicy {
  std::vector<Reject> reject_if;
  int max_retries = 2;  // total backend calls before the fallback is used
};

// Per-call data the predicates check against.
struct FilterContext {
  int max_length = 0;                     // code points, 0 = unlimited
  std::vector<std::string> forbidden;     // case-insensitive substrings
  std::vector<std::string> grounding;     // texts every digit run must come from
  std::string echo_source;                // answer the comment must echo
  std::vector<std::string> required_names;
  std::string other_name;                 // sight that must not be endorsed / mentioned
  std::string endorsed_name;              // sight the last sentence must favour
};

// First violated predicate, or nullopt when the text passes.
std::optional<Reject> check(const FilterPolicy& policy, const FilterContext& ctx, std::string_view text);

// Shares at least one content token with `source` (vacuous when source has none).
bool echoes(std::string_view text, std::string_view source);

}  // namespace tourdesk::llm
