#include "tourdesk/llm/filter.hpp"

#include <algorithm>
#include <set>

#include "tourdesk/text.hpp"

namespace tourdesk::llm {

std::string_view to_string(Reject r) {
  switch (r) {
    case Reject::Empty: return "empty";
    case Reject::OverLength: return "over-length";
    case Reject::MultiLine: return "multi-line";
    case Reject::ContainsQuestionMark: return "contains-question-mark";
    case Reject::MissingQuestionMark: return "missing-question-mark";
    case Reject::ForbiddenPhrase: return "contains-forbidden-phrase";
    case Reject::UngroundedNumber: return "ungrounded-number";
    case Reject::NoEcho: return "no-echo";
    case Reject::MissingName: return "missing-name";
    case Reject::MentionsOther: return "mentions-other-sight";
    case Reject::EndorsesOther: return "endorses-other-sight";
  }
  return "unknown";
}

bool echoes(std::string_view text, std::string_view source) {
  auto wanted = text::content_tokens(source);
  if (wanted.empty()) return true;
  auto have = text::tokenize(text);
  std::set<std::string> tokens(have.begin(), have.end());
  return std::any_of(wanted.begin(), wanted.end(), [&](const std::string& t) { return tokens.contains(t); });
}

namespace {

bool violates(Reject r, const FilterContext& ctx, std::string_view s) {
  switch (r) {
    case Reject::Empty:
      return text::trim(s).empty();
    case Reject::OverLength:
      return ctx.max_length > 0 && text::codepoint_length(s) > static_cast<std::size_t>(ctx.max_length);
    case Reject::MultiLine:
      return text::has_newline(text::trim(s));
    case Reject::ContainsQuestionMark:
      return text::contains_question_mark(s);
    case Reject::MissingQuestionMark: {
      auto t = text::trim(s);
      return !(t.ends_with("?") || t.ends_with("\xEF\xBC\x9F"));
    }
    case Reject::ForbiddenPhrase: {
      auto lower = text::to_lower_ascii(s);
      return std::any_of(ctx.forbidden.begin(), ctx.forbidden.end(), [&](const std::string& f) {
        return !f.empty() && lower.find(text::to_lower_ascii(f)) != std::string::npos;
      });
    }
    case Reject::UngroundedNumber:
      return !text::digits_grounded(s, ctx.grounding);
    case Reject::NoEcho:
      return !echoes(s, ctx.echo_source);
    case Reject::MissingName:
      return std::any_of(ctx.required_names.begin(), ctx.required_names.end(),
                         [&](const std::string& n) { return s.find(n) == std::string_view::npos; });
    case Reject::MentionsOther:
      return !ctx.other_name.empty() && s.find(ctx.other_name) != std::string_view::npos;
    case Reject::EndorsesOther: {
      if (ctx.endorsed_name.empty()) return false;
      auto sentences = text::split_sentences(s);
      if (sentences.empty()) return true;
      const auto& last = sentences.back();
      return last.find(ctx.endorsed_name) == std::string::npos;
    }
  }
  return false;
}

}  // namespace

std::optional<Reject> check(const FilterPolicy& policy, const FilterContext& ctx, std::string_view text) {
  for (auto r : policy.reject_if) {
    if (violates(r, ctx, text)) return r;
  }
  return std::nullopt;
}

}  // namespace tourdesk::llm
