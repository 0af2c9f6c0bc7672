#include "tourdesk/llm/gateway.hpp"

#include <algorithm>
#include <stdexcept>

#include "tourdesk/error.hpp"
#include "tourdesk/text.hpp"

namespace tourdesk::llm {

FilterPolicy default_policy(TemplateName name, int max_retries) {
  using R = Reject;
  FilterPolicy p;
  p.max_retries = max_retries;
  switch (name) {
    case TemplateName::IcebreakQuestion:
      p.reject_if = {R::Empty, R::MultiLine, R::OverLength, R::ForbiddenPhrase, R::MissingQuestionMark};
      break;
    case TemplateName::IcebreakComment:
      p.reject_if = {R::Empty, R::MultiLine, R::OverLength, R::ForbiddenPhrase, R::ContainsQuestionMark};
      break;
    case TemplateName::Summarize:
      p.reject_if = {R::Empty, R::MultiLine, R::OverLength};
      break;
    case TemplateName::GenerateQuestions:
      p.reject_if = {R::Empty};
      break;
    case TemplateName::TranslatePoint:
      p.reject_if = {R::Empty, R::MultiLine, R::OverLength, R::ContainsQuestionMark, R::MissingName};
      break;
    case TemplateName::Comment:
      p.reject_if = {R::Empty, R::MultiLine, R::OverLength, R::ForbiddenPhrase, R::ContainsQuestionMark, R::NoEcho};
      break;
    case TemplateName::ExtractInfo:
      p.reject_if = {R::Empty, R::UngroundedNumber};
      break;
    case TemplateName::RecommendAppeal:
      p.reject_if = {R::Empty, R::MultiLine, R::OverLength, R::ContainsQuestionMark, R::UngroundedNumber};
      break;
    case TemplateName::RecommendUtterance:
      p.reject_if = {R::Empty, R::OverLength, R::ForbiddenPhrase, R::ContainsQuestionMark, R::UngroundedNumber};
      break;
    case TemplateName::CounterUtterance:
      p.reject_if = {R::Empty,           R::OverLength,       R::ForbiddenPhrase, R::ContainsQuestionMark,
                     R::UngroundedNumber, R::MissingName, R::EndorsesOther};
      break;
    case TemplateName::QaAnswer:
      p.reject_if = {R::Empty, R::OverLength, R::ForbiddenPhrase, R::UngroundedNumber};
      break;
    case TemplateName::ClosingNarration:
      p.reject_if = {R::Empty,           R::OverLength, R::ForbiddenPhrase, R::ContainsQuestionMark,
                     R::UngroundedNumber, R::MentionsOther};
      break;
    case TemplateName::KanaNormalize:
      p.reject_if = {R::Empty, R::MultiLine};
      break;
  }
  return p;
}

std::string format_hits(const std::vector<sightdb::SearchHit>& hits) {
  std::string out;
  for (const auto& h : hits) {
    if (!out.empty()) out += "\n";
    out += std::string(sightdb::field_label(h.field)) + ": " + text::collapse_whitespace(h.text);
  }
  return out;
}

Gateway::Gateway(const TemplatePack& pack, GenBackend& backend, GatewayConfig config)
    : pack_(&pack), backend_(&backend), config_(config) {
  if (config_.max_retries < 1) throw ConfigError("max_retries must be >= 1");
}

FilterContext Gateway::base_context(TemplateName name) const {
  FilterContext ctx;
  ctx.max_length = pack_->get(name).max_length;
  ctx.forbidden = pack_->forbidden_phrases();
  return ctx;
}

Completion Gateway::complete_with_policy(TemplateName name, const Bindings& bindings, const FilterPolicy& policy,
                                         const FilterContext& ctx, std::string fallback,
                                         GenerationMetrics* metrics) const {
  const auto& tmpl = pack_->get(name);
  auto prompt = render(tmpl, bindings);
  Completion c;
  for (int attempt = 0; attempt < policy.max_retries; ++attempt) {
    GenRequest req;
    req.prompt = prompt;
    req.params.temperature = tmpl.temperature;
    req.params.max_length = ctx.max_length > 0 ? ctx.max_length : tmpl.max_length;
    req.params.stop = tmpl.stop;
    req.params.seed = config_.base_seed + static_cast<std::uint64_t>(attempt);
    req.task = name;
    req.bindings = bindings;
    ++c.attempts;
    if (metrics) ++metrics->backend_calls;
    std::string out;
    try {
      out = text::trim(apply_stop(backend_->complete(req), tmpl.stop));
    } catch (const std::exception&) {
      ++c.transport_failures;
      if (metrics) ++metrics->transport_failures;
      continue;
    }
    if (auto r = check(policy, ctx, out)) {
      c.rejections.push_back(*r);
      if (metrics) ++metrics->rejections;
      continue;
    }
    c.text = std::move(out);
    c.provenance = Provenance::Generated;
    return c;
  }
  if (metrics) ++metrics->fallbacks;
  c.text = std::move(fallback);
  c.provenance = Provenance::Fixed;
  return c;
}

AgentTurn Gateway::generate_icebreak_question(std::string_view client_context, std::string_view answer,
                                              GenerationMetrics* metrics) const {
  auto name = TemplateName::IcebreakQuestion;
  Bindings b{{"client", std::string(client_context)}, {"answer", text::trim(answer)}};
  auto c = complete_with_policy(name, b, default_policy(name, config_.max_retries), base_context(name),
                                fill(pack_->get(name).fallback, b), metrics);
  return make_turn(std::move(c.text), c.provenance);
}

AgentTurn Gateway::generate_icebreak_comment(std::string_view question, std::string_view answer,
                                             GenerationMetrics* metrics) const {
  auto name = TemplateName::IcebreakComment;
  Bindings b{{"question", std::string(question)}, {"answer", text::trim(answer)}};
  auto c = complete_with_policy(name, b, default_policy(name, config_.max_retries), base_context(name),
                                fill(pack_->get(name).fallback, b), metrics);
  return make_turn(std::move(c.text), c.provenance);
}

std::string Gateway::summarize(std::string_view name, std::string_view summary_long, GenerationMetrics* metrics) const {
  auto body = text::collapse_whitespace(summary_long);
  if (body.empty()) throw CorpusError({"sight '" + std::string(name) + "': empty text cannot be summarized"});
  auto tname = TemplateName::Summarize;
  Bindings b{{"name", std::string(name)}, {"summary_long", body}};
  auto ctx = base_context(tname);
  ctx.max_length = config_.summary_budget;
  auto first = text::first_sentence(body);
  if (first.find(name) == std::string::npos) first = std::string(name) + ": " + first;
  auto fallback = text::truncate_codepoints(first, static_cast<std::size_t>(config_.summary_budget));
  auto c = complete_with_policy(tname, b, default_policy(tname, config_.max_retries), ctx, fallback, metrics);
  return c.text;
}

std::vector<std::string> Gateway::generate_questions(std::string_view name, std::string_view summary_one_line,
                                                     const std::function<bool(std::string_view)>& well_formed, int n,
                                                     GenerationMetrics* metrics) const {
  auto tname = TemplateName::GenerateQuestions;
  Bindings b{{"name", std::string(name)}, {"summary", std::string(summary_one_line)}, {"n", std::to_string(n)}};
  auto ctx = base_context(tname);
  ctx.max_length = 0;
  auto c = complete_with_policy(tname, b, default_policy(tname, config_.max_retries), ctx, "", metrics);
  std::vector<std::string> out;
  std::size_t pos = 0;
  const auto& raw = c.text;
  while (pos < raw.size() && static_cast<int>(out.size()) < n) {
    auto nl = raw.find('\n', pos);
    if (nl == std::string::npos) nl = raw.size();
    auto line = text::trim(std::string_view(raw).substr(pos, nl - pos));
    pos = nl + 1;
    // bullets and "1." style numbering
    while (!line.empty() && (line[0] == '-' || line[0] == '*' || line[0] == '.' || (line[0] >= '0' && line[0] <= '9'))) {
      line = text::trim(line.substr(1));
    }
    if (line.empty() || !well_formed(line)) continue;
    out.push_back(line);
  }
  return out;
}

std::string Gateway::translate_point(std::string_view name, std::string_view question,
                                     GenerationMetrics* metrics) const {
  auto tname = TemplateName::TranslatePoint;
  Bindings b{{"name", std::string(name)}, {"question", std::string(question)}};
  auto ctx = base_context(tname);
  ctx.required_names = {std::string(name)};
  auto c = complete_with_policy(tname, b, default_policy(tname, config_.max_retries), ctx,
                                fill(pack_->get(tname).fallback, b), metrics);
  return c.text;
}

AgentTurn Gateway::generate_comment(std::string_view question, std::string_view answer,
                                    GenerationMetrics* metrics) const {
  auto tname = TemplateName::Comment;
  Bindings b{{"question", std::string(question)}, {"answer", text::trim(answer)}};
  auto ctx = base_context(tname);
  ctx.echo_source = std::string(answer);
  auto c = complete_with_policy(tname, b, default_policy(tname, config_.max_retries), ctx,
                                fill(pack_->get(tname).fallback, b), metrics);
  return make_turn(std::move(c.text), c.provenance);
}

AgentTurn Gateway::extract_info(const std::vector<sightdb::SearchHit>& hits, std::string_view question,
                                GenerationMetrics* metrics) const {
  if (hits.empty()) throw std::invalid_argument("extract_info needs at least one hit");
  auto tname = TemplateName::ExtractInfo;
  Bindings b{{"info", format_hits(hits)}, {"question", std::string(question)}};
  auto ctx = base_context(tname);
  for (const auto& h : hits) ctx.grounding.push_back(h.text);
  auto c = complete_with_policy(tname, b, default_policy(tname, config_.max_retries), ctx, hits.front().text, metrics);
  return make_turn(std::move(c.text), c.provenance == Provenance::Fixed ? Provenance::Retrieved : c.provenance);
}

std::string Gateway::kana_normalize(std::string_view input, GenerationMetrics* metrics) const {
  const auto& table = pack_->ambiguous_readings();
  if (table.empty()) return std::string(input);
  auto tname = TemplateName::KanaNormalize;
  auto policy = default_policy(tname, config_.max_retries);
  auto ctx = base_context(tname);
  constexpr std::size_t kContext = 12;

  std::string out;
  std::size_t pos = 0;
  while (pos < input.size()) {
    const std::pair<const std::string, std::vector<std::string>>* match = nullptr;
    for (const auto& entry : table) {
      if (!entry.first.empty() && input.substr(pos).starts_with(entry.first)) {
        match = &entry;
        break;
      }
    }
    if (!match) {
      out.push_back(input[pos]);
      ++pos;
      continue;
    }
    auto before_cps = text::decode_utf8(input.substr(0, pos));
    if (before_cps.size() > kContext) before_cps.erase(before_cps.begin(), before_cps.end() - kContext);
    auto after = text::truncate_codepoints(input.substr(pos + match->first.size()), kContext);
    Bindings b{{"before", text::encode_utf8(before_cps)}, {"char", match->first}, {"after", after}};
    auto c = complete_with_policy(tname, b, policy, ctx, match->first, metrics);
    const auto& allowed = match->second;
    bool ok = std::find(allowed.begin(), allowed.end(), c.text) != allowed.end();
    out += ok ? c.text : match->first;
    pos += match->first.size();
  }
  return out;
}

}  // namespace tourdesk::llm
