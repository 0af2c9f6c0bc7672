#include "tourdesk/qa.hpp"

#include <algorithm>

#include "tourdesk/text.hpp"

namespace tourdesk::qa {

Intent wants_question(const interview::AnswerLexicon& lexicon, std::string_view utterance) {
  Intent out;
  auto t = text::trim(utterance);
  if (t.empty()) return out;
  if (lexicon.is_interrogative(t)) {
    out.answer = interview::YesNo::Yes;
    out.question = t;
    return out;
  }
  out.answer = lexicon.classify_yes_no(t);
  return out;
}

namespace {

SightSide side(const sightdb::Catalog& catalog, const std::string& id, std::string_view question,
               const QaOptions& options) {
  const auto& rec = catalog.at(id);
  SightSide s{id, rec.name, rec.summary_one_line, catalog.search(question, id, options.k)};
  std::size_t used = 0;
  std::size_t keep = 0;
  for (; keep < s.hits.size(); ++keep) {
    used += text::codepoint_length(s.hits[keep].text);
    if (used > options.context_budget && keep > 0) break;
  }
  s.hits.resize(keep);
  return s;
}

bool has_field(const SightSide& s, sightdb::Field f) {
  return std::any_of(s.hits.begin(), s.hits.end(), [&](const sightdb::SearchHit& h) { return h.field == f; });
}

std::optional<int> price_of(const SightSide& s) {
  for (const auto& h : s.hits) {
    if (h.field != sightdb::Field::Charge) continue;
    if (auto p = sightdb::parse_adult_price_yen(h.text)) return p;
  }
  return std::nullopt;
}

}  // namespace

QaContext assemble(const sightdb::Catalog& catalog, const std::string& a, const std::string& b,
                   const std::string& recommended, std::string_view question, const QaOptions& options) {
  return {side(catalog, a, question, options), side(catalog, b, question, options), recommended,
          text::trim(question)};
}

std::optional<sightdb::Field> comparable_field(const QaContext& ctx) {
  for (auto f : sightdb::query_fields(ctx.question)) {
    if (f == sightdb::Field::Review) continue;
    if (has_field(ctx.first, f) && has_field(ctx.second, f)) return f;
  }
  return std::nullopt;
}

AgentTurn answer(const llm::Gateway& gateway, const QaContext& ctx, llm::GenerationMetrics* metrics) {
  const auto& pack = gateway.pack();
  if (ctx.first.hits.empty() && ctx.second.hits.empty()) return make_turn(pack.phrase("qa_no_info"), Provenance::Fixed);

  const bool first_recommended = ctx.recommended == ctx.first.sight_id;
  const auto& rec = first_recommended ? ctx.first : ctx.second;
  const auto& other = first_recommended ? ctx.second : ctx.first;

  auto tname = llm::TemplateName::QaAnswer;
  llm::Bindings b{{"name1", ctx.first.name},
                  {"summary1", ctx.first.summary},
                  {"data1", llm::format_hits(ctx.first.hits)},
                  {"name2", ctx.second.name},
                  {"summary2", ctx.second.summary},
                  {"data2", llm::format_hits(ctx.second.hits)},
                  {"recommended", rec.name},
                  {"question", ctx.question}};
  auto fctx = gateway.base_context(tname);
  for (const auto* s : {&ctx.first, &ctx.second}) {
    for (const auto& h : s->hits) fctx.grounding.push_back(h.text);
  }
  auto c = gateway.complete_with_policy(tname, b, llm::default_policy(tname, gateway.config().max_retries), fctx,
                                        llm::fill(pack.get(tname).fallback, b), metrics);
  if (c.provenance == Provenance::Fixed) return make_turn(c.text, c.provenance);

  auto text = c.text;
  if (auto field = comparable_field(ctx)) {
    std::string steer = pack.phrase("qa_steer", {{"recommended", rec.name}});
    if (*field == sightdb::Field::Charge) {
      auto pr = price_of(rec);
      auto po = price_of(other);
      if (pr && po && *pr < *po) steer = pack.phrase("qa_steer_cheaper", {{"recommended", rec.name}, {"other", other.name}});
    }
    text += " " + steer;
  }
  return make_turn(std::move(text), c.provenance);
}

}  // namespace tourdesk::qa
