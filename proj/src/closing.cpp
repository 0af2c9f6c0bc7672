#include "tourdesk/closing.hpp"

namespace tourdesk::closing {

ClosingContext make_context(const sightdb::Catalog& catalog, const std::string& recommended,
                            const std::string& other, Duration elapsed) {
  const auto& rec = catalog.at(recommended);
  return {recommended, rec.name, rec.summary_one_line, catalog.positive_reviews(recommended, 3),
          catalog.at(other).name, elapsed};
}

AgentTurn closing_narration(const llm::Gateway& gateway, const ClosingContext& ctx, llm::GenerationMetrics* metrics) {
  auto tname = llm::TemplateName::ClosingNarration;
  std::string reviews;
  for (const auto& r : ctx.positive_reviews) reviews += (reviews.empty() ? "- " : "\n- ") + r;
  llm::Bindings b{{"name", ctx.name}, {"summary", ctx.summary}, {"reviews", reviews}};
  auto fctx = gateway.base_context(tname);
  fctx.other_name = ctx.other_name;
  fctx.grounding = ctx.positive_reviews;
  fctx.grounding.push_back(ctx.summary);
  auto c = gateway.complete_with_policy(tname, b, llm::default_policy(tname, gateway.config().max_retries), fctx,
                                        llm::fill(gateway.pack().get(tname).fallback, b), metrics);
  return make_turn(std::move(c.text), c.provenance);
}

std::vector<AgentTurn> closing_turns(const llm::Gateway& gateway, const ClosingContext& ctx,
                                     llm::GenerationMetrics* metrics) {
  const auto& pack = gateway.pack();
  return {make_turn(pack.phrase("time_up"), Provenance::Fixed), closing_narration(gateway, ctx, metrics),
          make_turn(pack.phrase("farewell"), Provenance::Fixed)};
}

}  // namespace tourdesk::closing
