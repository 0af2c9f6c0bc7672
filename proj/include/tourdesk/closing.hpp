#pragma once

#include <string>
#include <vector>

#include "tourdesk/clock.hpp"
#include "tourdesk/llm/gateway.hpp"
#include "tourdesk/sightdb.hpp"
#include "tourdesk/turn.hpp"

namespace tourdesk::closing {

struct ClosingContext {
  std::string sight_id;
  std::string name;
  std::string summary;  // one-line summary
  std::vector<std::string> positive_reviews;  // at most 3, rating >= 4
  std::string other_name;  // never mentioned by the narration
  Duration elapsed{0};
};

ClosingContext make_context(const sightdb::Catalog& catalog, const std::string& recommended,
                            const std::string& other, Duration elapsed);

// Experience narration drawn from the reviews, or from the summary when there are none.
AgentTurn closing_narration(const llm::Gateway& gateway, const ClosingContext& ctx,
                            llm::GenerationMetrics* metrics = nullptr);

// Time notice, narration, farewell.
std::vector<AgentTurn> closing_turns(const llm::Gateway& gateway, const ClosingContext& ctx,
                                     llm::GenerationMetrics* metrics = nullptr);

}  // namespace tourdesk::closing
