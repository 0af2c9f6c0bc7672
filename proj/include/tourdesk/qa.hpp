#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tourdesk/interview.hpp"
#include "tourdesk/llm/gateway.hpp"
#include "tourdesk/sightdb.hpp"
#include "tourdesk/turn.hpp"

// Open question answering over both candidate sights.
namespace tourdesk::qa {

struct Intent {
  interview::YesNo answer = interview::YesNo::Unknown;
  // set when the customer asked directly instead of answering yes/no
  std::optional<std::string> question;
};

// Reply to "do you have any questions?". A direct question counts as yes and
// is kept as the question to answer.
Intent wants_question(const interview::AnswerLexicon& lexicon, std::string_view utterance);

struct SightSide {
  std::string sight_id;
  std::string name;
  std::string summary;  // one-line summary
  std::vector<sightdb::SearchHit> hits;
};

struct QaContext {
  SightSide first;
  SightSide second;
  std::string recommended;  // sight id, one of the two sides
  std::string question;
};

struct QaOptions {
  int k = 5;
  std::size_t context_budget = 1200;  // code points of hit text per sight
};

// Top-k hits for the question restricted to each sight; lowest-scored hits
// are dropped once a side exceeds the context budget.
QaContext assemble(const sightdb::Catalog& catalog, const std::string& a, const std::string& b,
                   const std::string& recommended, std::string_view question, const QaOptions& options = {});

// Field both sides returned hits for, among the fields the question asks about.
std::optional<sightdb::Field> comparable_field(const QaContext& ctx);

// Grounded answer; every number it states comes from the hits. Ends with a
// steer toward the recommended sight when both sides answered the asked
// attribute. No hits on either side gives a fixed "no information" answer.
AgentTurn answer(const llm::Gateway& gateway, const QaContext& ctx, llm::GenerationMetrics* metrics = nullptr);

}  // namespace tourdesk::qa
