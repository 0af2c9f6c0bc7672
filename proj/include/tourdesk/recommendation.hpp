#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "tourdesk/interview.hpp"
#include "tourdesk/llm/gateway.hpp"
#include "tourdesk/sightdb.hpp"
#include "tourdesk/turn.hpp"

// Recommendation phase: point selection, the appeal sentence, the recommending
// utterance and the counter-recommendation for the other candidate.
namespace tourdesk::recommendation {

enum class Origin { CustomerDependent, CustomerIndependent };

std::string_view to_string(Origin o);

struct RecommendationPoint {
  std::string text;
  Origin origin = Origin::CustomerIndependent;
  // "loc:<index>" for interview answers, else the feature name
  std::string source;

  bool operator==(const RecommendationPoint&) const = default;
};

struct RecommendationBundle {
  std::string sight_id;
  std::vector<RecommendationPoint> points;
  std::vector<sightdb::SearchHit> search_context;
  std::string appeal;
};

inline constexpr std::size_t kMaxPoints = 2;

// Points from "yes" answers to the sight's location-wise questions, in question
// order, then feature points (popularity > price > proximity > indoor), cut to
// two. Feature sentences come from the pack's point_* phrases.
std::vector<RecommendationPoint> select_points(const interview::CustomerProfile& profile,
                                               const interview::LocWiseQuestionSet& loc,
                                               const sightdb::DerivedFeatures& features,
                                               const sightdb::SightRecord& record, const llm::TemplatePack& pack);

// Candidate feature points in priority order before truncation.
std::vector<RecommendationPoint> feature_points(const sightdb::DerivedFeatures& features,
                                                const sightdb::SightRecord& record, const llm::TemplatePack& pack);

// "This place is appealing because ..." Throws CorpusError for an empty summary.
std::string build_appeal(const llm::Gateway& gateway, std::string_view name, std::string_view summary_one_line,
                         llm::GenerationMetrics* metrics = nullptr);

// Hits for each point text used as a query, restricted to the sight,
// de-duplicated, in point order.
std::vector<sightdb::SearchHit> gather_context(const sightdb::Catalog& catalog, std::string_view sight_id,
                                               const std::vector<RecommendationPoint>& points, int k = 3);

// Fixed frame, appeal, then the generated explanation. With no points, or when
// generation fails, the turn is the frame and appeal alone.
AgentTurn recommend_utterance(const llm::Gateway& gateway, const sightdb::SightRecord& record,
                              std::string_view summary_one_line, const RecommendationBundle& bundle,
                              llm::GenerationMetrics* metrics = nullptr);

// Up to two unfavorable features of the other sight as short clauses.
std::vector<std::string> weaknesses(const sightdb::DerivedFeatures& features, const llm::TemplatePack& pack);

// Explains why the other sight is the weaker choice and ends by endorsing the
// recommended one. Uses features only, never the customer's answers.
AgentTurn counter_utterance(const llm::Gateway& gateway, const sightdb::Catalog& catalog,
                            const sightdb::SightRecord& other, const sightdb::DerivedFeatures& other_features,
                            std::string_view recommended_name, llm::GenerationMetrics* metrics = nullptr);

}  // namespace tourdesk::recommendation
