#include "tourdesk/recommendation.hpp"

#include <algorithm>

#include "tourdesk/error.hpp"
#include "tourdesk/text.hpp"

namespace tourdesk::recommendation {

std::string_view to_string(Origin o) {
  return o == Origin::CustomerDependent ? "customer_dependent" : "customer_independent";
}

namespace {

std::string strip_name_prefix(std::string_view summary, std::string_view name) {
  std::string s = text::trim(summary);
  std::string prefix = std::string(name) + ":";
  if (!name.empty() && s.starts_with(prefix)) s = text::trim(s.substr(prefix.size()));
  return s;
}

}  // namespace

std::vector<RecommendationPoint> feature_points(const sightdb::DerivedFeatures& f, const sightdb::SightRecord& record,
                                                const llm::TemplatePack& pack) {
  using sightdb::PriceBand;
  llm::Bindings b{{"name", record.name}, {"n_reviews", std::to_string(record.n_reviews)}};
  std::vector<RecommendationPoint> out;
  auto add = [&](std::string_view phrase, std::string source) {
    out.push_back({pack.phrase(phrase, b), Origin::CustomerIndependent, std::move(source)});
  };
  if (f.popularity == sightdb::Popularity::High) add("point_popular", "popularity");
  if (f.price_band == PriceBand::Free) add("point_free", "price_band");
  if (f.price_band == PriceBand::Low) add("point_cheap", "price_band");
  if (f.station_proximity == sightdb::Proximity::Near) add("point_near", "station_proximity");
  // rainy-day default: only indoor sights earn the point
  if (f.indoor == true) add("point_indoor", "indoor");
  return out;
}

std::vector<RecommendationPoint> select_points(const interview::CustomerProfile& profile,
                                               const interview::LocWiseQuestionSet& loc,
                                               const sightdb::DerivedFeatures& features,
                                               const sightdb::SightRecord& record, const llm::TemplatePack& pack) {
  std::vector<RecommendationPoint> out;
  for (std::size_t i = 0; i < loc.questions.size() && i < loc.points.size(); ++i) {
    auto it = profile.loc_answers.find({loc.sight_id, static_cast<int>(i)});
    if (it == profile.loc_answers.end() || !it->second) continue;
    out.push_back({loc.points[i], Origin::CustomerDependent, "loc:" + std::to_string(i)});
  }
  if (out.size() < kMaxPoints) {
    for (auto& p : feature_points(features, record, pack)) out.push_back(std::move(p));
  }
  if (out.size() > kMaxPoints) out.resize(kMaxPoints);
  return out;
}

std::string build_appeal(const llm::Gateway& gateway, std::string_view name, std::string_view summary_one_line,
                         llm::GenerationMetrics* metrics) {
  auto body = strip_name_prefix(summary_one_line, name);
  if (body.empty()) throw CorpusError({"sight '" + std::string(name) + "': empty summary, no appeal possible"});
  const auto& pack = gateway.pack();
  auto tname = llm::TemplateName::RecommendAppeal;
  llm::Bindings b{{"name", std::string(name)}, {"summary", std::string(summary_one_line)}};
  auto ctx = gateway.base_context(tname);
  ctx.grounding = {std::string(summary_one_line)};
  auto fallback = pack.phrase("appeal_fallback", {{"summary", body}});
  auto c = gateway.complete_with_policy(tname, b, llm::default_policy(tname, gateway.config().max_retries), ctx,
                                        fallback, metrics);
  if (c.provenance == Provenance::Fixed) return c.text;
  return pack.phrase("appeal_stem") + " " + c.text;
}

std::vector<sightdb::SearchHit> gather_context(const sightdb::Catalog& catalog, std::string_view sight_id,
                                               const std::vector<RecommendationPoint>& points, int k) {
  std::vector<sightdb::SearchHit> out;
  std::optional<std::string> filter{std::string(sight_id)};
  for (const auto& p : points) {
    for (auto& h : catalog.search(p.text, filter, k)) {
      bool seen = std::any_of(out.begin(), out.end(),
                              [&](const sightdb::SearchHit& o) { return o.field == h.field && o.text == h.text; });
      if (!seen) out.push_back(std::move(h));
    }
  }
  return out;
}

AgentTurn recommend_utterance(const llm::Gateway& gateway, const sightdb::SightRecord& record,
                              std::string_view summary_one_line, const RecommendationBundle& bundle,
                              llm::GenerationMetrics* metrics) {
  const auto& pack = gateway.pack();
  auto head = pack.phrase("recommend_frame", {{"name", record.name}});
  if (!bundle.appeal.empty()) head += " " + bundle.appeal;
  if (bundle.points.empty()) return make_turn(head, Provenance::Fixed);

  std::string points;
  for (const auto& p : bundle.points) points += (points.empty() ? "- " : "\n- ") + p.text;
  auto tname = llm::TemplateName::RecommendUtterance;
  llm::Bindings b{{"name", record.name},
                  {"summary", std::string(summary_one_line)},
                  {"data", llm::format_hits(bundle.search_context)},
                  {"points", points}};
  auto ctx = gateway.base_context(tname);
  ctx.grounding = {std::string(summary_one_line), points, bundle.appeal};
  for (const auto& h : bundle.search_context) ctx.grounding.push_back(h.text);
  auto c = gateway.complete_with_policy(tname, b, llm::default_policy(tname, gateway.config().max_retries), ctx, "",
                                        metrics);
  if (c.provenance == Provenance::Fixed) return make_turn(head, Provenance::Fixed);
  return make_turn(head + " " + c.text, Provenance::Generated);
}

std::vector<std::string> weaknesses(const sightdb::DerivedFeatures& f, const llm::TemplatePack& pack) {
  std::vector<std::string> out;
  if (f.popularity == sightdb::Popularity::Low) out.push_back(pack.phrase("weakness_unpopular"));
  if (f.price_band == sightdb::PriceBand::High) out.push_back(pack.phrase("weakness_expensive"));
  if (f.station_proximity == sightdb::Proximity::Far) out.push_back(pack.phrase("weakness_far"));
  if (out.size() > kMaxPoints) out.resize(kMaxPoints);
  return out;
}

AgentTurn counter_utterance(const llm::Gateway& gateway, const sightdb::Catalog& catalog,
                            const sightdb::SightRecord& other, const sightdb::DerivedFeatures& other_features,
                            std::string_view recommended_name, llm::GenerationMetrics* metrics) {
  const auto& pack = gateway.pack();
  auto tname = llm::TemplateName::CounterUtterance;
  llm::Bindings names{{"other_name", other.name}, {"recommended_name", std::string(recommended_name)}};
  auto fallback = llm::fill(pack.get(tname).fallback, names);
  auto weak = weaknesses(other_features, pack);
  if (weak.empty()) return make_turn(fallback, Provenance::Fixed);

  std::string joined;
  for (const auto& w : weak) joined += (joined.empty() ? "" : pack.phrase("weakness_joiner")) + w;
  std::vector<sightdb::SearchHit> hits;
  std::optional<std::string> filter{other.sight_id};
  for (const auto& w : weak) {
    for (auto& h : catalog.search(w, filter, 2)) {
      if (std::find(hits.begin(), hits.end(), h) == hits.end()) hits.push_back(std::move(h));
    }
  }
  auto b = names;
  b.emplace("weaknesses", joined);
  b.emplace("data", llm::format_hits(hits));
  auto ctx = gateway.base_context(tname);
  ctx.required_names = {other.name, std::string(recommended_name)};
  ctx.endorsed_name = std::string(recommended_name);
  ctx.other_name = other.name;
  ctx.grounding = {joined};
  for (const auto& h : hits) ctx.grounding.push_back(h.text);
  auto c = gateway.complete_with_policy(tname, b, llm::default_policy(tname, gateway.config().max_retries), ctx,
                                        fallback, metrics);
  return make_turn(c.text, c.provenance);
}

}  // namespace tourdesk::recommendation
