#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "tourdesk/llm/backend.hpp"
#include "tourdesk/llm/filter.hpp"
#include "tourdesk/llm/template.hpp"
#include "tourdesk/sightdb.hpp"
#include "tourdesk/turn.hpp"

namespace tourdesk::llm {

struct GatewayConfig {
  int max_retries = 2;
  int summary_budget = 120;  // code points of a one-line summary
  std::uint64_t base_seed = 0;
};

// Per-session generation counters.
struct GenerationMetrics {
  int backend_calls = 0;
  int rejections = 0;
  int transport_failures = 0;
  int fallbacks = 0;

  bool operator==(const GenerationMetrics&) const = default;
};

struct Completion {
  std::string text;
  Provenance provenance = Provenance::Generated;
  int attempts = 0;
  std::vector<Reject> rejections;  // filter rejections, in attempt order
  int transport_failures = 0;

  int rejected() const { return static_cast<int>(rejections.size()) + transport_failures; }
};

// Default reject predicates for each template.
FilterPolicy default_policy(TemplateName name, int max_retries);

// Prompt rendering, generation and output filtering for every language task
// in the consultation.
class Gateway {
 public:
  Gateway(const TemplatePack& pack, GenBackend& backend, GatewayConfig config = {});

  const TemplatePack& pack() const { return *pack_; }
  GenBackend& backend() const { return *backend_; }
  const GatewayConfig& config() const { return config_; }

  FilterContext base_context(TemplateName name) const;

  // render -> complete -> filter, at most policy.max_retries backend calls;
  // the fallback is returned with provenance Fixed after that many rejections.
  // Transport failures count as rejections.
  Completion complete_with_policy(TemplateName name, const Bindings& bindings, const FilterPolicy& policy,
                                  const FilterContext& ctx, std::string fallback,
                                  GenerationMetrics* metrics = nullptr) const;

  AgentTurn generate_icebreak_question(std::string_view client_context, std::string_view answer,
                                       GenerationMetrics* metrics = nullptr) const;
  AgentTurn generate_icebreak_comment(std::string_view question, std::string_view answer,
                                      GenerationMetrics* metrics = nullptr) const;
  // Throws CorpusError on empty input.
  std::string summarize(std::string_view name, std::string_view summary_long,
                        GenerationMetrics* metrics = nullptr) const;
  // Up to n lines; only lines accepted by `well_formed` are kept.
  std::vector<std::string> generate_questions(std::string_view name, std::string_view summary_one_line,
                                              const std::function<bool(std::string_view)>& well_formed, int n = 10,
                                              GenerationMetrics* metrics = nullptr) const;
  // "Do you like X?" -> "<sight> is recommended for people who like X."
  std::string translate_point(std::string_view name, std::string_view question,
                              GenerationMetrics* metrics = nullptr) const;
  AgentTurn generate_comment(std::string_view question, std::string_view answer,
                             GenerationMetrics* metrics = nullptr) const;
  // Text drawn from the hits answering the question; falls back to the top hit.
  // Throws std::invalid_argument when hits is empty.
  AgentTurn extract_info(const std::vector<sightdb::SearchHit>& hits, std::string_view question,
                         GenerationMetrics* metrics = nullptr) const;
  // Replaces each ambiguous character with a reading chosen in context; every
  // other byte is left untouched.
  std::string kana_normalize(std::string_view text, GenerationMetrics* metrics = nullptr) const;

 private:
  const TemplatePack* pack_;
  GenBackend* backend_;
  GatewayConfig config_;
};

// "Label: text" lines for a prompt's information block.
std::string format_hits(const std::vector<sightdb::SearchHit>& hits);

}  // namespace tourdesk::llm
