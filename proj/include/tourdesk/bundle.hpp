#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>

#include "tourdesk/interview.hpp"
#include "tourdesk/llm/gateway.hpp"
#include "tourdesk/sightdb.hpp"

// Offline precomputation: one-line summaries, location-wise questions, their
// recommendation points and the appeal sentence, built once per corpus so no
// dialog turn has to wait for them.
namespace tourdesk::bundle {

inline constexpr std::string_view kFormat = "tourdesk-bundle";
inline constexpr int kVersion = 1;

struct PreparedSight {
  std::string appeal;
  interview::LocWiseQuestionSet loc;  // points filled, one per question

  bool operator==(const PreparedSight&) const = default;
};

struct Bundle {
  sightdb::Catalog catalog;  // records carry summary_one_line
  std::map<std::string, PreparedSight, std::less<>> prepared;

  const PreparedSight& at(std::string_view sight_id) const;
  bool operator==(const Bundle&) const = default;
};

// Runs summarize, generate_questions, question selection, point translation
// and the appeal for every sight. Problems for all sights are collected into
// one CorpusError.
Bundle build(sightdb::Catalog catalog, const llm::Gateway& gateway, const interview::AnswerLexicon& lexicon,
             std::size_t questions_per_sight = 3, llm::GenerationMetrics* metrics = nullptr);

void write(const Bundle& b, std::ostream& out);
void save(const Bundle& b, const std::filesystem::path& path);
Bundle read(std::istream& in, const sightdb::FeatureThresholds& thresholds = {},
            text::TokenizeMode mode = text::TokenizeMode::Words);
Bundle load(const std::filesystem::path& path, const sightdb::FeatureThresholds& thresholds = {},
            text::TokenizeMode mode = text::TokenizeMode::Words);

}  // namespace tourdesk::bundle
