#include "tourdesk/bundle.hpp"

#include <fstream>
#include <istream>
#include <ostream>

#include "tourdesk/error.hpp"
#include "tourdesk/recommendation.hpp"

namespace tourdesk::bundle {

using nlohmann::json;
using nlohmann::ordered_json;

const PreparedSight& Bundle::at(std::string_view sight_id) const {
  auto it = prepared.find(sight_id);
  if (it == prepared.end()) throw ConfigError("no prepared material for sight '" + std::string(sight_id) + "'");
  return it->second;
}

Bundle build(sightdb::Catalog catalog, const llm::Gateway& gateway, const interview::AnswerLexicon& lexicon,
             std::size_t questions_per_sight, llm::GenerationMetrics* metrics) {
  std::vector<std::string> problems;
  std::map<std::string, PreparedSight, std::less<>> prepared;
  auto well_formed = [&](std::string_view q) { return lexicon.is_loc_question(q); };
  // copy ids first: set_summary_one_line touches the records
  std::vector<std::pair<std::string, std::string>> sights;
  for (const auto& r : catalog.records()) sights.emplace_back(r.sight_id, r.name);
  for (const auto& [id, name] : sights) {
    try {
      auto summary = gateway.summarize(name, catalog.at(id).summary_long, metrics);
      catalog.set_summary_one_line(id, summary);
      auto candidates = gateway.generate_questions(name, summary, well_formed, 10, metrics);
      PreparedSight p;
      p.loc = interview::select_loc_questions(id, candidates, lexicon, questions_per_sight);
      for (const auto& q : p.loc.questions) p.loc.points.push_back(gateway.translate_point(name, q, metrics));
      p.appeal = recommendation::build_appeal(gateway, name, summary, metrics);
      prepared.emplace(id, std::move(p));
    } catch (const CorpusError& e) {
      problems.insert(problems.end(), e.diagnostics().begin(), e.diagnostics().end());
    }
  }
  if (!problems.empty()) throw CorpusError(std::move(problems));
  return Bundle{std::move(catalog), std::move(prepared)};
}

void write(const Bundle& b, std::ostream& out) {
  ordered_json doc;
  doc["format"] = kFormat;
  doc["version"] = kVersion;
  doc["sights"] = ordered_json::array();
  for (const auto& r : b.catalog.records()) {
    const auto& p = b.at(r.sight_id);
    ordered_json s;
    s["record"] = sightdb::to_json(r, true);
    s["appeal"] = p.appeal;
    s["loc_questions"] = p.loc.questions;
    s["loc_points"] = p.loc.points;
    doc["sights"].push_back(std::move(s));
  }
  out << doc.dump(2) << "\n";
  if (!out) throw IoError("failed writing bundle");
}

void save(const Bundle& b, const std::filesystem::path& path) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + tmp.string() + " for writing");
    write(b, out);
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("cannot move bundle into place at " + path.string() + ": " + ec.message());
}

Bundle read(std::istream& in, const sightdb::FeatureThresholds& thresholds, text::TokenizeMode mode) {
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw CorpusError({std::string("bundle is not valid JSON: ") + e.what()});
  }
  std::vector<std::string> problems;
  if (doc.value("format", "") != kFormat) problems.push_back("bundle: format must be \"" + std::string(kFormat) + "\"");
  if (doc.value("version", 0) != kVersion) problems.push_back("bundle: unsupported version");
  if (!doc.contains("sights") || !doc["sights"].is_array()) problems.push_back("bundle: missing sights array");
  if (!problems.empty()) throw CorpusError(std::move(problems));

  std::vector<sightdb::SightRecord> records;
  std::map<std::string, PreparedSight, std::less<>> prepared;
  std::size_t i = 0;
  for (const auto& s : doc["sights"]) {
    auto where = "bundle sight " + std::to_string(i++);
    try {
      auto rec = sightdb::record_from_json(s.at("record"), true);
      PreparedSight p;
      p.appeal = s.at("appeal").get<std::string>();
      p.loc.sight_id = rec.sight_id;
      p.loc.questions = s.at("loc_questions").get<std::vector<std::string>>();
      p.loc.points = s.at("loc_points").get<std::vector<std::string>>();
      if (p.loc.questions.size() != p.loc.points.size()) {
        problems.push_back(where + ": loc_questions and loc_points differ in length");
        continue;
      }
      if (p.loc.questions.size() > 3) problems.push_back(where + ": more than 3 location-wise questions");
      if (rec.summary_one_line.empty()) problems.push_back(where + ": missing summary_one_line");
      prepared.emplace(rec.sight_id, std::move(p));
      records.push_back(std::move(rec));
    } catch (const std::exception& e) {
      problems.push_back(where + ": " + e.what());
    }
  }
  if (!problems.empty()) throw CorpusError(std::move(problems));
  return Bundle{sightdb::Catalog::from_records(std::move(records), thresholds, mode), std::move(prepared)};
}

Bundle load(const std::filesystem::path& path, const sightdb::FeatureThresholds& thresholds, text::TokenizeMode mode) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open bundle " + path.string());
  return read(in, thresholds, mode);
}

}  // namespace tourdesk::bundle
