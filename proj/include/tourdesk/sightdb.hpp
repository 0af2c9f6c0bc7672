#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "tourdesk/text.hpp"

// Tourist-sight corpus: records, derived customer-independent features, and
// a small fielded lexical search index over the basic information and reviews.
namespace tourdesk::sightdb {

using TriState = std::optional<bool>;

struct Review {
  std::string text;
  int rating = 0;  // 1..5

  bool operator==(const Review&) const = default;
};

enum class PriceBand { Free, Low, Mid, High };
enum class Proximity { Near, Far, Unknown };
enum class Popularity { Low, Mid, High };

std::string_view to_string(PriceBand b);
std::string_view to_string(Proximity p);
std::string_view to_string(Popularity p);
std::optional<PriceBand> parse_price_band(std::string_view s);

struct SightRecord {
  std::string sight_id;
  std::string name;
  std::string summary_long;
  std::string summary_one_line;  // generated at corpus build
  std::string business_hours;
  std::string location;
  std::string access;
  std::string charge;
  std::vector<Review> reviews;
  std::optional<double> review_score;  // present iff n_reviews > 0
  int n_reviews = 0;
  TriState indoor;
  std::optional<double> distance_from_station_m;
  std::optional<PriceBand> price_band_override;

  bool operator==(const SightRecord&) const = default;
};

// Band cut-offs. Prices are adult admission in yen.
struct FeatureThresholds {
  int low_max_yen = 1000;
  int mid_max_yen = 3000;
  double near_max_m = 600.0;
  double walk_m_per_min = 80.0;
  int popularity_low_below = 30;
  int popularity_high_from = 300;
};

struct DerivedFeatures {
  PriceBand price_band = PriceBand::Mid;
  TriState indoor;
  Proximity station_proximity = Proximity::Unknown;
  Popularity popularity = Popularity::Low;
  std::optional<int> adult_price_yen;
  std::optional<double> distance_m;

  bool operator==(const DerivedFeatures&) const = default;
};

// Adult admission from free text such as "Adult: 1,000yen (...) Child: 700yen".
// 0 for explicitly free admission, nullopt when no amount is found.
std::optional<int> parse_adult_price_yen(std::string_view charge);

// Smallest "N-minute walk" / "徒歩N分" mention in an access description.
std::optional<double> parse_walk_minutes(std::string_view access);

DerivedFeatures derive_features(const SightRecord& record, const FeatureThresholds& thresholds = {});

enum class Field { BusinessHours, Location, Access, Charge, Review };
std::string_view to_string(Field f);
std::string_view field_label(Field f);

struct SearchHit {
  std::string sight_id;
  Field field = Field::BusinessHours;
  std::string text;
  double score = 0.0;

  bool operator==(const SearchHit&) const = default;
};

// Descending score, then field order, then text, then sight id.
bool hit_order(const SearchHit& a, const SearchHit& b);

// Fields whose vocabulary the query touches ("how much" -> charge, ...).
std::vector<Field> query_fields(std::string_view query);

double field_boost(Field f);

class SearchIndex {
 public:
  struct Document {
    std::string sight_id;
    Field field;
    std::string text;
    std::vector<std::string> tokens;  // unique
  };

  SearchIndex() = default;
  SearchIndex(const std::vector<SightRecord>& records, text::TokenizeMode mode);

  // Score = |query content tokens in doc| / |query content tokens| + boost of
  // the doc's field when the query uses that field's vocabulary. Hits need a
  // positive score.
  std::vector<SearchHit> search(std::string_view query, const std::optional<std::string>& sight_filter,
                                int k) const;

  const std::vector<Document>& documents() const { return docs_; }
  text::TokenizeMode mode() const { return mode_; }

 private:
  text::TokenizeMode mode_ = text::TokenizeMode::Words;
  std::vector<Document> docs_;
  std::unordered_map<std::string, std::vector<std::size_t>> postings_;
};

class Catalog {
 public:
  Catalog() = default;

  // Validates every record; collects all problems before throwing CorpusError.
  static Catalog from_records(std::vector<SightRecord> records, const FeatureThresholds& thresholds = {},
                              text::TokenizeMode mode = text::TokenizeMode::Words);
  static Catalog parse(std::istream& in, const FeatureThresholds& thresholds = {},
                       text::TokenizeMode mode = text::TokenizeMode::Words);
  static Catalog ingest(const std::filesystem::path& path, const FeatureThresholds& thresholds = {},
                        text::TokenizeMode mode = text::TokenizeMode::Words);

  // Corpus format: one JSON object per line, generated fields omitted.
  void serialize(std::ostream& out) const;

  const std::vector<SightRecord>& records() const { return records_; }
  std::size_t size() const { return records_.size(); }
  bool empty() const { return records_.empty(); }
  bool contains(std::string_view sight_id) const;
  const SightRecord& at(std::string_view sight_id) const;
  const DerivedFeatures& features(std::string_view sight_id) const;
  const FeatureThresholds& thresholds() const { return thresholds_; }
  const SearchIndex& index() const { return index_; }

  std::vector<SearchHit> search(std::string_view query, const std::optional<std::string>& sight_filter,
                                int k) const;

  // Up to k reviews rated >= 4: rating desc, then longer first.
  std::vector<std::string> positive_reviews(std::string_view sight_id, int k) const;

  // Replaces the generated one-line summary; the index is unaffected.
  void set_summary_one_line(std::string_view sight_id, std::string summary);

  bool operator==(const Catalog& other) const { return records_ == other.records_; }

 private:
  std::vector<SightRecord> records_;
  std::map<std::string, std::size_t, std::less<>> by_id_;
  std::vector<DerivedFeatures> features_;
  FeatureThresholds thresholds_;
  SearchIndex index_;
};

nlohmann::ordered_json to_json(const SightRecord& r, bool include_generated);
// Throws std::invalid_argument describing the first problem.
SightRecord record_from_json(const nlohmann::json& j, bool allow_generated);
// Empty when valid.
std::vector<std::string> validate(const SightRecord& r);

}  // namespace tourdesk::sightdb
