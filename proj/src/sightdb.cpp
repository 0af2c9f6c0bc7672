#include "tourdesk/sightdb.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <regex>
#include <set>
#include <sstream>

#include "tourdesk/error.hpp"

namespace tourdesk::sightdb {

using nlohmann::json;
using nlohmann::ordered_json;

std::string_view to_string(PriceBand b) {
  switch (b) {
    case PriceBand::Free: return "free";
    case PriceBand::Low: return "low";
    case PriceBand::Mid: return "mid";
    case PriceBand::High: return "high";
  }
  return "mid";
}

std::string_view to_string(Proximity p) {
  switch (p) {
    case Proximity::Near: return "near";
    case Proximity::Far: return "far";
    case Proximity::Unknown: return "unknown";
  }
  return "unknown";
}

std::string_view to_string(Popularity p) {
  switch (p) {
    case Popularity::Low: return "low";
    case Popularity::Mid: return "mid";
    case Popularity::High: return "high";
  }
  return "low";
}

std::optional<PriceBand> parse_price_band(std::string_view s) {
  for (auto b : {PriceBand::Free, PriceBand::Low, PriceBand::Mid, PriceBand::High}) {
    if (to_string(b) == s) return b;
  }
  return std::nullopt;
}

std::string_view to_string(Field f) {
  switch (f) {
    case Field::BusinessHours: return "business_hours";
    case Field::Location: return "location";
    case Field::Access: return "access";
    case Field::Charge: return "charge";
    case Field::Review: return "review";
  }
  return "review";
}

std::string_view field_label(Field f) {
  switch (f) {
    case Field::BusinessHours: return "Business hours";
    case Field::Location: return "Location";
    case Field::Access: return "Access";
    case Field::Charge: return "Charge";
    case Field::Review: return "Review";
  }
  return "Review";
}

// ---------------------------------------------------------------------------
// Feature derivation

namespace {

int parse_grouped_int(std::string s) {
  s.erase(std::remove(s.begin(), s.end(), ','), s.end());
  return std::stoi(s);
}

}  // namespace

std::optional<int> parse_adult_price_yen(std::string_view charge_raw) {
  auto charge = text::fold_fullwidth(charge_raw);
  static const std::regex amount_re(R"((?:¥\s*(\d{1,3}(?:,\d{3})+|\d+))|(?:(\d{1,3}(?:,\d{3})+|\d+)\s*(?:yen|JPY|円)))",
                                    std::regex::icase);
  static const std::regex adult_re(R"(adult|大人)", std::regex::icase);
  static const std::regex free_re(R"(\bfree\b|無料)", std::regex::icase);

  std::vector<std::pair<std::size_t, int>> amounts;
  for (auto it = std::sregex_iterator(charge.begin(), charge.end(), amount_re); it != std::sregex_iterator();
       ++it) {
    const auto& m = *it;
    std::string digits = m[1].matched ? m[1].str() : m[2].str();
    amounts.emplace_back(static_cast<std::size_t>(m.position(0)), parse_grouped_int(digits));
  }
  if (amounts.empty()) {
    if (std::regex_search(charge, free_re)) return 0;
    return std::nullopt;
  }
  std::smatch adult;
  if (std::regex_search(charge, adult, adult_re)) {
    auto at = static_cast<std::size_t>(adult.position(0));
    for (const auto& [pos, yen] : amounts) {
      if (pos >= at) return yen;
    }
  }
  return amounts.front().second;
}

std::optional<double> parse_walk_minutes(std::string_view access_raw) {
  auto access = text::fold_fullwidth(access_raw);
  static const std::regex walk_en(R"((\d+)\s*-?\s*(?:minute|min)s?\.?\s*walk)", std::regex::icase);
  static const std::regex walk_ja(R"(徒歩\s*(?:約\s*)?(\d+)\s*分)");
  std::optional<double> best;
  for (const auto* re : {&walk_en, &walk_ja}) {
    for (auto it = std::sregex_iterator(access.begin(), access.end(), *re); it != std::sregex_iterator(); ++it) {
      double minutes = std::stod((*it)[1].str());
      if (!best || minutes < *best) best = minutes;
    }
  }
  return best;
}

DerivedFeatures derive_features(const SightRecord& record, const FeatureThresholds& t) {
  DerivedFeatures f;
  f.adult_price_yen = parse_adult_price_yen(record.charge);
  if (record.price_band_override) {
    f.price_band = *record.price_band_override;
  } else if (!f.adult_price_yen) {
    f.price_band = PriceBand::Mid;
  } else if (*f.adult_price_yen == 0) {
    f.price_band = PriceBand::Free;
  } else if (*f.adult_price_yen <= t.low_max_yen) {
    f.price_band = PriceBand::Low;
  } else if (*f.adult_price_yen <= t.mid_max_yen) {
    f.price_band = PriceBand::Mid;
  } else {
    f.price_band = PriceBand::High;
  }

  f.indoor = record.indoor;

  if (record.distance_from_station_m) {
    f.distance_m = record.distance_from_station_m;
  } else if (auto minutes = parse_walk_minutes(record.access)) {
    f.distance_m = *minutes * t.walk_m_per_min;
  }
  if (!f.distance_m) {
    f.station_proximity = Proximity::Unknown;
  } else {
    f.station_proximity = *f.distance_m <= t.near_max_m ? Proximity::Near : Proximity::Far;
  }

  if (record.n_reviews < t.popularity_low_below) {
    f.popularity = Popularity::Low;
  } else if (record.n_reviews >= t.popularity_high_from) {
    f.popularity = Popularity::High;
  } else {
    f.popularity = Popularity::Mid;
  }
  return f;
}

// ---------------------------------------------------------------------------
// Search

namespace {

struct FieldVocabulary {
  Field field;
  std::vector<std::string_view> words;
};

const std::vector<FieldVocabulary>& vocabularies() {
  static const std::vector<FieldVocabulary> v = {
      {Field::BusinessHours,
       {"open", "opens", "opening", "hours", "hour", "close", "closes", "closing", "closed", "time", "times",
        "when", "holiday", "holidays", "営業", "時間", "何時", "休み", "定休"}},
      {Field::Location, {"where", "located", "location", "address", "area", "どこ", "場所", "住所"}},
      {Field::Access,
       {"access", "station", "stations", "train", "walk", "walking", "bus", "car", "parking", "get", "reach",
        "far", "駅", "電車", "徒歩", "駐車", "アクセス", "行き方"}},
      {Field::Charge,
       {"much", "price", "prices", "cost", "costs", "fee", "fees", "ticket", "tickets", "charge", "admission",
        "yen", "expensive", "cheap", "pay", "料金", "値段", "いくら", "入場料", "円", "チケット"}},
      {Field::Review,
       {"review", "reviews", "popular", "rating", "ratings", "visitors", "口コミ", "評判", "人気"}},
  };
  return v;
}

bool is_ascii(std::string_view s) {
  return std::all_of(s.begin(), s.end(), [](char c) { return static_cast<unsigned char>(c) < 0x80; });
}

}  // namespace

double field_boost(Field f) { return f == Field::Review ? 0.5 : 1.0; }

std::vector<Field> query_fields(std::string_view query) {
  auto raw = text::tokenize(query);
  std::set<std::string_view> tokens(raw.begin(), raw.end());
  auto folded = text::fold_fullwidth(query);
  std::vector<Field> out;
  for (const auto& vocab : vocabularies()) {
    bool hit = std::any_of(vocab.words.begin(), vocab.words.end(), [&](std::string_view w) {
      return is_ascii(w) ? tokens.contains(w) : folded.find(w) != std::string::npos;
    });
    if (hit) out.push_back(vocab.field);
  }
  return out;
}

bool hit_order(const SearchHit& a, const SearchHit& b) {
  if (a.score != b.score) return a.score > b.score;
  if (a.field != b.field) return a.field < b.field;
  if (a.text != b.text) return a.text < b.text;
  return a.sight_id < b.sight_id;
}

SearchIndex::SearchIndex(const std::vector<SightRecord>& records, text::TokenizeMode mode) : mode_(mode) {
  auto add = [&](const SightRecord& r, Field f, const std::string& body) {
    if (text::trim(body).empty()) return;
    Document doc{r.sight_id, f, body, {}};
    for (auto& tok : text::tokenize(body, mode_)) {
      if (std::find(doc.tokens.begin(), doc.tokens.end(), tok) == doc.tokens.end()) {
        doc.tokens.push_back(std::move(tok));
      }
    }
    auto id = docs_.size();
    for (const auto& tok : doc.tokens) postings_[tok].push_back(id);
    docs_.push_back(std::move(doc));
  };
  for (const auto& r : records) {
    add(r, Field::BusinessHours, r.business_hours);
    add(r, Field::Location, r.location);
    add(r, Field::Access, r.access);
    add(r, Field::Charge, r.charge);
    for (const auto& rev : r.reviews) add(r, Field::Review, rev.text);
  }
}

std::vector<SearchHit> SearchIndex::search(std::string_view query, const std::optional<std::string>& sight_filter,
                                           int k) const {
  if (k <= 0) return {};
  auto q = text::content_tokens(query, mode_);
  auto boosted = query_fields(query);

  std::vector<double> overlap(docs_.size(), 0.0);
  for (const auto& tok : q) {
    auto it = postings_.find(tok);
    if (it == postings_.end()) continue;
    for (auto id : it->second) overlap[id] += 1.0;
  }
  double denom = q.empty() ? 1.0 : static_cast<double>(q.size());

  std::vector<SearchHit> hits;
  for (std::size_t id = 0; id < docs_.size(); ++id) {
    const auto& doc = docs_[id];
    if (sight_filter && doc.sight_id != *sight_filter) continue;
    double score = overlap[id] / denom;
    if (std::find(boosted.begin(), boosted.end(), doc.field) != boosted.end()) score += field_boost(doc.field);
    if (score <= 0.0) continue;
    hits.push_back(SearchHit{doc.sight_id, doc.field, doc.text, score});
  }
  std::sort(hits.begin(), hits.end(), hit_order);
  if (hits.size() > static_cast<std::size_t>(k)) hits.resize(static_cast<std::size_t>(k));
  return hits;
}

// ---------------------------------------------------------------------------
// Serialization

ordered_json to_json(const SightRecord& r, bool include_generated) {
  ordered_json j;
  j["sight_id"] = r.sight_id;
  j["name"] = r.name;
  j["summary_long"] = r.summary_long;
  if (include_generated) j["summary_one_line"] = r.summary_one_line;
  j["business_hours"] = r.business_hours;
  j["location"] = r.location;
  j["access"] = r.access;
  j["charge"] = r.charge;
  auto reviews = ordered_json::array();
  for (const auto& rev : r.reviews) reviews.push_back(ordered_json{{"text", rev.text}, {"rating", rev.rating}});
  j["reviews"] = std::move(reviews);
  j["n_reviews"] = r.n_reviews;
  j["review_score"] = r.review_score ? ordered_json(*r.review_score) : ordered_json(nullptr);
  j["indoor"] = r.indoor ? ordered_json(*r.indoor) : ordered_json(nullptr);
  if (r.distance_from_station_m) j["distance_from_station_m"] = *r.distance_from_station_m;
  if (r.price_band_override) j["price_band_override"] = std::string(to_string(*r.price_band_override));
  return j;
}

namespace {

const std::set<std::string, std::less<>> kCorpusKeys = {
    "sight_id", "name",      "summary_long", "business_hours", "location",
    "access",   "charge",    "reviews",      "n_reviews",      "review_score",
    "indoor",   "distance_from_station_m",   "price_band_override"};

std::string require_string(const json& j, const char* key, bool required = true) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) {
    if (required) throw std::invalid_argument(std::string("missing field '") + key + "'");
    return {};
  }
  if (!it->is_string()) throw std::invalid_argument(std::string("field '") + key + "' must be a string");
  return it->get<std::string>();
}

}  // namespace

SightRecord record_from_json(const json& j, bool allow_generated) {
  if (!j.is_object()) throw std::invalid_argument("record must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    bool generated = key == "summary_one_line";
    if (!kCorpusKeys.contains(key) && !(allow_generated && generated)) {
      throw std::invalid_argument("unknown field '" + key + "'");
    }
  }
  SightRecord r;
  r.sight_id = require_string(j, "sight_id");
  r.name = require_string(j, "name");
  r.summary_long = require_string(j, "summary_long");
  if (allow_generated) r.summary_one_line = require_string(j, "summary_one_line", false);
  r.business_hours = require_string(j, "business_hours", false);
  r.location = require_string(j, "location", false);
  r.access = require_string(j, "access", false);
  r.charge = require_string(j, "charge", false);

  if (auto it = j.find("reviews"); it != j.end() && !it->is_null()) {
    if (!it->is_array()) throw std::invalid_argument("field 'reviews' must be an array");
    for (const auto& rv : *it) {
      if (!rv.is_object()) throw std::invalid_argument("review must be an object");
      Review rev;
      rev.text = require_string(rv, "text");
      auto rating = rv.find("rating");
      if (rating == rv.end() || !rating->is_number_integer()) {
        throw std::invalid_argument("review rating must be an integer");
      }
      rev.rating = rating->get<int>();
      r.reviews.push_back(std::move(rev));
    }
  }

  auto n_it = j.find("n_reviews");
  bool has_n = n_it != j.end() && !n_it->is_null();
  if (has_n) {
    if (!n_it->is_number_integer()) throw std::invalid_argument("field 'n_reviews' must be an integer");
    r.n_reviews = n_it->get<int>();
  }
  auto s_it = j.find("review_score");
  bool has_score = s_it != j.end() && !s_it->is_null();
  if (has_score) {
    if (!s_it->is_number()) throw std::invalid_argument("field 'review_score' must be a number");
    r.review_score = s_it->get<double>();
  }
  // Both absent: derive from the inline reviews.
  if (!has_n && !has_score && !r.reviews.empty()) {
    r.n_reviews = static_cast<int>(r.reviews.size());
    double sum = 0;
    for (const auto& rev : r.reviews) sum += rev.rating;
    r.review_score = std::round(sum / r.n_reviews * 100.0) / 100.0;
  } else if (!has_n) {
    r.n_reviews = 0;
  }

  if (auto it = j.find("indoor"); it != j.end() && !it->is_null()) {
    if (!it->is_boolean()) throw std::invalid_argument("field 'indoor' must be true, false or null");
    r.indoor = it->get<bool>();
  }
  if (auto it = j.find("distance_from_station_m"); it != j.end() && !it->is_null()) {
    if (!it->is_number()) throw std::invalid_argument("field 'distance_from_station_m' must be a number");
    r.distance_from_station_m = it->get<double>();
  }
  if (auto it = j.find("price_band_override"); it != j.end() && !it->is_null()) {
    auto band = it->is_string() ? parse_price_band(it->get<std::string>()) : std::nullopt;
    if (!band) throw std::invalid_argument("field 'price_band_override' must be free|low|mid|high");
    r.price_band_override = band;
  }
  return r;
}

std::vector<std::string> validate(const SightRecord& r) {
  std::vector<std::string> problems;
  if (text::trim(r.sight_id).empty()) problems.emplace_back("empty sight_id");
  if (text::trim(r.name).empty()) problems.emplace_back("empty name");
  if (text::trim(r.summary_long).empty()) problems.emplace_back("empty summary_long");
  if (r.n_reviews < 0) problems.emplace_back("n_reviews must be >= 0");
  if (r.review_score.has_value() != (r.n_reviews > 0)) {
    problems.emplace_back("review_score must be present exactly when n_reviews > 0");
  }
  if (r.review_score && (*r.review_score < 1.0 || *r.review_score > 5.0)) {
    problems.emplace_back("review_score must lie in [1, 5]");
  }
  for (const auto& rev : r.reviews) {
    if (rev.rating < 1 || rev.rating > 5) problems.emplace_back("review rating must lie in 1..5");
    if (text::trim(rev.text).empty()) problems.emplace_back("empty review text");
  }
  if (r.distance_from_station_m && *r.distance_from_station_m < 0) {
    problems.emplace_back("distance_from_station_m must be >= 0");
  }
  return problems;
}

// ---------------------------------------------------------------------------
// Catalog

Catalog Catalog::from_records(std::vector<SightRecord> records, const FeatureThresholds& thresholds,
                              text::TokenizeMode mode) {
  std::vector<std::string> diagnostics;
  Catalog c;
  for (std::size_t i = 0; i < records.size(); ++i) {
    for (const auto& p : validate(records[i])) {
      diagnostics.push_back("record " + std::to_string(i + 1) + " (" + records[i].sight_id + "): " + p);
    }
    if (!c.by_id_.emplace(records[i].sight_id, i).second) {
      diagnostics.push_back("record " + std::to_string(i + 1) + ": duplicate sight_id '" + records[i].sight_id + "'");
    }
  }
  if (!diagnostics.empty()) throw CorpusError(std::move(diagnostics));
  c.thresholds_ = thresholds;
  c.records_ = std::move(records);
  c.features_.reserve(c.records_.size());
  for (const auto& r : c.records_) c.features_.push_back(derive_features(r, thresholds));
  c.index_ = SearchIndex(c.records_, mode);
  return c;
}

Catalog Catalog::parse(std::istream& in, const FeatureThresholds& thresholds, text::TokenizeMode mode) {
  std::vector<SightRecord> records;
  std::vector<std::string> diagnostics;
  std::map<std::string, std::size_t> first_line;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (text::trim(line).empty()) continue;
    try {
      auto rec = record_from_json(json::parse(line), false);
      for (const auto& p : validate(rec)) diagnostics.push_back("line " + std::to_string(line_no) + ": " + p);
      auto [it, inserted] = first_line.emplace(rec.sight_id, line_no);
      if (!inserted) {
        diagnostics.push_back("line " + std::to_string(line_no) + ": duplicate sight_id '" + rec.sight_id +
                              "' (first defined on line " + std::to_string(it->second) + ")");
      }
      records.push_back(std::move(rec));
    } catch (const std::exception& e) {
      diagnostics.push_back("line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  if (!diagnostics.empty()) throw CorpusError(std::move(diagnostics));
  return from_records(std::move(records), thresholds, mode);
}

Catalog Catalog::ingest(const std::filesystem::path& path, const FeatureThresholds& thresholds,
                        text::TokenizeMode mode) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open corpus file: " + path.string());
  return parse(in, thresholds, mode);
}

void Catalog::serialize(std::ostream& out) const {
  for (const auto& r : records_) out << to_json(r, false).dump() << '\n';
}

bool Catalog::contains(std::string_view sight_id) const { return by_id_.find(sight_id) != by_id_.end(); }

const SightRecord& Catalog::at(std::string_view sight_id) const {
  auto it = by_id_.find(sight_id);
  if (it == by_id_.end()) throw ConfigError("unknown sight id '" + std::string(sight_id) + "'");
  return records_[it->second];
}

const DerivedFeatures& Catalog::features(std::string_view sight_id) const {
  auto it = by_id_.find(sight_id);
  if (it == by_id_.end()) throw ConfigError("unknown sight id '" + std::string(sight_id) + "'");
  return features_[it->second];
}

std::vector<SearchHit> Catalog::search(std::string_view query, const std::optional<std::string>& sight_filter,
                                       int k) const {
  return index_.search(query, sight_filter, k);
}

std::vector<std::string> Catalog::positive_reviews(std::string_view sight_id, int k) const {
  const auto& rec = at(sight_id);
  std::vector<const Review*> good;
  for (const auto& rev : rec.reviews) {
    if (rev.rating >= 4) good.push_back(&rev);
  }
  std::sort(good.begin(), good.end(), [](const Review* a, const Review* b) {
    if (a->rating != b->rating) return a->rating > b->rating;
    if (a->text.size() != b->text.size()) return a->text.size() > b->text.size();
    return a->text < b->text;
  });
  std::vector<std::string> out;
  for (const auto* rev : good) {
    if (static_cast<int>(out.size()) >= k) break;
    out.push_back(rev->text);
  }
  return out;
}

void Catalog::set_summary_one_line(std::string_view sight_id, std::string summary) {
  auto it = by_id_.find(sight_id);
  if (it == by_id_.end()) throw ConfigError("unknown sight id '" + std::string(sight_id) + "'");
  records_[it->second].summary_one_line = std::move(summary);
}

}  // namespace tourdesk::sightdb
