// Acceptance run: one PASS/FAIL line per headline criterion, exit code 1 if any fails.

#include <algorithm>
#include <chrono>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <regex>
#include <set>
#include <sstream>

#include <json.hpp>

#include "test_support.hpp"
#include "tourdesk/closing.hpp"
#include "tourdesk/qa.hpp"
#include "tourdesk/recommendation.hpp"
#include "tourdesk/text.hpp"

using namespace tourdesk;
using steady = std::chrono::steady_clock;

namespace {

// Pinned tolerances.
constexpr int kFuzzSessions = 1000;
constexpr double kFuzzBudgetSeconds = 30.0;
constexpr int kMaxInterviewQuestions = 8;
constexpr int kMaxAdvancesPerSession = 400;
constexpr int kFuzzGenerations = 10000;
constexpr double kAdvanceBudgetMs = 50.0;
constexpr std::size_t kMaxQuestionsPerSight = 3;
constexpr std::size_t kGroundingQuestions = 50;

struct Result {
  bool pass = true;
  std::string detail;
};

int failures = 0;

void report(const std::string& name, const Result& r) {
  std::cout << (r.pass ? "PASS " : "FAIL ") << name << ": " << r.detail << std::endl;
  if (!r.pass) ++failures;
}

// Latency samples collected by every criterion that advances sessions.
double worst_advance_ms = 0.0;
std::size_t advances_timed = 0;

std::vector<AgentTurn> timed_advance(Session& s, std::optional<std::string_view> u) {
  auto t0 = steady::now();
  auto out = s.advance(u);
  double ms = std::chrono::duration<double, std::milli>(steady::now() - t0).count();
  worst_advance_ms = std::max(worst_advance_ms, ms);
  ++advances_timed;
  return out;
}

// Transitions allowed between consecutive distinct phases of a transcript.
bool allowed_step(Phase from, Phase to) {
  auto f = static_cast<int>(from), t = static_cast<int>(to);
  if (t == f + 1) return true;
  return to == Phase::Closing && f < t;  // the customer declined questions or the budget ran out
}

// ---------------------------------------------------------------------------

Result scenario_conformance() {
  auto engine = testing::make_engine(7);
  const auto& ids = engine->catalog().records();
  std::mt19937_64 rng(20240501);
  int violations = 0, forced = 0, declined = 0;
  std::string first_violation;
  auto violate = [&](int i, const std::string& why) {
    if (violations++ == 0) first_violation = "session " + std::to_string(i) + ": " + why;
  };
  auto start = steady::now();
  for (int i = 0; i < kFuzzSessions; ++i) {
    auto a = ids[rng() % ids.size()].sight_id;
    auto b = a;
    while (b == a) b = ids[rng() % ids.size()].sight_id;
    SightAssignment asg{a, b, rng() % 2 ? a : b};
    ManualClock clock(testing::t0());
    auto s = engine->create_session(asg, clock);
    testing::RandomCustomer customer(rng());
    timed_advance(*s, std::nullopt);
    int steps = 0;
    while (!s->done() && steps++ < kMaxAdvancesPerSession) {
      clock.advance(std::chrono::seconds(4 + rng() % 30));
      auto reply = customer.reply(*s);
      timed_advance(*s, reply ? std::optional<std::string_view>(*reply) : std::nullopt);
    }
    if (!s->done()) violate(i, "did not reach Done");
    if (s->interview_questions_asked() > kMaxInterviewQuestions) violate(i, "asked too many interview questions");
    std::vector<Phase> seq;
    for (const auto& r : s->transcript()) {
      if (seq.empty() || seq.back() != r.phase) seq.push_back(r.phase);
    }
    if (seq.empty() || seq.front() != Phase::Greeting || seq.back() != Phase::Closing) violate(i, "bad endpoints");
    for (std::size_t k = 1; k < seq.size(); ++k) {
      if (!allowed_step(seq[k - 1], seq[k])) {
        violate(i, std::string("phase step ") + std::string(to_string(seq[k - 1])) + " -> " +
                       std::string(to_string(seq[k])));
      }
    }
    const auto& t = s->transcript();
    for (std::size_t k = 0; k < t.size(); ++k) {
      if (k && t[k].ts < t[k - 1].ts) violate(i, "timestamps decrease");
      if (t[k].annotations &&
          (t[k].annotations->expression == Expression::Surprised) != text::contains_exclamation(t[k].text)) {
        violate(i, "expression does not follow the exclamation rule");
      }
    }
    bool reached_qa = std::find(seq.begin(), seq.end(), Phase::QA) != seq.end();
    bool time_up = std::any_of(t.begin(), t.end(), [](const TurnRecord& r) { return r.phase == Phase::Closing; }) &&
                   s->elapsed(t.back().ts) >= engine->settings().time_budget;
    forced += time_up;
    declined += reached_qa && !time_up;
  }
  double secs = std::chrono::duration<double>(steady::now() - start).count();
  Result r;
  r.pass = violations == 0 && secs < kFuzzBudgetSeconds;
  std::ostringstream d;
  d << kFuzzSessions << " fuzzed sessions, " << violations << " violations, " << forced << " closed by the time budget, "
    << declined << " closed after QA, " << secs << " s (limit " << kFuzzBudgetSeconds << " s)";
  if (violations) d << "; first: " << first_violation;
  r.detail = d.str();
  return r;
}

// ---------------------------------------------------------------------------

using interview::AnswerClass;

// The interview table written out by hand.
const std::map<int, std::map<AnswerClass, int>> kTableOracle = {
    {1, {{AnswerClass::Alone, 6}, {AnswerClass::Friend, 6}, {AnswerClass::Family, 2}}},
    {2, {{AnswerClass::Yes, 3}, {AnswerClass::No, 6}}},
    {3, {{AnswerClass::Answered, 6}}},
    {6, {{AnswerClass::Yes, 7}, {AnswerClass::No, 7}}},
    {7, {{AnswerClass::Yes, 8}, {AnswerClass::No, 8}}},
    {8, {{AnswerClass::Yes, 4}, {AnswerClass::No, 4}}},
    {4, {{AnswerClass::Yes, 5}, {AnswerClass::No, 5}, {AnswerClass::Unknown, 5}}},
    {5, {{AnswerClass::Answered, 0}}},
};
// Class applied after an unclear answer was re-asked once.
const std::map<int, AnswerClass> kDefaultOracle = {
    {1, AnswerClass::Alone}, {2, AnswerClass::No}, {3, AnswerClass::Answered}, {4, AnswerClass::Unknown},
    {5, AnswerClass::Answered}, {6, AnswerClass::No}, {7, AnswerClass::No}, {8, AnswerClass::No}};

std::string utterance_for(int node, AnswerClass c) {
  switch (c) {
    case AnswerClass::Yes: return "Yes.";
    case AnswerClass::No: return "No.";
    case AnswerClass::Alone: return "Alone.";
    case AnswerClass::Friend: return "With a friend.";
    case AnswerClass::Family: return "With my family.";
    case AnswerClass::Answered: return node == 3 ? "They are 5 and 2 years old." : "Good food and nice views.";
    case AnswerClass::Unknown: return node == 5 ? "" : "hmm";
  }
  return "";
}

// Every path through the oracle table, each step choosing one of the node's
// classes or an unclear answer (re-asked once, then the default).
struct PathStep {
  int node;
  AnswerClass said;  // Unknown = unclear twice
};

void enumerate(int node, std::vector<PathStep>& path, std::vector<std::vector<PathStep>>& out) {
  if (node == 0) {
    out.push_back(path);
    return;
  }
  std::set<AnswerClass> choices;
  for (const auto& [c, _] : kTableOracle.at(node)) choices.insert(c);
  choices.insert(AnswerClass::Unknown);
  for (auto c : choices) {
    auto applied = c == AnswerClass::Unknown ? kDefaultOracle.at(node) : c;
    path.push_back({node, c});
    enumerate(kTableOracle.at(node).at(applied), path, out);
    path.pop_back();
  }
}

Result graph_oracle() {
  auto cfg = testing::test_config(7);
  auto graph = interview::QuestionGraph::load(cfg.question_graph);
  auto lexicon = interview::AnswerLexicon::load(cfg.lexicon);
  int mismatches = 0;
  std::string first;
  auto miss = [&](const std::string& why) {
    if (mismatches++ == 0) first = why;
  };

  // Static table: same nodes, same transitions, same defaults.
  std::set<int> graph_nodes, oracle_nodes;
  for (const auto& [id, _] : graph.nodes()) graph_nodes.insert(id);
  for (const auto& [id, _] : kTableOracle) oracle_nodes.insert(id);
  if (graph_nodes != oracle_nodes) miss("node sets differ");
  for (const auto& [id, row] : kTableOracle) {
    if (!graph.contains(id)) continue;
    const auto& n = graph.node(id);
    std::map<AnswerClass, int> got(n.transitions.begin(), n.transitions.end());
    if (got != row) miss("transitions of node " + std::to_string(id));
    if (n.default_answer != kDefaultOracle.at(id)) miss("default of node " + std::to_string(id));
  }

  // Dynamic: drive the interviewer down every path.
  std::vector<std::vector<PathStep>> paths;
  std::vector<PathStep> scratch;
  enumerate(1, scratch, paths);
  interview::Interviewer iv(graph, lexicon);
  interview::LocWiseQuestionSet loc{"s",
                                    {"Do you like to have magical experiences?", "Do you like detective dramas?",
                                     "Do you like to play by the water?"},
                                    {"p0", "p1", "p2"}};
  for (const auto& p : paths) {
    interview::InterviewCursor cur;
    interview::CustomerProfile prof;
    int node = iv.begin(cur, loc);
    std::vector<int> visited;
    bool ok = node == 1;
    for (const auto& step : p) {
      if (node != step.node) {
        ok = false;
        break;
      }
      visited.push_back(node);
      auto u = utterance_for(step.node, step.said);
      auto o = iv.answer(cur, prof, u, loc);
      if (step.said == AnswerClass::Unknown) {
        if (!o.reask) {
          ok = false;
          break;
        }
        o = iv.answer(cur, prof, u, loc);
        if (o.reask) {
          ok = false;
          break;
        }
      } else if (o.reask || o.answer != step.said) {
        ok = false;
        break;
      }
      node = o.next;
    }
    if (!ok || node != 0 || cur.asked != visited) {
      std::string desc;
      for (const auto& s : p) desc += std::to_string(s.node) + ":" + std::string(to_string(s.said)) + " ";
      miss("path " + desc);
    }
  }
  Result r;
  r.pass = mismatches == 0;
  r.detail = std::to_string(paths.size()) + " answer-class paths, " + std::to_string(mismatches) + " mismatches" +
             (mismatches ? "; first: " + first : "");
  return r;
}

// ---------------------------------------------------------------------------

Result extraction_grounding() {
  std::ifstream in(testing::data_dir() / "fixtures" / "qa_questions.json");
  auto doc = nlohmann::json::parse(in);
  const auto& items = doc.at("questions");
  int checked = 0, ungrounded = 0;
  std::string first;
  // mock, and a backend that keeps inventing prices
  for (int variant = 0; variant < 2; ++variant) {
    std::unique_ptr<llm::GenBackend> backend = std::make_unique<llm::MockBackend>(7);
    if (variant == 1) backend = std::make_unique<testing::FuzzBackend>(std::move(backend), 11, 0.6);
    auto engine = testing::make_engine(7, std::move(backend));
    const auto& cat = engine->catalog();
    for (const auto& it : items) {
      auto q = it.at("question").get<std::string>();
      std::string a = it.at("candidate_a"), b = it.at("candidate_b"), rec = it.at("recommended");
      auto ctx = qa::assemble(cat, a, b, rec, q);
      for (const auto* side : {&ctx.first, &ctx.second}) {
        if (side->hits.empty()) continue;
        std::vector<std::string> g;
        for (const auto& h : side->hits) g.push_back(h.text);
        auto t = engine->gateway().extract_info(side->hits, q);
        ++checked;
        if (!text::digits_grounded(t.text, g)) {
          if (ungrounded++ == 0) first = "extract_info(" + q + "): " + t.text;
        }
      }
      std::vector<std::string> g;
      for (const auto* side : {&ctx.first, &ctx.second})
        for (const auto& h : side->hits) g.push_back(h.text);
      auto ans = qa::answer(engine->gateway(), ctx);
      ++checked;
      if (!text::digits_grounded(ans.text, g)) {
        if (ungrounded++ == 0) first = "qa(" + q + "): " + ans.text;
      }
    }
  }

  // Pinned: the information block of the trick-art museum.
  const std::string kCharge =
      "Adult: 1,000yen (High school students and above) Child: 700yen (4 years old - junior high school student)";
  const std::string kLocation = "DECKS Tokyo Beach Island Mall 4F, 1-6-1 Daiba, Minato-ku, Tokyo 135-0091, Japan MAP";
  auto engine = testing::make_engine(7);
  const auto& r = engine->catalog().at("trick_art_museum");
  std::vector<sightdb::SearchHit> info = {{r.sight_id, sightdb::Field::BusinessHours, r.business_hours, 1},
                                          {r.sight_id, sightdb::Field::Location, r.location, 1},
                                          {r.sight_id, sightdb::Field::Access, r.access, 1},
                                          {r.sight_id, sightdb::Field::Charge, r.charge, 1}};
  auto charge = engine->gateway().extract_info(info, "How much is it?").text;
  auto where = engine->gateway().extract_info(info, "Where is it?").text;
  bool pinned = charge == kCharge && where == kLocation;

  Result res;
  res.pass = items.size() == kGroundingQuestions && checked > 0 && ungrounded == 0 && pinned;
  std::ostringstream d;
  d << items.size() << " questions, " << checked << " outputs checked (mock and fabricating backend), " << ungrounded
    << " ungrounded; pinned charge " << (charge == kCharge ? "ok" : "MISMATCH [" + charge + "]") << ", location "
    << (where == kLocation ? "ok" : "MISMATCH [" + where + "]");
  if (ungrounded) d << "; first: " << first;
  res.detail = d.str();
  return res;
}

// ---------------------------------------------------------------------------

Result recommendation_oracle() {
  auto engine = testing::make_engine(7);
  const auto& cat = engine->catalog();
  std::vector<sightdb::DerivedFeatures> profiles(4);
  // nothing favorable
  profiles[0].price_band = sightdb::PriceBand::High;
  profiles[0].popularity = sightdb::Popularity::Low;
  profiles[0].station_proximity = sightdb::Proximity::Far;
  profiles[0].indoor = false;
  // everything favorable
  profiles[1].price_band = sightdb::PriceBand::Free;
  profiles[1].popularity = sightdb::Popularity::High;
  profiles[1].station_proximity = sightdb::Proximity::Near;
  profiles[1].indoor = true;
  // cheap and indoor only
  profiles[2].price_band = sightdb::PriceBand::Low;
  profiles[2].popularity = sightdb::Popularity::Mid;
  profiles[2].station_proximity = sightdb::Proximity::Unknown;
  profiles[2].indoor = true;
  // near only, indoor unknown
  profiles[3].price_band = sightdb::PriceBand::Mid;
  profiles[3].popularity = sightdb::Popularity::Mid;
  profiles[3].station_proximity = sightdb::Proximity::Near;
  profiles[3].indoor = std::nullopt;

  int cases = 0, mismatches = 0, oversize = 0, order = 0;
  for (std::string id : {"trick_art_museum", "daiba_park"}) {
    const auto& loc = engine->prepared().at(id).loc;
    const auto& rec = cat.at(id);
    if (loc.questions.size() != 3) return {false, id + " has " + std::to_string(loc.questions.size()) + " questions"};
    for (unsigned mask = 0; mask < 8; ++mask) {
      std::vector<bool> yes{bool(mask & 1), bool(mask & 2), bool(mask & 4)};
      interview::CustomerProfile prof;
      for (int i = 0; i < 3; ++i) prof.loc_answers[{id, i}] = yes[static_cast<std::size_t>(i)];
      for (const auto& f : profiles) {
        ++cases;
        auto got = recommendation::select_points(prof, loc, f, rec, engine->pack());
        mismatches += got != testing::points_oracle(yes, loc, f, rec, engine->pack());
        oversize += got.size() > recommendation::kMaxPoints;
        bool seen_indep = false;
        for (const auto& p : got) {
          if (p.origin == recommendation::Origin::CustomerIndependent) seen_indep = true;
          else if (seen_indep) ++order;
        }
      }
    }
  }
  Result r;
  r.pass = cases == 64 && mismatches == 0 && oversize == 0 && order == 0;
  r.detail = std::to_string(cases) + " cases, " + std::to_string(mismatches) + " oracle mismatches, " +
             std::to_string(oversize) + " over two points, " + std::to_string(order) + " ordering violations";
  return r;
}

// ---------------------------------------------------------------------------

Result filter_properties() {
  auto cfg = testing::test_config(7);
  auto pack = llm::TemplatePack::load(cfg.templates);
  const auto& prepared = testing::prepared_bundle(7);
  const auto& cat = prepared.catalog;
  const auto& recs = cat.records();
  const int max_retries = cfg.max_retries;

  testing::FuzzBackend fuzz(std::make_unique<llm::MockBackend>(7), 99, 0.5);
  llm::Gateway gw(pack, fuzz, {max_retries, cfg.summary_budget, 7});
  std::mt19937_64 rng(5);
  const std::vector<std::string> answers = {"I am a teacher.", "They are 5 and 2 years old.", "Yes, I love art!",
                                            "No, we will take the train.", "My wife and kids.", "Good food.",
                                            "I work at a bank in Tokyo.", "Hmm, maybe."};
  int generations = 0, with_question = 0, bad_fallback = 0, fallbacks = 0;
  std::string first;
  while (generations < kFuzzGenerations) {
    llm::GenerationMetrics m;
    AgentTurn t;
    const auto& r = recs[rng() % recs.size()];
    const auto& other = recs[(rng() % (recs.size() - 1) + 1 + static_cast<std::size_t>(&r - recs.data())) % recs.size()];
    const auto& ans = answers[rng() % answers.size()];
    switch (generations % 7) {
      case 0: t = gw.generate_icebreak_comment("What do you do for a living?", ans, &m); break;
      case 1: t = gw.generate_comment("Who are you traveling with?", ans, &m); break;
      case 2: t = make_turn(gw.translate_point(r.name, prepared.at(r.sight_id).loc.questions.front(), &m), Provenance::Generated); break;
      case 3: t = make_turn(recommendation::build_appeal(gw, r.name, r.summary_one_line, &m), Provenance::Generated); break;
      case 4: {
        recommendation::RecommendationBundle b;
        b.sight_id = r.sight_id;
        interview::CustomerProfile prof;
        prof.loc_answers[{r.sight_id, 0}] = rng() % 2;
        b.points = recommendation::select_points(prof, prepared.at(r.sight_id).loc, cat.features(r.sight_id), r, pack);
        b.search_context = recommendation::gather_context(cat, r.sight_id, b.points);
        b.appeal = prepared.at(r.sight_id).appeal;
        t = recommendation::recommend_utterance(gw, r, r.summary_one_line, b, &m);
        break;
      }
      case 5: t = recommendation::counter_utterance(gw, cat, other, cat.features(other.sight_id), r.name, &m); break;
      default:
        t = closing::closing_narration(gw, closing::make_context(cat, r.sight_id, other.sight_id, Duration(0)), &m);
        break;
    }
    ++generations;
    if (text::contains_question_mark(t.text)) {
      if (with_question++ == 0) first = t.text;
    }
    // a fallback costs exactly max_retries calls, all of them rejected
    if (m.fallbacks > 0) {
      ++fallbacks;
      if (m.backend_calls != max_retries || m.rejections + m.transport_failures != max_retries) ++bad_fallback;
    } else if (m.backend_calls > max_retries || m.rejections + m.transport_failures >= max_retries) {
      ++bad_fallback;
    }
  }

  // An always-rejected backend: the fallback arrives after exactly max_retries calls for any limit.
  int exact = 0;
  for (int limit = 1; limit <= 5; ++limit) {
    testing::FnBackend asks([](const llm::GenRequest&) { return std::string("Shall we?"); });
    llm::Gateway g(pack, asks, {limit, 120, 0});
    for (auto n : llm::kAllTemplates) {
      if (!llm::is_comment_class(n)) continue;
      asks.calls = 0;
      llm::Bindings b;
      for (const auto& slot : pack.get(n).slots()) b.emplace(slot, "x");
      auto c = g.complete_with_policy(n, b, llm::default_policy(n, limit), g.base_context(n), "fallback");
      exact += asks.calls == limit && c.attempts == limit && c.rejected() == limit &&
               c.provenance == Provenance::Fixed;
    }
  }
  int comment_templates = 0;
  for (auto n : llm::kAllTemplates) comment_templates += llm::is_comment_class(n);

  Result res;
  res.pass = generations == kFuzzGenerations && with_question == 0 && bad_fallback == 0 &&
             exact == 5 * comment_templates && fallbacks > 0;
  std::ostringstream d;
  d << generations << " fuzzed comment-class generations, " << with_question << " with a question mark, " << fallbacks
    << " fallbacks, " << bad_fallback << " with a wrong call count; forced-rejection check " << exact << "/"
    << 5 * comment_templates;
  if (with_question) d << "; first: " << first;
  res.detail = d.str();
  return res;
}

// ---------------------------------------------------------------------------

std::string scripted_run(std::uint64_t seed, std::vector<TurnRecord>* records) {
  // a fresh engine each time, corpus preparation included
  auto cfg = testing::test_config(seed);
  auto engine = service::build_engine(cfg);
  SteppingClock clock(testing::t0(), Duration(1500));
  auto s = engine->create_session(testing::kDaibaVsTrick, clock, "determinism");
  timed_advance(*s, std::nullopt);
  for (const auto& line : testing::standard_script()) {
    if (s->done()) break;
    timed_advance(*s, std::string_view(line));
  }
  if (records) *records = s->transcript();
  std::ostringstream out;
  s->persist_transcript(out);
  return out.str();
}

Result determinism() {
  std::vector<TurnRecord> recs;
  auto a = scripted_run(7, &recs);
  auto b = scripted_run(7, nullptr);
  bool identical = a == b && !a.empty();

  auto engine = testing::make_engine(7);
  SteppingClock clock(testing::t0(), Duration(1500));
  auto original = engine->create_session(testing::kDaibaVsTrick, clock, "orig");
  testing::run_script(*original, testing::standard_script());

  // replay of every prefix that ends on a completed advance
  int prefixes = 0, equal = 0;
  const auto& t = original->transcript();
  SteppingClock clock2(testing::t0(), Duration(1500));
  auto shadow = engine->create_session(testing::kDaibaVsTrick, clock2, "shadow");
  shadow->advance(std::nullopt);
  std::size_t line = 0;
  auto script = testing::standard_script();
  while (true) {
    ++prefixes;
    std::istringstream in(transcript_jsonl(shadow->transcript()));
    auto parsed = parse_transcript(in);
    ManualClock live(testing::t0());
    auto r = Session::replay(*engine, testing::kDaibaVsTrick, parsed, live);
    equal += r->state() == shadow->state();
    if (shadow->done() || line >= script.size()) break;
    shadow->advance(std::string_view(script[line++]));
  }
  bool same_as_original = shadow->transcript() == t;
  Result res;
  res.pass = identical && prefixes == equal && same_as_original;
  std::ostringstream d;
  d << "two scripted runs " << (identical ? "byte-identical" : "DIFFER") << " (" << a.size() << " bytes, "
    << recs.size() << " records); replay state equal for " << equal << "/" << prefixes << " transcript prefixes";
  res.detail = d.str();
  return res;
}

// ---------------------------------------------------------------------------

Result corpus_round_trip() {
  auto path = testing::data_dir() / "fixtures" / "odaiba.jsonl";
  auto a = sightdb::Catalog::ingest(path);
  std::stringstream ss;
  a.serialize(ss);
  auto b = sightdb::Catalog::parse(ss);
  bool equal = a == b && a.size() == 8;

  auto cfg = testing::test_config(7);
  auto built = service::prepare_corpus(cfg, path);
  auto tmp = std::filesystem::temp_directory_path() / ("tourdesk_acceptance_" + new_session_id() + ".json");
  bundle::save(built, tmp);
  auto loaded = bundle::load(tmp);
  std::filesystem::remove(tmp);
  bool bundle_equal = loaded == built;

  static const std::regex format(R"(^Do you like [^?]+\?$)");
  int bad = 0;
  std::size_t most = 0;
  for (const auto& r : loaded.catalog.records()) {
    const auto& qs = loaded.at(r.sight_id).loc.questions;
    std::set<std::string> unique;
    for (const auto& q : qs) {
      if (!std::regex_match(q, format)) ++bad;
      unique.insert(text::fold_for_dedupe(q));
    }
    if (unique.size() != qs.size() || qs.size() > kMaxQuestionsPerSight || qs.empty()) ++bad;
    most = std::max(most, qs.size());
  }
  Result res;
  res.pass = equal && bundle_equal && bad == 0;
  std::ostringstream d;
  d << "ingest-serialize-ingest " << (equal ? "equal" : "DIFFERS") << "; bundle save/load "
    << (bundle_equal ? "equal" : "DIFFERS") << "; " << loaded.catalog.size() << " sights, at most " << most
    << " questions per sight, " << bad << " format or uniqueness problems";
  res.detail = d.str();
  return res;
}

Result latency() {
  // scripted runs with a slow-ish clock so every phase, including closing, is timed
  for (std::uint64_t seed : {1, 2, 3}) scripted_run(seed, nullptr);
  Result r;
  r.pass = advances_timed > 0 && worst_advance_ms < kAdvanceBudgetMs;
  std::ostringstream d;
  d << advances_timed << " advances timed across all runs, worst " << worst_advance_ms << " ms (limit "
    << kAdvanceBudgetMs << " ms)";
  r.detail = d.str();
  return r;
}

}  // namespace

int main() {
  report("scenario-conformance", scenario_conformance());
  report("interview-graph-oracle", graph_oracle());
  report("extraction-grounding", extraction_grounding());
  report("recommendation-point-oracle", recommendation_oracle());
  report("filter-properties", filter_properties());
  report("determinism-and-replay", determinism());
  report("advance-latency", latency());
  report("corpus-round-trip", corpus_round_trip());
  std::cout << (failures ? "FAILED " : "ALL PASSED ") << "(" << failures << " failing)" << std::endl;
  return failures ? 1 : 0;
}
