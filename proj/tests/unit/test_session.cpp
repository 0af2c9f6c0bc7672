#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "test_support.hpp"
#include "tourdesk/bundle.hpp"
#include "tourdesk/error.hpp"
#include "tourdesk/text.hpp"

using namespace tourdesk;
using testing::kDaibaVsTrick;

namespace {

Engine& engine() {
  static auto e = testing::make_engine();
  return *e;
}

std::filesystem::path temp_dir(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("tourdesk_test_" + name + "_" + new_session_id());
  std::filesystem::create_directories(p);
  return p;
}

std::vector<Phase> phases_of(const std::vector<TurnRecord>& t) {
  std::vector<Phase> out;
  for (const auto& r : t) out.push_back(r.phase);
  return out;
}

// Advance until the session reaches `target` using yes-ish defaults.
void drive_to(Session& s, Phase target) {
  if (s.transcript().empty()) s.advance(std::nullopt);
  const std::vector<std::string> filler = {"I am a teacher.", "The students.", "No.", "Alone.", "Yes.", "Yes.",
                                           "Yes.", "No.", "Nothing special."};
  std::size_t i = 0;
  while (s.phase() != target && !s.done()) s.advance(std::string_view(filler.at(i++ % filler.size())));
}

}  // namespace

TEST_SUITE("session") {
  TEST_CASE("creation validates the assignment") {
    ManualClock clock(testing::t0());
    auto s = engine().create_session(kDaibaVsTrick, clock);
    CHECK(s->phase() == Phase::Greeting);
    CHECK(s->transcript().empty());
    CHECK_FALSE(s->started_at().has_value());
    CHECK_THROWS_AS(engine().create_session({"daiba_park", "trick_art_museum", "tokyo_tower"}, clock), ConfigError);
    CHECK_THROWS_AS(engine().create_session({"daiba_park", "nowhere", "daiba_park"}, clock), ConfigError);
    CHECK_THROWS_AS(engine().create_session({"daiba_park", "daiba_park", "daiba_park"}, clock), ConfigError);
    auto t = engine().create_session(kDaibaVsTrick, clock);
    CHECK(t->id() != s->id());
    CHECK(s->id().size() == 32);
  }

  TEST_CASE("greeting: fixed greeting, self-introduction, speak-loudly request, then the icebreaker") {
    ManualClock clock(testing::t0());
    auto s = engine().create_session(kDaibaVsTrick, clock);
    auto turns = s->advance(std::nullopt);
    const auto& pack = engine().pack();
    REQUIRE(turns.size() == 4);
    CHECK(turns[0].text == pack.phrase("greeting"));
    CHECK(turns[1].text == pack.phrase("self_intro"));
    CHECK(turns[2].text == pack.phrase("speak_loudly"));
    CHECK(turns[2].text.find("speak loudly") != std::string::npos);
    for (int i = 0; i < 3; ++i) {
      CHECK(turns[i].phase == Phase::Greeting);
      CHECK(turns[i].annotations.expression == Expression::Smile);
      CHECK(turns[i].annotations.provenance == Provenance::Fixed);
    }
    CHECK(turns[3].phase == Phase::Icebreaker);
    CHECK(turns[3].annotations.nod_cue);
    CHECK(s->phase() == Phase::Icebreaker);
    CHECK(s->icebreak_turn() == 1);
    CHECK(s->transcript().size() == 4);  // no customer record for the opening silence
    CHECK(s->started_at() == testing::t0());
  }

  TEST_CASE("scripted consultation runs through every phase in order") {
    ManualClock clock(testing::t0());
    auto s = engine().create_session(kDaibaVsTrick, clock);
    testing::run_script(*s, testing::standard_script());
    CHECK(s->done());
    const auto& t = s->transcript();
    auto ph = phases_of(t);
    CHECK(std::is_sorted(ph.begin(), ph.end()));
    std::set<Phase> seen(ph.begin(), ph.end());
    for (auto p : {Phase::Greeting, Phase::Icebreaker, Phase::BriefExplanation, Phase::Interview,
                   Phase::Recommendation, Phase::QA, Phase::Closing}) {
      CHECK(seen.contains(p));
    }
    CHECK(t.back().text == engine().pack().phrase("farewell"));
    CHECK(std::count_if(t.begin(), t.end(), [&](const TurnRecord& r) {
            return r.text == engine().pack().phrase("time_up");
          }) == 1);
    CHECK(s->interview_questions_asked() == 8);
    CHECK(s->qa_answers() == 1);
    CHECK(s->icebreak_turn() == 3);
    CHECK(s->profile().participants == interview::Companion::Family);
    CHECK(s->profile().children_ages == std::vector<int>{5, 2});
  }

  TEST_CASE("annotation and transcript invariants") {
    SteppingClock clock(testing::t0(), Duration(700));
    auto s = engine().create_session(kDaibaVsTrick, clock);
    testing::run_script(*s, testing::standard_script());
    const auto& t = s->transcript();
    for (std::size_t i = 0; i < t.size(); ++i) {
      const auto& r = t[i];
      if (i > 0) CHECK(t[i - 1].ts <= r.ts);
      if (r.speaker == Speaker::Customer) {
        CHECK_FALSE(r.annotations.has_value());
        continue;
      }
      REQUIRE(r.annotations.has_value());
      CHECK((r.annotations->expression == Expression::Surprised) == text::contains_exclamation(r.text));
      if (r.annotations->look_at_monitor) {
        CHECK((r.phase == Phase::BriefExplanation || r.phase == Phase::Recommendation));
      }
    }
    // both candidates are introduced at the monitor
    auto monitor = std::count_if(t.begin(), t.end(), [](const TurnRecord& r) {
      return r.phase == Phase::BriefExplanation && r.annotations && r.annotations->look_at_monitor;
    });
    CHECK(monitor == 2);
  }

  TEST_CASE("the recommendation names the recommended sight and the counter names both") {
    ManualClock clock(testing::t0());
    auto s = engine().create_session(kDaibaVsTrick, clock);
    testing::run_script(*s, testing::standard_script());
    std::vector<TurnRecord> rec;
    for (const auto& r : s->transcript())
      if (r.phase == Phase::Recommendation) rec.push_back(r);
    REQUIRE(rec.size() == 2);
    CHECK(rec[0].text.starts_with("According to your information, we recommend Tokyo Trick Art Museum."));
    CHECK(rec[1].text.find("Daiba Park") != std::string::npos);
    CHECK(rec[1].text.find("Tokyo Trick Art Museum") != std::string::npos);
  }

  TEST_CASE("time budget forces closing at the next advance") {
    ManualClock clock(testing::t0());
    auto s = engine().create_session(kDaibaVsTrick, clock);
    drive_to(*s, Phase::Interview);
    REQUIRE(s->phase() == Phase::Interview);
    clock.advance(std::chrono::seconds(301));
    auto turns = s->advance(std::string_view("yes"));
    REQUIRE(turns.size() == 3);
    CHECK(turns[0].phase == Phase::Closing);
    CHECK(turns[0].text == engine().pack().phrase("time_up"));
    CHECK(turns.back().text == engine().pack().phrase("farewell"));
    CHECK_FALSE(turns.back().annotations.nod_cue);
    CHECK(s->done());
    CHECK_THROWS_AS(s->advance(std::string_view("hello?")), SessionClosedError);
  }

  TEST_CASE("exactly at the budget closes, just before it does not") {
    EngineSettings settings;
    settings.time_budget = std::chrono::seconds(10);
    auto e = testing::make_engine(7, nullptr, settings);
    ManualClock clock(testing::t0());
    auto s = e->create_session(kDaibaVsTrick, clock);
    s->advance(std::nullopt);
    clock.advance(Duration(9999));
    s->advance(std::string_view("I am a teacher."));
    CHECK(s->phase() == Phase::Icebreaker);
    clock.advance(Duration(1));
    s->advance(std::string_view("The students."));
    CHECK(s->done());
  }

  TEST_CASE("qa: decline immediately, or two questions then decline") {
    ManualClock clock(testing::t0());
    auto a = engine().create_session(kDaibaVsTrick, clock);
    drive_to(*a, Phase::QA);
    a->advance(std::string_view("No, thank you."));
    CHECK(a->done());
    CHECK(a->qa_answers() == 0);

    auto b = engine().create_session(kDaibaVsTrick, clock);
    drive_to(*b, Phase::QA);
    b->advance(std::string_view("Yes."));
    CHECK(b->qa_stage() == QaStage::AwaitQuestion);
    b->advance(std::string_view("How much is it?"));
    CHECK(b->qa_stage() == QaStage::AwaitDecision);
    b->advance(std::string_view("Where is it?"));
    CHECK(b->qa_answers() == 2);
    CHECK(b->phase() == Phase::QA);
    b->advance(std::string_view("No, that's all."));
    CHECK(b->done());
    CHECK(b->qa_answers() == 2);
  }

  TEST_CASE("silence in the interview is recorded and re-asked once") {
    ManualClock clock(testing::t0());
    auto s = engine().create_session(kDaibaVsTrick, clock);
    drive_to(*s, Phase::Interview);
    auto node = s->cursor().node;
    auto turns = s->advance(std::nullopt);
    REQUIRE(turns.size() == 1);
    CHECK(turns[0].text.starts_with(engine().pack().phrase("reask_preamble")));
    CHECK(s->cursor().node == node);
    const auto& last_customer = s->transcript()[s->transcript().size() - 2];
    CHECK(last_customer.speaker == Speaker::Customer);
    CHECK(last_customer.text.empty());
  }

  TEST_CASE("a failing backend never stalls the consultation") {
    auto e = testing::make_engine(7, std::make_unique<testing::FnBackend>([](const llm::GenRequest&) -> std::string {
                                    throw BackendError("offline");
                                  }));
    ManualClock clock(testing::t0());
    auto s = e->create_session(kDaibaVsTrick, clock);
    testing::run_script(*s, testing::standard_script());
    CHECK(s->done());
    CHECK(s->metrics().fallbacks > 0);
    CHECK(s->metrics().backend_calls == s->metrics().transport_failures);
  }

  TEST_CASE("speech normalization fills the speech field") {
    EngineSettings settings;
    settings.speech_normalization = true;
    auto e = testing::make_engine(7, nullptr, settings);
    ManualClock clock(testing::t0());
    auto s = e->create_session(kDaibaVsTrick, clock);
    auto turns = s->advance(std::nullopt);
    for (const auto& t : turns) CHECK(t.speech == t.text);  // English text has no ambiguous characters
  }
}

TEST_SUITE("persistence") {
  TEST_CASE("empty transcript writes nothing") {
    ManualClock clock(testing::t0());
    auto s = engine().create_session(kDaibaVsTrick, clock);
    std::ostringstream out;
    s->persist_transcript(out);
    CHECK(out.str().empty());
  }

  TEST_CASE("serialize then parse returns identical records, and writing is idempotent") {
    SteppingClock clock(testing::t0(), Duration(1234));
    auto s = engine().create_session(kDaibaVsTrick, clock);
    s->advance(std::nullopt);
    s->advance(std::string_view("I am a manager in an IT company."));
    std::ostringstream a, b;
    s->persist_transcript(a);
    s->persist_transcript(b);
    CHECK(a.str() == b.str());
    auto text = a.str();
    auto lines = std::count(text.begin(), text.end(), '\n');
    CHECK(static_cast<std::size_t>(lines) == s->transcript().size());
    std::istringstream in(a.str());
    CHECK(parse_transcript(in) == s->transcript());
  }

  TEST_CASE("five records round trip") {
    std::vector<TurnRecord> recs;
    for (int i = 0; i < 5; ++i) {
      TurnRecord r{testing::t0() + Duration(i * 10), i % 2 ? Speaker::Customer : Speaker::Agent,
                   "line " + std::to_string(i) + " with \"quotes\" and 日本語", Phase::Interview, std::nullopt};
      if (r.speaker == Speaker::Agent) r.annotations = AgentAnnotations{Expression::Surprised, true, false, Provenance::Generated};
      recs.push_back(r);
    }
    auto doc = transcript_jsonl(recs);
    CHECK(std::count(doc.begin(), doc.end(), '\n') == 5);
    std::istringstream in(doc);
    CHECK(parse_transcript(in) == recs);
  }

  TEST_CASE("malformed transcripts name the line") {
    std::istringstream in("{\"ts\":\"2024-05-01T10:00:00.000Z\",\"speaker\":\"robot\",\"text\":\"x\",\"phase\":\"QA\"}\n");
    try {
      parse_transcript(in);
      FAIL("expected invalid_argument");
    } catch (const std::invalid_argument& e) {
      CHECK(std::string(e.what()).find("line 1") != std::string::npos);
    }
  }

  TEST_CASE("atomic file write and load") {
    auto dir = temp_dir("persist");
    ManualClock clock(testing::t0());
    auto s = engine().create_session(kDaibaVsTrick, clock);
    testing::run_script(*s, testing::standard_script());
    auto path = dir / "t.jsonl";
    s->persist_transcript(path);
    CHECK_FALSE(std::filesystem::exists(dir / "t.jsonl.tmp"));
    CHECK(load_transcript(path) == s->transcript());
    CHECK_THROWS_AS(s->persist_transcript(dir / "missing" / "t.jsonl"), IoError);
    CHECK(s->done());  // failure leaves the in-memory session intact
    std::filesystem::remove_all(dir);
  }

  TEST_CASE("rendering") {
    ManualClock clock(testing::t0());
    auto s = engine().create_session(kDaibaVsTrick, clock);
    s->advance(std::nullopt);
    auto r = render_transcript(s->transcript());
    CHECK(r.starts_with("[2024-05-01T10:00:00.000Z] Greeting Shoko: " + engine().pack().phrase("greeting")));
    CHECK(r == render_transcript(s->transcript()));
  }
}

TEST_SUITE("replay") {
  TEST_CASE("replay reconstructs equal state and can continue") {
    SteppingClock clock(testing::t0(), Duration(900));
    auto s = engine().create_session(kDaibaVsTrick, clock);
    auto script = testing::standard_script();
    s->advance(std::nullopt);
    for (std::size_t i = 0; i < 8; ++i) s->advance(std::string_view(script[i]));
    ManualClock live(testing::t0() + std::chrono::seconds(60));
    ReplayReport rep;
    auto r = Session::replay(engine(), kDaibaVsTrick, s->transcript(), live, "r1", &rep);
    CHECK(r->state() == s->state());
    CHECK(rep.advances == 9);
    CHECK(rep.divergent_turns == 0);
    // both continue identically from here
    ManualClock& c2 = live;
    (void)c2;
    for (std::size_t i = 8; i < script.size(); ++i) {
      auto a = s->advance(std::string_view(script[i]));
      auto b = r->advance(std::string_view(script[i]));
      CHECK(a == b);
    }
    CHECK(r->done());
  }

  TEST_CASE("finished sessions replay to Done") {
    ManualClock clock(testing::t0());
    auto s = engine().create_session(kDaibaVsTrick, clock);
    testing::run_script(*s, testing::standard_script());
    auto r = Session::replay(engine(), kDaibaVsTrick, s->transcript(), clock);
    CHECK(r->state() == s->state());
    CHECK(r->done());
  }

  TEST_CASE("a transcript from another model reports divergence but keeps its records") {
    ManualClock clock(testing::t0());
    auto s = engine().create_session(kDaibaVsTrick, clock);
    testing::run_script(*s, testing::standard_script());
    auto other = testing::make_engine(99);
    ReplayReport rep;
    auto r = Session::replay(*other, kDaibaVsTrick, s->transcript(), clock, {}, &rep);
    CHECK(r->transcript() == s->transcript());
    CHECK(r->phase() == s->phase());
    CHECK(r->profile() == s->profile());
    CHECK(rep.divergent_turns > 0);
  }
}

TEST_SUITE("bundle") {
  TEST_CASE("prepared material") {
    const auto& b = testing::prepared_bundle();
    for (const auto& r : b.catalog.records()) {
      const auto& p = b.at(r.sight_id);
      CHECK_FALSE(r.summary_one_line.empty());
      CHECK(p.loc.questions.size() >= 1);
      CHECK(p.loc.questions.size() <= 3);
      CHECK(p.loc.points.size() == p.loc.questions.size());
      std::set<std::string> folded;
      for (const auto& q : p.loc.questions) {
        CHECK(engine().lexicon().is_loc_question(q));
        folded.insert(text::fold_for_dedupe(q));
      }
      CHECK(folded.size() == p.loc.questions.size());
      CHECK(p.appeal.starts_with("This place is appealing because"));
    }
    CHECK_THROWS_AS(b.at("nowhere"), ConfigError);
  }

  TEST_CASE("write, read round trip and rejects foreign documents") {
    const auto& b = testing::prepared_bundle();
    std::stringstream ss;
    bundle::write(b, ss);
    auto again = bundle::read(ss);
    CHECK(again == b);
    std::istringstream bad(R"({"format":"other","version":1,"sights":[]})");
    CHECK_THROWS_AS(bundle::read(bad), CorpusError);
    std::istringstream newer(R"({"format":"tourdesk-bundle","version":2,"sights":[]})");
    CHECK_THROWS_AS(bundle::read(newer), CorpusError);
    std::istringstream junk("not json");
    CHECK_THROWS_AS(bundle::read(junk), CorpusError);
  }

  TEST_CASE("save is atomic and load restores") {
    auto dir = temp_dir("bundle");
    bundle::save(testing::prepared_bundle(), dir / "b.json");
    CHECK(bundle::load(dir / "b.json") == testing::prepared_bundle());
    CHECK_THROWS_AS(bundle::load(dir / "none.json"), ConfigError);
    std::filesystem::remove_all(dir);
  }

  TEST_CASE("building is deterministic for a seed") {
    auto cfg = testing::test_config(7);
    auto a = service::prepare_corpus(cfg, cfg.corpus);
    CHECK(a == testing::prepared_bundle(7));
  }
}
