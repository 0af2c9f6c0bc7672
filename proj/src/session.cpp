#include "tourdesk/session.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <random>
#include <sstream>

#include "tourdesk/closing.hpp"
#include "tourdesk/error.hpp"
#include "tourdesk/qa.hpp"
#include "tourdesk/recommendation.hpp"
#include "tourdesk/text.hpp"

namespace tourdesk {

using nlohmann::json;
using nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// Records and transcript format

nlohmann::ordered_json to_json(const SightAssignment& a) {
  return ordered_json{{"candidate_a", a.candidate_a}, {"candidate_b", a.candidate_b}, {"recommended", a.recommended}};
}

SightAssignment assignment_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw std::invalid_argument("assignment must be an object");
  SightAssignment a;
  for (auto [key, dest] : {std::pair{"candidate_a", &a.candidate_a}, std::pair{"candidate_b", &a.candidate_b},
                           std::pair{"recommended", &a.recommended}}) {
    if (!j.contains(key)) throw std::invalid_argument(std::string("missing field '") + key + "'");
    if (!j[key].is_string()) throw std::invalid_argument(std::string("field '") + key + "' must be a string");
    *dest = j[key].get<std::string>();
  }
  return a;
}

std::string_view to_string(Speaker s) { return s == Speaker::Agent ? "agent" : "customer"; }

nlohmann::ordered_json to_json(const TurnRecord& r) {
  ordered_json j;
  j["ts"] = format_rfc3339(r.ts);
  j["speaker"] = to_string(r.speaker);
  j["phase"] = to_string(r.phase);
  j["text"] = r.text;
  if (r.annotations) {
    const auto& a = *r.annotations;
    j["annotations"] = ordered_json{{"expression", to_string(a.expression)},
                                    {"nod_cue", a.nod_cue},
                                    {"look_at_monitor", a.look_at_monitor},
                                    {"provenance", to_string(a.provenance)}};
  }
  return j;
}

TurnRecord turn_record_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw std::invalid_argument("record must be an object");
  for (const auto& [key, _] : j.items()) {
    if (key != "ts" && key != "speaker" && key != "phase" && key != "text" && key != "annotations") {
      throw std::invalid_argument("unknown field '" + key + "'");
    }
  }
  auto str = [&](const char* key) {
    if (!j.contains(key) || !j[key].is_string()) throw std::invalid_argument(std::string("missing string '") + key + "'");
    return j[key].get<std::string>();
  };
  TurnRecord r;
  r.ts = parse_rfc3339(str("ts"));
  auto speaker = str("speaker");
  if (speaker == "agent") {
    r.speaker = Speaker::Agent;
  } else if (speaker == "customer") {
    r.speaker = Speaker::Customer;
  } else {
    throw std::invalid_argument("bad speaker '" + speaker + "'");
  }
  auto phase = parse_phase(str("phase"));
  if (!phase) throw std::invalid_argument("bad phase");
  r.phase = *phase;
  r.text = str("text");
  if (j.contains("annotations")) {
    if (r.speaker == Speaker::Customer) throw std::invalid_argument("customer records carry no annotations");
    const auto& a = j["annotations"];
    if (!a.is_object()) throw std::invalid_argument("annotations must be an object");
    AgentAnnotations ann;
    auto expr = parse_expression(a.at("expression").get<std::string>());
    auto prov = parse_provenance(a.at("provenance").get<std::string>());
    if (!expr || !prov) throw std::invalid_argument("bad annotation value");
    ann.expression = *expr;
    ann.provenance = *prov;
    ann.nod_cue = a.at("nod_cue").get<bool>();
    ann.look_at_monitor = a.at("look_at_monitor").get<bool>();
    r.annotations = ann;
  } else if (r.speaker == Speaker::Agent) {
    throw std::invalid_argument("agent records need annotations");
  }
  return r;
}

void write_transcript(const std::vector<TurnRecord>& records, std::ostream& out) {
  for (const auto& r : records) out << to_json(r).dump() << '\n';
  out.flush();
  if (!out) throw IoError("failed writing transcript");
}

std::string transcript_jsonl(const std::vector<TurnRecord>& records) {
  std::ostringstream out;
  write_transcript(records, out);
  return out.str();
}

std::vector<TurnRecord> parse_transcript(std::istream& in) {
  std::vector<TurnRecord> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (text::trim(line).empty()) continue;
    try {
      out.push_back(turn_record_from_json(json::parse(line)));
    } catch (const std::exception& e) {
      throw std::invalid_argument("transcript line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

std::vector<TurnRecord> load_transcript(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open transcript " + path.string());
  return parse_transcript(in);
}

std::string render_transcript(const std::vector<TurnRecord>& records) {
  std::string out;
  for (const auto& r : records) {
    out += "[" + format_rfc3339(r.ts) + "] " + std::string(to_string(r.phase)) + " " +
           (r.speaker == Speaker::Agent ? "Shoko" : "Customer") + ": " + r.text;
    if (r.annotations) {
      std::string tags;
      if (r.annotations->expression == Expression::Surprised) tags += " surprised";
      if (r.annotations->look_at_monitor) tags += " monitor";
      if (r.annotations->nod_cue) tags += " nod";
      if (!tags.empty()) out += "  {" + tags.substr(1) + "}";
    }
    out += "\n";
  }
  return out;
}

// ---------------------------------------------------------------------------
// Engine

Engine::Engine(bundle::Bundle prepared, llm::TemplatePack pack, interview::AnswerLexicon lexicon,
               interview::QuestionGraph graph, std::unique_ptr<llm::GenBackend> backend,
               llm::GatewayConfig gateway_config, EngineSettings settings)
    : bundle_(std::move(prepared)),
      pack_(std::move(pack)),
      lexicon_(std::move(lexicon)),
      graph_(std::move(graph)),
      backend_(std::move(backend)),
      gateway_(pack_, *backend_, gateway_config),
      settings_(settings) {
  if (settings_.time_budget <= Duration::zero()) throw ConfigError("time_budget must be positive");
  for (const auto& r : bundle_.catalog.records()) bundle_.at(r.sight_id);
}

void Engine::validate(const SightAssignment& a) const {
  std::vector<std::string> problems;
  for (auto [label, id] : {std::pair{"candidate_a", &a.candidate_a}, std::pair{"candidate_b", &a.candidate_b}}) {
    if (id->empty()) {
      problems.push_back(std::string(label) + " is missing");
    } else if (!catalog().contains(*id)) {
      problems.push_back(std::string(label) + ": unknown sight '" + *id + "'");
    }
  }
  if (!a.candidate_a.empty() && a.candidate_a == a.candidate_b) problems.push_back("candidates must differ");
  if (a.recommended.empty()) {
    problems.push_back("recommended is missing");
  } else if (a.recommended != a.candidate_a && a.recommended != a.candidate_b) {
    problems.push_back("recommended '" + a.recommended + "' is not one of the candidates");
  }
  if (problems.empty()) return;
  std::string msg;
  for (const auto& p : problems) msg += (msg.empty() ? "" : "; ") + p;
  throw ConfigError(msg);
}

std::string new_session_id() {
  thread_local std::mt19937_64 rng{std::random_device{}()};
  char buf[33];
  std::snprintf(buf, sizeof buf, "%016llx%016llx", static_cast<unsigned long long>(rng()),
                static_cast<unsigned long long>(rng()));
  return buf;
}

std::unique_ptr<Session> Engine::create_session(const SightAssignment& a, Clock& clock, std::string id) const {
  validate(a);
  if (id.empty()) id = new_session_id();
  return std::make_unique<Session>(*this, a, clock, std::move(id));
}

// ---------------------------------------------------------------------------
// Session

Session::Session(const Engine& engine, SightAssignment assignment, Clock& clock, std::string id)
    : engine_(&engine), assignment_(std::move(assignment)), clock_(&clock), id_(std::move(id)) {
  engine.validate(assignment_);
}

Duration Session::elapsed(Timestamp now) const {
  if (!started_at_) return Duration::zero();
  return std::chrono::duration_cast<Duration>(now - *started_at_);
}

SessionState Session::state() const {
  return {phase_, profile_, cursor_, icebreak_turn_, qa_stage_, qa_answers_, transcript_};
}

void Session::push(Turns& out, AgentTurn t) {
  t.phase = phase_;
  t.annotations.expression = text::contains_exclamation(t.text) ? Expression::Surprised : Expression::Smile;
  if (phase_ != Phase::BriefExplanation && phase_ != Phase::Recommendation) t.annotations.look_at_monitor = false;
  if (engine_->settings().speech_normalization) t.speech = engine_->gateway().kana_normalize(t.text, &metrics_);
  out.push_back(std::move(t));
}

void Session::enter(Phase p, Turns&) {
  if (static_cast<int>(p) < static_cast<int>(phase_)) throw std::logic_error("phase may not move backwards");
  phase_ = p;
}

std::vector<AgentTurn> Session::advance(std::optional<std::string_view> utterance) {
  if (phase_ == Phase::Done) throw SessionClosedError("session " + id_ + " is finished");
  auto now = clock_->now();
  if (!transcript_.empty()) now = std::max(now, transcript_.back().ts);
  if (!started_at_) started_at_ = now;

  std::string said = utterance ? std::string(*utterance) : std::string();
  if (utterance || phase_ != Phase::Greeting) transcript_.push_back({now, Speaker::Customer, said, phase_, std::nullopt});

  Turns out;
  if (elapsed(now) >= engine_->settings().time_budget && phase_ != Phase::Closing) {
    run_closing(now, out);
  } else {
    switch (phase_) {
      case Phase::Greeting: run_greeting(out); break;
      case Phase::Icebreaker: run_icebreaker(said, out); break;
      case Phase::BriefExplanation: run_brief(said, out); break;
      case Phase::Interview: run_interview(said, out); break;
      case Phase::QA: run_qa(said, out); break;
      case Phase::Recommendation: run_recommendation(out); break;
      case Phase::Closing: run_closing(now, out); break;
      case Phase::Done: break;
    }
  }
  // The engine expects the customer to speak after the last turn unless the session ended.
  if (!out.empty() && phase_ != Phase::Done) out.back().annotations.nod_cue = true;
  for (const auto& t : out) transcript_.push_back({now, Speaker::Agent, t.text, t.phase, t.annotations});
  return out;
}

void Session::run_greeting(Turns& out) {
  const auto& pack = engine_->pack();
  push(out, make_turn(pack.phrase("greeting"), Provenance::Fixed));
  push(out, make_turn(pack.phrase("self_intro"), Provenance::Fixed));
  push(out, make_turn(pack.phrase("speak_loudly"), Provenance::Fixed));
  enter(Phase::Icebreaker, out);
  push(out, make_turn(pack.phrase("icebreak_opening"), Provenance::Fixed));
  icebreak_turn_ = 1;
  last_question_ = out.back().text;
}

void Session::run_icebreaker(std::string_view utterance, Turns& out) {
  const auto& gw = engine_->gateway();
  const auto& pack = engine_->pack();
  if (icebreak_turn_ == 1) {
    push(out, gw.generate_icebreak_question(pack.phrase("icebreak_client"), utterance, &metrics_));
    icebreak_turn_ = 2;
    last_question_ = out.back().text;
    return;
  }
  push(out, gw.generate_icebreak_comment(last_question_, utterance, &metrics_));
  icebreak_turn_ = 3;
  enter(Phase::BriefExplanation, out);
  const auto& cat = engine_->catalog();
  push(out, make_turn(pack.phrase("brief_intro", {{"name_a", cat.at(assignment_.candidate_a).name},
                                                   {"name_b", cat.at(assignment_.candidate_b).name}}),
                      Provenance::Fixed));
  push(out, make_turn(pack.phrase("brief_visited_question"), Provenance::Fixed));
  last_question_ = out.back().text;
}

void Session::run_brief(std::string_view utterance, Turns& out) {
  const auto& pack = engine_->pack();
  const auto& cat = engine_->catalog();
  switch (engine_->lexicon().classify_yes_no(utterance)) {
    case interview::YesNo::Yes: push(out, make_turn(pack.phrase("brief_visited_yes"), Provenance::Fixed)); break;
    case interview::YesNo::No: push(out, make_turn(pack.phrase("brief_visited_no"), Provenance::Fixed)); break;
    case interview::YesNo::Unknown:
      push(out, make_turn(pack.phrase("brief_visited_unknown"), Provenance::Fixed));
      break;
  }
  const char* keys[] = {"sight_intro_first", "sight_intro_second"};
  const std::string* ids[] = {&assignment_.candidate_a, &assignment_.candidate_b};
  for (int i = 0; i < 2; ++i) {
    auto t = make_turn(pack.phrase(keys[i], {{"summary", cat.at(*ids[i]).summary_one_line}}), Provenance::Generated);
    t.annotations.look_at_monitor = true;
    push(out, std::move(t));
  }
  enter(Phase::Interview, out);
  push(out, make_turn(pack.phrase("interview_intro"), Provenance::Fixed));
  interview::Interviewer iv(engine_->graph(), engine_->lexicon());
  const auto& loc = engine_->prepared().at(assignment_.recommended).loc;
  ask_interview_question(iv.begin(cursor_, loc), out, false);
}

void Session::ask_interview_question(int node, Turns& out, bool reask) {
  interview::Interviewer iv(engine_->graph(), engine_->lexicon());
  const auto& loc = engine_->prepared().at(assignment_.recommended).loc;
  auto q = iv.question_text(node, loc);
  if (reask) {
    push(out, make_turn(engine_->pack().phrase("reask_preamble") + " " + q, Provenance::Fixed));
  } else {
    push(out, make_turn(q, Provenance::Fixed));
  }
  last_question_ = q;
}

void Session::run_interview(std::string_view utterance, Turns& out) {
  interview::Interviewer iv(engine_->graph(), engine_->lexicon());
  const auto& loc = engine_->prepared().at(assignment_.recommended).loc;
  auto step = iv.answer(cursor_, profile_, utterance, loc);
  if (step.reask) {
    ask_interview_question(cursor_.node, out, true);
    return;
  }
  if (!text::trim(utterance).empty()) {
    push(out, engine_->gateway().generate_comment(last_question_, utterance, &metrics_));
  }
  if (step.next != interview::kExit) {
    ask_interview_question(step.next, out, false);
    return;
  }
  enter(Phase::Recommendation, out);
  run_recommendation(out);
}

void Session::run_recommendation(Turns& out) {
  const auto& cat = engine_->catalog();
  const auto& gw = engine_->gateway();
  const auto& rec = cat.at(assignment_.recommended);
  const auto& prepared = engine_->prepared().at(rec.sight_id);

  recommendation::RecommendationBundle b;
  b.sight_id = rec.sight_id;
  b.points = recommendation::select_points(profile_, prepared.loc, cat.features(rec.sight_id), rec, engine_->pack());
  b.search_context = recommendation::gather_context(cat, rec.sight_id, b.points, engine_->settings().recommend_hits);
  b.appeal = prepared.appeal;
  auto t = recommendation::recommend_utterance(gw, rec, rec.summary_one_line, b, &metrics_);
  t.annotations.look_at_monitor = true;
  push(out, std::move(t));

  const auto& other = cat.at(assignment_.other());
  auto c = recommendation::counter_utterance(gw, cat, other, cat.features(other.sight_id), rec.name, &metrics_);
  c.annotations.look_at_monitor = true;
  push(out, std::move(c));

  enter(Phase::QA, out);
  push(out, make_turn(engine_->pack().phrase("qa_prompt"), Provenance::Fixed));
  qa_stage_ = QaStage::AwaitDecision;
  last_question_ = out.back().text;
}

void Session::run_qa(std::string_view utterance, Turns& out) {
  const auto& pack = engine_->pack();
  auto answer_question = [&](std::string_view q) {
    const auto& s = engine_->settings();
    auto ctx = qa::assemble(engine_->catalog(), assignment_.candidate_a, assignment_.candidate_b,
                            assignment_.recommended, q, {s.qa_hits, s.qa_context_budget});
    push(out, qa::answer(engine_->gateway(), ctx, &metrics_));
    ++qa_answers_;
    push(out, make_turn(pack.phrase("qa_more"), Provenance::Fixed));
    qa_stage_ = QaStage::AwaitDecision;
  };

  if (qa_stage_ == QaStage::AwaitQuestion) {
    if (text::trim(utterance).empty()) {
      push(out, make_turn(pack.phrase("qa_more"), Provenance::Fixed));
      qa_stage_ = QaStage::AwaitDecision;
    } else {
      answer_question(utterance);
    }
    return;
  }

  auto intent = qa::wants_question(engine_->lexicon(), utterance);
  if (intent.question) {
    answer_question(*intent.question);
  } else if (intent.answer == interview::YesNo::Yes) {
    push(out, make_turn(pack.phrase("qa_go_ahead"), Provenance::Fixed));
    qa_stage_ = QaStage::AwaitQuestion;
  } else if (intent.answer == interview::YesNo::Unknown && !text::content_tokens(utterance).empty()) {
    // a statement such as "I want to know about parking" is taken as the question
    answer_question(text::trim(utterance));
  } else {
    run_closing(transcript_.back().ts, out);
  }
}

void Session::run_closing(Timestamp now, Turns& out) {
  enter(Phase::Closing, out);
  auto ctx = closing::make_context(engine_->catalog(), assignment_.recommended, assignment_.other(), elapsed(now));
  for (auto& t : closing::closing_turns(engine_->gateway(), ctx, &metrics_)) push(out, std::move(t));
  phase_ = Phase::Done;
}

void Session::persist_transcript(std::ostream& out) const { write_transcript(transcript_, out); }

void Session::persist_transcript(const std::filesystem::path& path) const {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + tmp.string() + " for writing");
    write_transcript(transcript_, out);
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("cannot move transcript into place at " + path.string() + ": " + ec.message());
}

std::unique_ptr<Session> Session::replay(const Engine& engine, const SightAssignment& assignment,
                                         const std::vector<TurnRecord>& records, Clock& live_clock, std::string id,
                                         ReplayReport* report) {
  // One advance per customer record; the greeting advance has none.
  struct Step {
    Timestamp ts;
    std::optional<std::string> utterance;
  };
  std::vector<Step> steps;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    if (r.speaker == Speaker::Customer) {
      steps.push_back({r.ts, r.text});
    } else if (i == 0) {
      steps.push_back({r.ts, std::nullopt});
    }
  }
  std::deque<Timestamp> instants;
  for (const auto& s : steps) instants.push_back(s.ts);

  auto replay_clock = std::make_unique<ReplayClock>(std::move(instants));
  auto session = engine.create_session(assignment, *replay_clock, std::move(id));
  session->owned_clock_ = std::move(replay_clock);
  ReplayReport rep;
  for (const auto& s : steps) {
    if (session->done()) throw std::invalid_argument("transcript continues after the session ended");
    if (s.utterance) {
      session->advance(std::string_view(*s.utterance));
    } else {
      session->advance(std::nullopt);
    }
    ++rep.advances;
  }
  const auto& regenerated = session->transcript_;
  for (std::size_t i = 0; i < std::max(regenerated.size(), records.size()); ++i) {
    if (i >= regenerated.size() || i >= records.size() || !(regenerated[i] == records[i])) {
      if (i < records.size() && records[i].speaker == Speaker::Customer) continue;
      ++rep.divergent_turns;
    }
  }
  session->transcript_ = records;
  for (auto it = records.rbegin(); it != records.rend(); ++it) {
    if (it->speaker == Speaker::Agent) {
      session->last_question_ = it->text;
      break;
    }
  }
  session->clock_ = &live_clock;
  session->owned_clock_.reset();
  if (report) *report = rep;
  return session;
}

}  // namespace tourdesk
