#pragma once

#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "tourdesk/bundle.hpp"
#include "tourdesk/clock.hpp"
#include "tourdesk/interview.hpp"
#include "tourdesk/llm/gateway.hpp"
#include "tourdesk/turn.hpp"

namespace tourdesk {

struct SightAssignment {
  std::string candidate_a;
  std::string candidate_b;
  std::string recommended;

  const std::string& other() const { return recommended == candidate_a ? candidate_b : candidate_a; }
  bool operator==(const SightAssignment&) const = default;
};

nlohmann::ordered_json to_json(const SightAssignment& a);
SightAssignment assignment_from_json(const nlohmann::json& j);

enum class Speaker { Agent, Customer };
std::string_view to_string(Speaker s);

struct TurnRecord {
  Timestamp ts;
  Speaker speaker = Speaker::Agent;
  std::string text;
  Phase phase = Phase::Greeting;
  std::optional<AgentAnnotations> annotations;  // agent turns only

  bool operator==(const TurnRecord&) const = default;
};

nlohmann::ordered_json to_json(const TurnRecord& r);
// Throws std::invalid_argument.
TurnRecord turn_record_from_json(const nlohmann::json& j);

// One JSON object per line, LF terminated.
void write_transcript(const std::vector<TurnRecord>& records, std::ostream& out);
std::string transcript_jsonl(const std::vector<TurnRecord>& records);
// Throws std::invalid_argument naming the offending line.
std::vector<TurnRecord> parse_transcript(std::istream& in);
std::vector<TurnRecord> load_transcript(const std::filesystem::path& path);

struct EngineSettings {
  Duration time_budget{std::chrono::seconds(300)};
  bool speech_normalization = false;  // fill AgentTurn::speech through kana normalization
  int qa_hits = 5;
  std::size_t qa_context_budget = 1200;
  int recommend_hits = 3;
};

class Session;

// Everything sessions share read-only: prepared corpus, templates, lexicon,
// question graph and the generation backend.
class Engine {
 public:
  Engine(bundle::Bundle prepared, llm::TemplatePack pack, interview::AnswerLexicon lexicon,
         interview::QuestionGraph graph, std::unique_ptr<llm::GenBackend> backend, llm::GatewayConfig gateway_config,
         EngineSettings settings);
  Engine(const Engine&) = delete;
  Engine& operator=(const Engine&) = delete;

  const bundle::Bundle& prepared() const { return bundle_; }
  const sightdb::Catalog& catalog() const { return bundle_.catalog; }
  const llm::TemplatePack& pack() const { return pack_; }
  const interview::AnswerLexicon& lexicon() const { return lexicon_; }
  const interview::QuestionGraph& graph() const { return graph_; }
  const llm::Gateway& gateway() const { return gateway_; }
  const EngineSettings& settings() const { return settings_; }

  // Throws ConfigError naming every problem with the assignment.
  void validate(const SightAssignment& a) const;

  // The clock must outlive the session. An empty id draws a fresh random one.
  std::unique_ptr<Session> create_session(const SightAssignment& a, Clock& clock, std::string id = {}) const;

 private:
  bundle::Bundle bundle_;
  llm::TemplatePack pack_;
  interview::AnswerLexicon lexicon_;
  interview::QuestionGraph graph_;
  std::unique_ptr<llm::GenBackend> backend_;
  llm::Gateway gateway_;
  EngineSettings settings_;
};

std::string new_session_id();

// QA sub-state: waiting for "any questions?" to be answered, or for the question itself.
enum class QaStage { AwaitDecision, AwaitQuestion };

// Comparable snapshot of everything replay has to reconstruct.
struct SessionState {
  Phase phase = Phase::Greeting;
  interview::CustomerProfile profile;
  interview::InterviewCursor cursor;
  int icebreak_turn = 0;
  QaStage qa_stage = QaStage::AwaitDecision;
  int qa_answers = 0;
  std::vector<TurnRecord> transcript;

  bool operator==(const SessionState&) const = default;
};

struct ReplayReport {
  std::size_t advances = 0;
  // agent records the engine regenerated differently (expected with a live model)
  std::size_t divergent_turns = 0;
};

// One consultation. Single writer: callers serialize advance() per session.
class Session {
 public:
  Session(const Engine& engine, SightAssignment assignment, Clock& clock, std::string id);

  // Runs the current phase handler. std::nullopt is silence; outside Greeting
  // it is recorded as an empty customer turn. Throws SessionClosedError in Done.
  std::vector<AgentTurn> advance(std::optional<std::string_view> utterance);

  const std::string& id() const { return id_; }
  Phase phase() const { return phase_; }
  bool done() const { return phase_ == Phase::Done; }
  const SightAssignment& assignment() const { return assignment_; }
  const interview::CustomerProfile& profile() const { return profile_; }
  const interview::InterviewCursor& cursor() const { return cursor_; }
  const std::vector<TurnRecord>& transcript() const { return transcript_; }
  int icebreak_turn() const { return icebreak_turn_; }
  QaStage qa_stage() const { return qa_stage_; }
  int qa_answers() const { return qa_answers_; }
  int interview_questions_asked() const { return static_cast<int>(cursor_.asked.size()); }
  const llm::GenerationMetrics& metrics() const { return metrics_; }
  // Set by the first advance.
  std::optional<Timestamp> started_at() const { return started_at_; }
  Duration elapsed(Timestamp now) const;
  SessionState state() const;

  void persist_transcript(std::ostream& out) const;
  // Atomic replace through a temporary file next to `path`; throws IoError.
  void persist_transcript(const std::filesystem::path& path) const;

  // Re-drives a fresh session with the recorded customer turns and
  // timestamps; the recorded transcript is kept as the session's transcript.
  // Afterwards the session runs on `live_clock`.
  static std::unique_ptr<Session> replay(const Engine& engine, const SightAssignment& assignment,
                                         const std::vector<TurnRecord>& records, Clock& live_clock,
                                         std::string id = {}, ReplayReport* report = nullptr);

 private:
  using Turns = std::vector<AgentTurn>;

  void enter(Phase p, Turns& out);
  void run_greeting(Turns& out);
  void run_icebreaker(std::string_view utterance, Turns& out);
  void run_brief(std::string_view utterance, Turns& out);
  void run_interview(std::string_view utterance, Turns& out);
  void run_recommendation(Turns& out);
  void run_qa(std::string_view utterance, Turns& out);
  void run_closing(Timestamp now, Turns& out);
  void ask_interview_question(int node, Turns& out, bool reask);
  void push(Turns& out, AgentTurn t);

  const Engine* engine_;
  SightAssignment assignment_;
  Clock* clock_;
  std::unique_ptr<Clock> owned_clock_;
  std::string id_;

  Phase phase_ = Phase::Greeting;
  std::optional<Timestamp> started_at_;
  interview::CustomerProfile profile_;
  interview::InterviewCursor cursor_;
  int icebreak_turn_ = 0;
  std::string last_question_;  // most recent agent question, context for comments
  QaStage qa_stage_ = QaStage::AwaitDecision;
  int qa_answers_ = 0;
  std::vector<TurnRecord> transcript_;
  llm::GenerationMetrics metrics_;
};

// "[ts] Phase speaker: text" lines for terminal display of a transcript.
std::string render_transcript(const std::vector<TurnRecord>& records);

}  // namespace tourdesk
