#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <regex>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

// Interview phase: the prepared question graph, answer classification over a
// pattern lexicon, slot filling, and location-wise question selection.
namespace tourdesk::interview {

enum class YesNo { Yes, No, Unknown };
enum class Companion { Alone, Friend, Family, Unknown };

// Parsed answer class, the key of a node's transition table.
enum class AnswerClass { Yes, No, Alone, Friend, Family, Answered, Unknown };

enum class AnswerSchema { YesNo, Companion, Ages, Open };
enum class NodeKind { Mandatory, LocWise };

std::string_view to_string(YesNo v);
std::string_view to_string(Companion v);
std::string_view to_string(AnswerClass v);
std::string_view to_string(AnswerSchema v);
std::optional<AnswerClass> parse_answer_class(std::string_view s);
std::optional<Companion> parse_companion(std::string_view s);

class AnswerLexicon {
 public:
  static AnswerLexicon from_json(const nlohmann::json& j);
  static AnswerLexicon load(const std::filesystem::path& path);

  // Hedges ("not sure") are tried first and give Unknown, then negative
  // patterns, then affirmative ones.
  YesNo classify_yes_no(std::string_view utterance) const;
  // Family, then friend, then alone.
  Companion classify_companion(std::string_view utterance) const;
  // Digit and spelled ages in order of appearance; values outside [0, 120] dropped.
  std::vector<int> extract_ages(std::string_view utterance) const;
  bool is_interrogative(std::string_view utterance) const;
  // Location-wise question format, e.g. "Do you like ... ?".
  bool is_loc_question(std::string_view question) const;

  const std::string& language() const { return language_; }

 private:
  std::string language_;
  std::vector<std::regex> uncertain_;
  std::vector<std::regex> yes_;
  std::vector<std::regex> no_;
  std::vector<std::regex> family_;
  std::vector<std::regex> friend_;
  std::vector<std::regex> alone_;
  std::vector<std::regex> interrogative_;
  std::vector<std::pair<std::string, int>> number_words_;
  std::regex loc_question_;
};

// Lowercased, full-width folded, typographic apostrophes straightened.
std::string normalize_utterance(std::string_view utterance);

constexpr int kExit = 0;

struct QuestionNode {
  int id = 0;
  NodeKind kind = NodeKind::Mandatory;
  std::string item;
  // Profile slot filled by the answer: participants, brings_children,
  // children_ages, uses_car, points_of_interest or loc_answer.
  std::string slot;
  std::string text;  // location-wise nodes resolve their text per sight
  AnswerSchema schema = AnswerSchema::YesNo;
  std::map<AnswerClass, int> transitions;  // target node id or kExit
  AnswerClass default_answer = AnswerClass::Unknown;
  int loc_index = -1;  // slot in the location-wise question set
};

class QuestionGraph {
 public:
  static QuestionGraph from_json(const nlohmann::json& j);
  static QuestionGraph load(const std::filesystem::path& path);

  int start() const { return start_; }
  const QuestionNode& node(int id) const;
  bool contains(int id) const { return nodes_.contains(id); }
  const std::map<int, QuestionNode>& nodes() const { return nodes_; }

  // Raw transition; throws std::out_of_range for a class the node does not accept.
  int transition(int id, AnswerClass answer) const;

 private:
  void validate() const;

  int start_ = 1;
  std::map<int, QuestionNode> nodes_;
};

// Answer classes the node's schema can produce (excluding Unknown).
std::vector<AnswerClass> answer_classes(AnswerSchema schema);

struct LocWiseQuestionSet {
  std::string sight_id;
  std::vector<std::string> questions;  // at most 3, pairwise distinct
  std::vector<std::string> points;     // recommendation point per question

  bool operator==(const LocWiseQuestionSet&) const = default;
};

// Keeps well-formed questions, drops duplicates by folded text, keeps the first
// k in generation order. Throws CorpusError when nothing is well formed.
LocWiseQuestionSet select_loc_questions(std::string_view sight_id, const std::vector<std::string>& candidates,
                                        const AnswerLexicon& lexicon, std::size_t k = 3);

struct CustomerProfile {
  Companion participants = Companion::Unknown;
  std::optional<bool> brings_children;
  std::vector<int> children_ages;
  std::optional<bool> uses_car;
  std::string points_of_interest;
  // (sight id, question index) -> answer; absent means not asked or unknown
  std::map<std::pair<std::string, int>, bool> loc_answers;

  bool operator==(const CustomerProfile&) const = default;
};

nlohmann::ordered_json to_json(const CustomerProfile& p);

// Where the interview stands inside one session.
struct InterviewCursor {
  int node = 0;  // 0 before the first question and after exit
  int reasks = 0;
  std::vector<int> asked;  // distinct node ids, in order

  bool operator==(const InterviewCursor&) const = default;
};

struct StepOutcome {
  bool reask = false;
  AnswerClass answer = AnswerClass::Unknown;
  int next = kExit;  // valid when !reask
};

// Drives the graph for one sight assignment. Location-wise nodes beyond the
// available question count are skipped.
class Interviewer {
 public:
  Interviewer(const QuestionGraph& graph, const AnswerLexicon& lexicon) : graph_(&graph), lexicon_(&lexicon) {}

  // First node to ask (start node after skipping), never kExit for a sane graph.
  int begin(InterviewCursor& cursor, const LocWiseQuestionSet& loc) const;

  // Classifies the answer to cursor.node, fills the profile and moves the cursor.
  // An unknown answer is re-asked once; a second unknown applies the node default.
  StepOutcome answer(InterviewCursor& cursor, CustomerProfile& profile, std::string_view utterance,
                     const LocWiseQuestionSet& loc) const;

  std::string question_text(int node_id, const LocWiseQuestionSet& loc) const;

  AnswerClass classify(const QuestionNode& node, std::string_view utterance, std::vector<int>* ages) const;

  // Follows the transition and skips location-wise nodes without a question.
  int resolve(int from, AnswerClass answer, std::size_t n_loc_questions) const;

 private:
  int skip_unavailable(int id, std::size_t n_loc_questions) const;
  void record(CustomerProfile& profile, const QuestionNode& node, AnswerClass answer, std::string_view utterance,
              const std::vector<int>& ages, const LocWiseQuestionSet& loc) const;

  const QuestionGraph* graph_;
  const AnswerLexicon* lexicon_;
};

}  // namespace tourdesk::interview
