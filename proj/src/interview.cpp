#include "tourdesk/interview.hpp"

#include <algorithm>
#include <fstream>
#include <functional>
#include <set>

#include "tourdesk/error.hpp"
#include "tourdesk/text.hpp"

namespace tourdesk::interview {

using nlohmann::json;

std::string_view to_string(YesNo v) {
  switch (v) {
    case YesNo::Yes: return "yes";
    case YesNo::No: return "no";
    case YesNo::Unknown: return "unknown";
  }
  return "unknown";
}

std::string_view to_string(Companion v) {
  switch (v) {
    case Companion::Alone: return "alone";
    case Companion::Friend: return "friend";
    case Companion::Family: return "family";
    case Companion::Unknown: return "unknown";
  }
  return "unknown";
}

std::string_view to_string(AnswerClass v) {
  switch (v) {
    case AnswerClass::Yes: return "yes";
    case AnswerClass::No: return "no";
    case AnswerClass::Alone: return "alone";
    case AnswerClass::Friend: return "friend";
    case AnswerClass::Family: return "family";
    case AnswerClass::Answered: return "answered";
    case AnswerClass::Unknown: return "unknown";
  }
  return "unknown";
}

std::string_view to_string(AnswerSchema v) {
  switch (v) {
    case AnswerSchema::YesNo: return "yes_no";
    case AnswerSchema::Companion: return "companion";
    case AnswerSchema::Ages: return "ages";
    case AnswerSchema::Open: return "open";
  }
  return "open";
}

std::optional<AnswerClass> parse_answer_class(std::string_view s) {
  for (auto c : {AnswerClass::Yes, AnswerClass::No, AnswerClass::Alone, AnswerClass::Friend, AnswerClass::Family,
                 AnswerClass::Answered, AnswerClass::Unknown}) {
    if (to_string(c) == s) return c;
  }
  return std::nullopt;
}

std::optional<Companion> parse_companion(std::string_view s) {
  for (auto c : {Companion::Alone, Companion::Friend, Companion::Family, Companion::Unknown}) {
    if (to_string(c) == s) return c;
  }
  return std::nullopt;
}

namespace {

std::optional<AnswerSchema> parse_schema(std::string_view s) {
  for (auto c : {AnswerSchema::YesNo, AnswerSchema::Companion, AnswerSchema::Ages, AnswerSchema::Open}) {
    if (to_string(c) == s) return c;
  }
  return std::nullopt;
}

std::vector<std::regex> compile_patterns(const json& j, const std::string& where) {
  std::vector<std::regex> out;
  if (!j.is_array()) throw ConfigError("lexicon: '" + where + "' must be an array of patterns");
  for (const auto& p : j) {
    try {
      out.emplace_back(p.get<std::string>(), std::regex::ECMAScript | std::regex::icase | std::regex::optimize);
    } catch (const std::exception& e) {
      throw ConfigError("lexicon: bad pattern in '" + where + "': " + e.what());
    }
  }
  return out;
}

bool any_match(const std::vector<std::regex>& patterns, const std::string& s) {
  return std::any_of(patterns.begin(), patterns.end(), [&](const std::regex& re) { return std::regex_search(s, re); });
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

bool is_ascii_word(std::string_view s) {
  return std::all_of(s.begin(), s.end(), [](char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '-' || c == ' ';
  });
}

bool word_boundary(const std::string& s, std::size_t pos, std::size_t len) {
  auto is_word = [](char c) { return (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9'); };
  bool left = pos == 0 || !is_word(s[pos - 1]);
  bool right = pos + len >= s.size() || !is_word(s[pos + len]);
  return left && right;
}

}  // namespace

std::string normalize_utterance(std::string_view utterance) {
  auto s = text::fold_fullwidth(utterance);
  s = text::replace_all(std::move(s), "\xE2\x80\x99", "'");
  s = text::replace_all(std::move(s), "\xE2\x80\x98", "'");
  return text::to_lower_ascii(text::collapse_whitespace(s));
}

AnswerLexicon AnswerLexicon::from_json(const json& j) {
  AnswerLexicon lex;
  try {
    lex.language_ = j.value("language", "en");
    lex.uncertain_ = compile_patterns(j.value("uncertain", json::array()), "uncertain");
    lex.yes_ = compile_patterns(j.at("yes"), "yes");
    lex.no_ = compile_patterns(j.at("no"), "no");
    const auto& comp = j.at("companion");
    lex.family_ = compile_patterns(comp.at("family"), "companion.family");
    lex.friend_ = compile_patterns(comp.at("friend"), "companion.friend");
    lex.alone_ = compile_patterns(comp.at("alone"), "companion.alone");
    lex.interrogative_ = compile_patterns(j.value("interrogative", json::array()), "interrogative");
    const auto number_words = j.value("number_words", json::object());
    for (const auto& [word, value] : number_words.items()) {
      lex.number_words_.emplace_back(normalize_utterance(word), value.get<int>());
    }
    lex.loc_question_ = std::regex(j.at("loc_question_format").get<std::string>(), std::regex::ECMAScript);
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(std::string("lexicon: ") + e.what());
  }
  return lex;
}

AnswerLexicon AnswerLexicon::load(const std::filesystem::path& path) { return from_json(read_json_file(path)); }

YesNo AnswerLexicon::classify_yes_no(std::string_view utterance) const {
  auto s = normalize_utterance(utterance);
  if (any_match(uncertain_, s)) return YesNo::Unknown;
  if (any_match(no_, s)) return YesNo::No;
  if (any_match(yes_, s)) return YesNo::Yes;
  return YesNo::Unknown;
}

Companion AnswerLexicon::classify_companion(std::string_view utterance) const {
  auto s = normalize_utterance(utterance);
  if (any_match(family_, s)) return Companion::Family;
  if (any_match(friend_, s)) return Companion::Friend;
  if (any_match(alone_, s)) return Companion::Alone;
  return Companion::Unknown;
}

std::vector<int> AnswerLexicon::extract_ages(std::string_view utterance) const {
  auto s = normalize_utterance(utterance);
  static const std::regex digits_re(R"(\d+)");
  static const std::regex count_re(R"(^\s*(?:kids?|children|child|sons?|daughters?|boys?|girls?|people|of (?:us|them)|人))");
  // "one is seven": a spelled number used as the subject is a pronoun, not an age
  static const std::regex subject_re(R"(^\s*(?:is|was)\b|^'s\b)");
  std::vector<std::pair<std::size_t, int>> found;
  for (auto it = std::sregex_iterator(s.begin(), s.end(), digits_re); it != std::sregex_iterator(); ++it) {
    auto pos = static_cast<std::size_t>(it->position(0));
    auto rest = s.substr(pos + static_cast<std::size_t>(it->length(0)));
    if (std::regex_search(rest, count_re, std::regex_constants::match_continuous)) continue;
    auto str = it->str();
    if (str.size() > 3) continue;
    found.emplace_back(pos, std::stoi(str));
  }
  for (const auto& [word, value] : number_words_) {
    std::size_t pos = 0;
    while ((pos = s.find(word, pos)) != std::string::npos) {
      bool ok = !is_ascii_word(word) || word_boundary(s, pos, word.size());
      if (ok) {
        auto rest = s.substr(pos + word.size());
        bool counted = std::regex_search(rest, count_re, std::regex_constants::match_continuous);
        bool subject = std::regex_search(rest, subject_re, std::regex_constants::match_continuous);
        if (!counted && !subject) found.emplace_back(pos, value);
      }
      pos += word.size();
    }
  }
  std::sort(found.begin(), found.end());
  std::vector<int> ages;
  for (const auto& [pos, v] : found) {
    if (v >= 0 && v <= 120) ages.push_back(v);
  }
  return ages;
}

bool AnswerLexicon::is_interrogative(std::string_view utterance) const {
  if (text::contains_question_mark(utterance)) return true;
  return any_match(interrogative_, normalize_utterance(utterance));
}

bool AnswerLexicon::is_loc_question(std::string_view question) const {
  return std::regex_match(text::trim(question), loc_question_);
}

// ---------------------------------------------------------------------------
// Question graph

std::vector<AnswerClass> answer_classes(AnswerSchema schema) {
  switch (schema) {
    case AnswerSchema::YesNo: return {AnswerClass::Yes, AnswerClass::No};
    case AnswerSchema::Companion: return {AnswerClass::Alone, AnswerClass::Friend, AnswerClass::Family};
    case AnswerSchema::Ages:
    case AnswerSchema::Open: return {AnswerClass::Answered};
  }
  return {};
}

QuestionGraph QuestionGraph::from_json(const json& j) {
  QuestionGraph g;
  try {
    g.start_ = j.value("start", 1);
    for (const auto& n : j.at("nodes")) {
      QuestionNode node;
      node.id = n.at("id").get<int>();
      if (node.id == kExit) throw ConfigError("question graph: node id 0 is reserved for exit");
      auto kind = n.at("kind").get<std::string>();
      if (kind == "mandatory") {
        node.kind = NodeKind::Mandatory;
      } else if (kind == "loc_wise") {
        node.kind = NodeKind::LocWise;
        node.loc_index = n.at("loc_index").get<int>();
      } else {
        throw ConfigError("question graph: node " + std::to_string(node.id) + " has unknown kind '" + kind + "'");
      }
      node.item = n.value("item", "");
      node.slot = n.at("slot").get<std::string>();
      static const std::set<std::string> kSlots = {"participants", "brings_children", "children_ages",
                                                   "uses_car", "points_of_interest", "loc_answer"};
      if (!kSlots.contains(node.slot)) {
        throw ConfigError("question graph: node " + std::to_string(node.id) + " has unknown slot '" + node.slot + "'");
      }
      node.text = n.at("text").get<std::string>();
      auto schema = parse_schema(n.at("answer_schema").get<std::string>());
      if (!schema) throw ConfigError("question graph: node " + std::to_string(node.id) + " has unknown answer_schema");
      node.schema = *schema;
      for (const auto& [key, target] : n.at("transitions").items()) {
        auto cls = parse_answer_class(key);
        if (!cls) throw ConfigError("question graph: node " + std::to_string(node.id) + " unknown answer class '" + key + "'");
        int to = target.is_string() && target.get<std::string>() == "exit" ? kExit : target.get<int>();
        node.transitions[*cls] = to;
      }
      auto def = parse_answer_class(n.at("default_answer").get<std::string>());
      if (!def) throw ConfigError("question graph: node " + std::to_string(node.id) + " bad default_answer");
      node.default_answer = *def;
      if (!g.nodes_.emplace(node.id, node).second) {
        throw ConfigError("question graph: duplicate node id " + std::to_string(node.id));
      }
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(std::string("question graph: ") + e.what());
  }
  g.validate();
  return g;
}

QuestionGraph QuestionGraph::load(const std::filesystem::path& path) { return from_json(read_json_file(path)); }

void QuestionGraph::validate() const {
  if (!nodes_.contains(start_)) throw ConfigError("question graph: start node missing");
  for (const auto& [id, node] : nodes_) {
    for (auto cls : answer_classes(node.schema)) {
      if (!node.transitions.contains(cls)) {
        throw ConfigError("question graph: node " + std::to_string(id) + " lacks a transition for '" +
                          std::string(to_string(cls)) + "'");
      }
    }
    if (!node.transitions.contains(node.default_answer)) {
      throw ConfigError("question graph: node " + std::to_string(id) + " default answer has no transition");
    }
    for (const auto& [cls, to] : node.transitions) {
      if (to != kExit && !nodes_.contains(to)) {
        throw ConfigError("question graph: node " + std::to_string(id) + " points at missing node " +
                          std::to_string(to));
      }
    }
  }
  // Acyclic and every path ends at exit: DFS with colors.
  std::map<int, int> color;
  std::function<void(int)> visit = [&](int id) {
    color[id] = 1;
    for (const auto& [cls, to] : nodes_.at(id).transitions) {
      if (to == kExit) continue;
      if (color[to] == 1) throw ConfigError("question graph: cycle through node " + std::to_string(to));
      if (color[to] == 0) visit(to);
    }
    color[id] = 2;
  };
  visit(start_);
}

const QuestionNode& QuestionGraph::node(int id) const {
  auto it = nodes_.find(id);
  if (it == nodes_.end()) throw std::out_of_range("no question node " + std::to_string(id));
  return it->second;
}

int QuestionGraph::transition(int id, AnswerClass answer) const {
  const auto& n = node(id);
  auto it = n.transitions.find(answer);
  if (it == n.transitions.end()) {
    throw std::out_of_range("node " + std::to_string(id) + " has no transition for " + std::string(to_string(answer)));
  }
  return it->second;
}

// ---------------------------------------------------------------------------
// Location-wise question selection

LocWiseQuestionSet select_loc_questions(std::string_view sight_id, const std::vector<std::string>& candidates,
                                        const AnswerLexicon& lexicon, std::size_t k) {
  LocWiseQuestionSet set;
  set.sight_id = std::string(sight_id);
  std::set<std::string> seen;
  for (const auto& raw : candidates) {
    if (set.questions.size() >= k) break;
    auto q = text::collapse_whitespace(text::trim(raw));
    if (!lexicon.is_loc_question(q)) continue;
    if (!seen.insert(text::fold_for_dedupe(q)).second) continue;
    set.questions.push_back(std::move(q));
  }
  if (set.questions.empty()) {
    throw CorpusError({"sight '" + std::string(sight_id) + "': no well-formed location-wise question among " +
                       std::to_string(candidates.size()) + " candidates"});
  }
  return set;
}

nlohmann::ordered_json to_json(const CustomerProfile& p) {
  nlohmann::ordered_json j;
  j["participants"] = std::string(to_string(p.participants));
  j["brings_children"] = p.brings_children ? nlohmann::ordered_json(*p.brings_children) : nullptr;
  j["children_ages"] = p.children_ages;
  j["uses_car"] = p.uses_car ? nlohmann::ordered_json(*p.uses_car) : nullptr;
  j["points_of_interest"] = p.points_of_interest;
  auto loc = nlohmann::ordered_json::array();
  for (const auto& [key, value] : p.loc_answers) {
    loc.push_back({{"sight_id", key.first}, {"index", key.second}, {"answer", value}});
  }
  j["loc_answers"] = std::move(loc);
  return j;
}

// ---------------------------------------------------------------------------
// Interviewer

int Interviewer::skip_unavailable(int id, std::size_t n_loc_questions) const {
  while (id != kExit) {
    const auto& n = graph_->node(id);
    if (n.kind != NodeKind::LocWise || static_cast<std::size_t>(n.loc_index) < n_loc_questions) return id;
    id = graph_->transition(id, n.default_answer);
  }
  return id;
}

int Interviewer::begin(InterviewCursor& cursor, const LocWiseQuestionSet& loc) const {
  cursor = InterviewCursor{};
  cursor.node = skip_unavailable(graph_->start(), loc.questions.size());
  if (cursor.node != kExit) cursor.asked.push_back(cursor.node);
  return cursor.node;
}

int Interviewer::resolve(int from, AnswerClass answer, std::size_t n_loc_questions) const {
  return skip_unavailable(graph_->transition(from, answer), n_loc_questions);
}

AnswerClass Interviewer::classify(const QuestionNode& node, std::string_view utterance, std::vector<int>* ages) const {
  switch (node.schema) {
    case AnswerSchema::YesNo:
      switch (lexicon_->classify_yes_no(utterance)) {
        case YesNo::Yes: return AnswerClass::Yes;
        case YesNo::No: return AnswerClass::No;
        case YesNo::Unknown: return AnswerClass::Unknown;
      }
      return AnswerClass::Unknown;
    case AnswerSchema::Companion:
      switch (lexicon_->classify_companion(utterance)) {
        case Companion::Alone: return AnswerClass::Alone;
        case Companion::Friend: return AnswerClass::Friend;
        case Companion::Family: return AnswerClass::Family;
        case Companion::Unknown: return AnswerClass::Unknown;
      }
      return AnswerClass::Unknown;
    case AnswerSchema::Ages: {
      auto found = lexicon_->extract_ages(utterance);
      if (found.empty()) return AnswerClass::Unknown;
      if (ages) *ages = std::move(found);
      return AnswerClass::Answered;
    }
    case AnswerSchema::Open:
      return text::trim(utterance).empty() ? AnswerClass::Unknown : AnswerClass::Answered;
  }
  return AnswerClass::Unknown;
}

void Interviewer::record(CustomerProfile& p, const QuestionNode& node, AnswerClass answer, std::string_view utterance,
                         const std::vector<int>& ages, const LocWiseQuestionSet& loc) const {
  if (answer == AnswerClass::Unknown) return;
  const auto& slot = node.slot;
  if (slot == "loc_answer") {
    if (answer != AnswerClass::Yes && answer != AnswerClass::No) return;
    p.loc_answers.try_emplace({loc.sight_id, node.loc_index}, answer == AnswerClass::Yes);
  } else if (slot == "participants") {
    if (p.participants != Companion::Unknown) return;
    if (answer == AnswerClass::Family) p.participants = Companion::Family;
    if (answer == AnswerClass::Friend) p.participants = Companion::Friend;
    if (answer == AnswerClass::Alone) p.participants = Companion::Alone;
  } else if (slot == "brings_children" || slot == "uses_car") {
    if (answer != AnswerClass::Yes && answer != AnswerClass::No) return;
    auto& tri = slot == "uses_car" ? p.uses_car : p.brings_children;
    if (!tri) tri = answer == AnswerClass::Yes;
  } else if (slot == "children_ages") {
    if (p.children_ages.empty() && p.brings_children == true) p.children_ages = ages;
  } else if (slot == "points_of_interest") {
    if (p.points_of_interest.empty() && answer == AnswerClass::Answered) p.points_of_interest = text::trim(utterance);
  }
}

StepOutcome Interviewer::answer(InterviewCursor& cursor, CustomerProfile& profile, std::string_view utterance,
                                const LocWiseQuestionSet& loc) const {
  StepOutcome out;
  if (cursor.node == kExit) throw std::logic_error("interview already finished");
  const auto& node = graph_->node(cursor.node);
  std::vector<int> ages;
  out.answer = classify(node, utterance, &ages);
  if (out.answer == AnswerClass::Unknown) {
    if (cursor.reasks == 0) {
      cursor.reasks = 1;
      out.reask = true;
      return out;
    }
    out.answer = node.default_answer;
  }
  record(profile, node, out.answer, utterance, ages, loc);
  out.next = resolve(cursor.node, out.answer, loc.questions.size());
  cursor.node = out.next;
  cursor.reasks = 0;
  if (out.next != kExit) cursor.asked.push_back(out.next);
  return out;
}

std::string Interviewer::question_text(int node_id, const LocWiseQuestionSet& loc) const {
  const auto& node = graph_->node(node_id);
  if (node.kind == NodeKind::LocWise) {
    auto idx = static_cast<std::size_t>(node.loc_index);
    if (idx >= loc.questions.size()) throw std::out_of_range("no location-wise question for slot " + std::to_string(idx));
    return text::replace_all(node.text, "{{loc_question}}", loc.questions[idx]);
  }
  return node.text;
}

}  // namespace tourdesk::interview
