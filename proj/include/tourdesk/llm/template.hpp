#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace tourdesk::llm {

enum class TemplateName {
  IcebreakQuestion,
  IcebreakComment,
  Summarize,
  GenerateQuestions,
  TranslatePoint,
  Comment,
  ExtractInfo,
  RecommendAppeal,
  RecommendUtterance,
  CounterUtterance,
  QaAnswer,
  ClosingNarration,
  KanaNormalize,
};

inline constexpr TemplateName kAllTemplates[] = {
    TemplateName::IcebreakQuestion,  TemplateName::IcebreakComment,    TemplateName::Summarize,
    TemplateName::GenerateQuestions, TemplateName::TranslatePoint,     TemplateName::Comment,
    TemplateName::ExtractInfo,       TemplateName::RecommendAppeal,    TemplateName::RecommendUtterance,
    TemplateName::CounterUtterance,  TemplateName::QaAnswer,           TemplateName::ClosingNarration,
    TemplateName::KanaNormalize,
};

std::string_view to_string(TemplateName n);
std::optional<TemplateName> parse_template_name(std::string_view s);

// Templates that must never produce a question.
bool is_comment_class(TemplateName n);

using Bindings = std::map<std::string, std::string, std::less<>>;

// A few-shot prompt: instruction header, worked examples, and a query block
// with {{slot}} markers.
struct PromptTemplate {
  TemplateName name = TemplateName::Comment;
  std::string header;
  std::vector<std::string> shots;
  std::string query;
  std::vector<std::string> stop;
  int max_length = 200;  // code points of completion
  double temperature = 0.3;
  std::string fallback;  // may contain slots

  std::vector<std::string> slots() const;
};

// Slot names in order of first appearance.
std::vector<std::string> slot_names(std::string_view pattern);

// Single-pass {{slot}} substitution. Throws TemplateError naming the first
// unbound slot. Braces inside values are defused so no marker survives.
std::string fill(std::string_view pattern, const Bindings& bindings, std::string_view context = "pattern");

// header, shots and the bound query block separated by "###" lines.
std::string render(const PromptTemplate& tmpl, const Bindings& bindings);

class TemplatePack {
 public:
  static TemplatePack from_json(const nlohmann::json& j);
  static TemplatePack load(const std::filesystem::path& path);

  const PromptTemplate& get(TemplateName name) const;
  // Fixed utterance with slots filled; throws TemplateError for unknown keys.
  std::string phrase(std::string_view key, const Bindings& bindings = {}) const;
  bool has_phrase(std::string_view key) const;

  const std::string& language() const { return language_; }
  const std::vector<std::string>& forbidden_phrases() const { return forbidden_; }
  // Characters whose reading is ambiguous for TTS and the readings allowed for each.
  const std::map<std::string, std::vector<std::string>>& ambiguous_readings() const { return ambiguous_; }

 private:
  std::string language_;
  std::map<TemplateName, PromptTemplate> templates_;
  std::map<std::string, std::string, std::less<>> phrases_;
  std::vector<std::string> forbidden_;
  std::map<std::string, std::vector<std::string>> ambiguous_;
};

}  // namespace tourdesk::llm
