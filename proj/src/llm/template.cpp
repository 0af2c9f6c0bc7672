#include "tourdesk/llm/template.hpp"

#include <algorithm>
#include <array>
#include <fstream>

#include "tourdesk/error.hpp"

namespace tourdesk::llm {

using nlohmann::json;

namespace {

constexpr std::array kTemplateNames = {
    "icebreak_question", "icebreak_comment",   "summarize", "generate_questions", "translate_point",
    "comment",           "extract_info",       "recommend_appeal", "recommend_utterance", "counter_utterance",
    "qa_answer",         "closing_narration",  "kana_normalize"};

}  // namespace

std::string_view to_string(TemplateName n) { return kTemplateNames[static_cast<std::size_t>(n)]; }

std::optional<TemplateName> parse_template_name(std::string_view s) {
  for (std::size_t i = 0; i < kTemplateNames.size(); ++i) {
    if (s == kTemplateNames[i]) return static_cast<TemplateName>(i);
  }
  return std::nullopt;
}

bool is_comment_class(TemplateName n) {
  switch (n) {
    case TemplateName::IcebreakComment:
    case TemplateName::Comment:
    case TemplateName::TranslatePoint:
    case TemplateName::RecommendAppeal:
    case TemplateName::RecommendUtterance:
    case TemplateName::CounterUtterance:
    case TemplateName::ClosingNarration:
      return true;
    default:
      return false;
  }
}

std::vector<std::string> slot_names(std::string_view pattern) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while ((pos = pattern.find("{{", pos)) != std::string_view::npos) {
    auto end = pattern.find("}}", pos + 2);
    if (end == std::string_view::npos) break;
    std::string name(pattern.substr(pos + 2, end - pos - 2));
    if (std::find(out.begin(), out.end(), name) == out.end()) out.push_back(name);
    pos = end + 2;
  }
  return out;
}

std::vector<std::string> PromptTemplate::slots() const { return slot_names(query); }

std::string fill(std::string_view pattern, const Bindings& bindings, std::string_view context) {
  std::string out;
  out.reserve(pattern.size() + 64);
  std::size_t pos = 0;
  while (true) {
    auto open = pattern.find("{{", pos);
    if (open == std::string_view::npos) {
      out.append(pattern.substr(pos));
      break;
    }
    auto close = pattern.find("}}", open + 2);
    if (close == std::string_view::npos) {
      out.append(pattern.substr(pos));
      break;
    }
    out.append(pattern.substr(pos, open - pos));
    auto name = pattern.substr(open + 2, close - open - 2);
    auto it = bindings.find(name);
    if (it == bindings.end()) {
      throw TemplateError("unbound slot '" + std::string(name) + "' in " + std::string(context));
    }
    std::string value = it->second;
    std::size_t p = 0;
    while ((p = value.find("{{", p)) != std::string::npos) {
      value.replace(p, 2, "{ {");
      p += 3;
    }
    out.append(value);
    pos = close + 2;
  }
  return out;
}

std::string render(const PromptTemplate& tmpl, const Bindings& bindings) {
  std::string out = tmpl.header;
  for (const auto& shot : tmpl.shots) {
    out += "\n###\n";
    out += shot;
  }
  out += "\n###\n";
  out += fill(tmpl.query, bindings, "template '" + std::string(to_string(tmpl.name)) + "'");
  return out;
}

TemplatePack TemplatePack::from_json(const json& j) {
  TemplatePack pack;
  try {
    pack.language_ = j.value("language", "en");
    for (const auto& [name, t] : j.at("templates").items()) {
      auto id = parse_template_name(name);
      if (!id) throw TemplateError("unknown template '" + name + "'");
      PromptTemplate tmpl;
      tmpl.name = *id;
      tmpl.header = t.at("header").get<std::string>();
      tmpl.shots = t.at("shots").get<std::vector<std::string>>();
      tmpl.query = t.at("query").get<std::string>();
      tmpl.stop = t.value("stop", std::vector<std::string>{});
      tmpl.max_length = t.value("max_length", 200);
      tmpl.temperature = t.value("temperature", 0.3);
      tmpl.fallback = t.value("fallback", "");
      if (tmpl.shots.empty()) throw TemplateError("template '" + name + "' needs at least one shot");
      pack.templates_[*id] = std::move(tmpl);
    }
    for (auto n : kAllTemplates) {
      if (!pack.templates_.contains(n)) throw TemplateError("template pack lacks '" + std::string(to_string(n)) + "'");
    }
    const auto phrases = j.value("phrases", json::object());
    for (const auto& [key, value] : phrases.items()) {
      pack.phrases_[key] = value.get<std::string>();
    }
    pack.forbidden_ = j.value("forbidden_phrases", std::vector<std::string>{});
    const auto ambiguous = j.value("ambiguous_readings", json::object());
    for (const auto& [ch, readings] : ambiguous.items()) {
      pack.ambiguous_[ch] = readings.get<std::vector<std::string>>();
    }
  } catch (const TemplateError&) {
    throw;
  } catch (const std::exception& e) {
    throw TemplateError(std::string("template pack: ") + e.what());
  }
  return pack;
}

TemplatePack TemplatePack::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open template pack " + path.string());
  try {
    return from_json(json::parse(in));
  } catch (const json::exception& e) {
    throw TemplateError(path.string() + ": " + e.what());
  }
}

const PromptTemplate& TemplatePack::get(TemplateName name) const { return templates_.at(name); }

std::string TemplatePack::phrase(std::string_view key, const Bindings& bindings) const {
  auto it = phrases_.find(key);
  if (it == phrases_.end()) throw TemplateError("unknown phrase '" + std::string(key) + "'");
  return fill(it->second, bindings, "phrase '" + std::string(key) + "'");
}

bool TemplatePack::has_phrase(std::string_view key) const { return phrases_.find(key) != phrases_.end(); }

}  // namespace tourdesk::llm
