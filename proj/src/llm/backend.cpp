#include "tourdesk/llm/backend.hpp"

#include <algorithm>
#include <optional>
#include <random>
#include <regex>

#include <httplib.h>

#include "tourdesk/error.hpp"
#include "tourdesk/sightdb.hpp"
#include "tourdesk/text.hpp"

namespace tourdesk::llm {

using nlohmann::json;

std::string apply_stop(std::string completion, const std::vector<std::string>& stop) {
  std::size_t cut = completion.size();
  for (const auto& s : stop) {
    if (s.empty()) continue;
    auto pos = completion.find(s);
    if (pos != std::string::npos) cut = std::min(cut, pos);
  }
  completion.resize(cut);
  return completion;
}

namespace mock {

namespace {

std::string strip_terminal(std::string_view s) {
  auto t = text::trim(s);
  auto cps = text::decode_utf8(t);
  auto terminal = [](char32_t c) {
    return c == U'.' || c == U'!' || c == U'?' || c == U',' || c == 0x3002 || c == 0xFF01 || c == 0xFF1F || c == 0x3001;
  };
  while (!cps.empty() && terminal(cps.back())) cps.pop_back();
  return text::trim(text::encode_utf8(cps));
}

}  // namespace

std::string swap_person(std::string_view s) {
  static const std::vector<std::pair<std::string_view, std::string_view>> table = {
      {"i", "you"},       {"i'm", "you're"}, {"im", "you're"},  {"am", "are"},      {"my", "your"},
      {"me", "you"},      {"mine", "yours"}, {"myself", "yourself"}, {"we", "you"}, {"we're", "you're"},
      {"our", "your"},    {"ours", "yours"}, {"us", "you"},     {"i've", "you've"}, {"i'd", "you'd"},
      {"i'll", "you'll"}, {"we've", "you've"}};
  std::string out;
  std::size_t pos = 0;
  std::string str(s);
  while (pos <= str.size()) {
    auto sp = str.find(' ', pos);
    if (sp == std::string::npos) sp = str.size();
    std::string word = str.substr(pos, sp - pos);
    std::size_t end = word.size();
    while (end > 0 && (word[end - 1] == ',' || word[end - 1] == '.' || word[end - 1] == '!' || word[end - 1] == '?')) --end;
    std::string core = text::to_lower_ascii(text::replace_all(word.substr(0, end), "\xE2\x80\x99", "'"));
    auto it = std::find_if(table.begin(), table.end(), [&](const auto& e) { return e.first == core; });
    if (!out.empty()) out.push_back(' ');
    if (it != table.end()) {
      out += std::string(it->second) + word.substr(end);
    } else {
      out += word;
    }
    pos = sp + 1;
  }
  return out;
}

std::string echo_fragment(std::string_view answer) {
  static const std::vector<std::string_view> leads = {
      "yes, ", "yes ", "no, ", "well, ", "um, ", "uh, ", "hmm, ", "they are ", "they're ", "it is ", "it's ",
      "we are ", "we're ", "i am ", "i'm ", "he is ", "she is ", "that is ", "that's "};
  auto s = strip_terminal(answer);
  bool changed = true;
  while (changed) {
    changed = false;
    auto lower = text::to_lower_ascii(s);
    for (auto lead : leads) {
      if (lower.starts_with(lead)) {
        s = text::trim(s.substr(lead.size()));
        changed = true;
        break;
      }
    }
  }
  return swap_person(s);
}

}  // namespace mock

namespace {

std::string get(const Bindings& b, std::string_view key) {
  auto it = b.find(key);
  return it == b.end() ? std::string() : it->second;
}

std::string capitalize(std::string s) {
  if (!s.empty() && s[0] >= 'a' && s[0] <= 'z') s[0] = static_cast<char>(s[0] - 'a' + 'A');
  return s;
}

std::string ensure_period(std::string s) {
  s = text::trim(s);
  if (s.empty()) return s;
  auto last = text::decode_utf8(s).back();
  if (last == U'.' || last == U'!' || last == U'?' || last == 0x3002 || last == 0xFF01 || last == 0xFF1F) return s;
  return s + ".";
}

std::vector<std::string> lines_of(std::string_view block) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (pos < block.size()) {
    auto nl = block.find('\n', pos);
    if (nl == std::string_view::npos) nl = block.size();
    auto line = text::trim(block.substr(pos, nl - pos));
    if (!line.empty()) out.push_back(line);
    pos = nl + 1;
  }
  return out;
}

// Splits "Charge: Adult: 1,000yen" into {Charge, "Adult: 1,000yen"} for known labels.
std::pair<std::optional<sightdb::Field>, std::string> split_label(const std::string& line) {
  for (auto f : {sightdb::Field::BusinessHours, sightdb::Field::Location, sightdb::Field::Access,
                 sightdb::Field::Charge, sightdb::Field::Review}) {
    std::string prefix = std::string(sightdb::field_label(f)) + ": ";
    if (line.starts_with(prefix)) return {f, line.substr(prefix.size())};
  }
  return {std::nullopt, line};
}

// Keyword -> question table for the question generator.
struct QuestionRule {
  std::vector<std::string_view> keywords;
  std::string_view question;
};

const std::vector<QuestionRule>& question_rules() {
  static const std::vector<QuestionRule> rules = {
      {{"edo"}, "Do you like the history of the Edo period?"},
      {{"shogunate", "samurai", "perry"}, "Do you like novels depicting the end of the Edo period?"},
      {{"history", "historic", "historical"}, "Do you like history?"},
      {{"illusion", "trick", "magic"}, "Do you like to have magical experiences?"},
      {{"detective", "mystery"}, "Do you like detective dramas?"},
      {{"water", "beach", "sea", "seaside", "fountain"}, "Do you like to play by the water?"},
      {{"science", "scientific"}, "Do you like learning about science?"},
      {{"robot", "technology", "future"}, "Do you like cutting-edge technology?"},
      {{"wax", "celebrity", "celebrities", "stars"}, "Do you like meeting famous people?"},
      {{"art", "artwork", "artworks", "museum"}, "Do you like art?"},
      {{"digital", "light", "lights"}, "Do you like digital art?"},
      {{"view", "views", "observation", "night"}, "Do you like night views?"},
      {{"tower", "tallest", "height", "high"}, "Do you like high places?"},
      {{"shopping", "mall", "shops"}, "Do you like shopping?"},
      {{"park", "garden", "nature", "greenery"}, "Do you like walking in nature?"},
      {{"photo", "photos", "pictures"}, "Do you like taking photos?"},
      {{"food", "restaurant", "restaurants", "gourmet"}, "Do you like trying local food?"},
      {{"ship", "ships", "boat", "cruise", "port"}, "Do you like boats and ships?"},
      {{"car", "cars", "vehicle", "drive"}, "Do you like cars?"},
      {{"lego", "toy", "toys", "play"}, "Do you like playing with toys?"},
      {{"anime", "gundam", "statue"}, "Do you like anime?"},
      {{"children", "kids", "family", "families"}, "Do you like places where children can play?"},
  };
  return rules;
}

std::string mock_generate_questions(const Bindings& b, std::mt19937_64& rng) {
  auto summary = get(b, "summary");
  auto name = get(b, "name");
  int n = 10;
  try {
    n = std::stoi(get(b, "n"));
  } catch (...) {
  }
  auto tokens = text::tokenize(summary);
  // Rules ordered by the earliest keyword position in the summary.
  std::vector<std::pair<std::size_t, std::string_view>> found;
  for (const auto& rule : question_rules()) {
    std::size_t best = tokens.size();
    for (auto kw : rule.keywords) {
      auto it = std::find(tokens.begin(), tokens.end(), kw);
      if (it != tokens.end()) best = std::min(best, static_cast<std::size_t>(it - tokens.begin()));
    }
    if (best < tokens.size()) found.emplace_back(best, rule.question);
  }
  std::stable_sort(found.begin(), found.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  std::vector<std::string> lines;
  for (const auto& [pos, q] : found) {
    lines.emplace_back(q);
    // Sampling noise: occasional near-duplicates and off-format lines.
    auto roll = rng() % 4;
    if (roll == 0) lines.push_back(text::to_lower_ascii(q));
    if (roll == 1) lines.push_back("Visit " + name + "!");
  }
  if (found.empty()) lines.push_back("Do you like visiting places like " + name + "?");
  if (static_cast<int>(lines.size()) > n) lines.resize(static_cast<std::size_t>(n));
  std::string out;
  for (const auto& l : lines) out += "- " + l + "\n";
  return out;
}

std::string mock_kana(const Bindings& b) {
  auto before = get(b, "before");
  auto after = get(b, "after");
  for (std::string_view prefix : {"この", "あの", "その", "どの", "お"}) {
    if (before.ends_with(prefix)) return "かた";
  }
  for (std::string_view word : {"話し", "読み", "書き", "使い", "やり", "考え", "見"}) {
    if (before.ends_with(word)) return "かた";
  }
  return "ほう";
}

}  // namespace

std::string MockBackend::complete(const GenRequest& req) {
  std::mt19937_64 rng(text::fnv1a64(req.prompt) ^ (seed_ * 0x9E3779B97F4A7C15ULL) ^ req.params.seed);
  const auto& b = req.bindings;
  auto pick = [&](std::initializer_list<std::string_view> options) {
    return std::string(*(options.begin() + static_cast<std::ptrdiff_t>(rng() % options.size())));
  };

  switch (req.task) {
    case TemplateName::IcebreakQuestion: {
      auto answer = text::trim(get(b, "answer"));
      if (answer.empty()) return "";
      auto swapped = mock::echo_fragment(answer);
      // "I work as an engineer." -> "an engineer", usable after "your work as"
      static const std::regex role_re(R"(^\s*i(?:\s+work\s+as|\s+am|'m)\s+(an?\s+[^.!,]+?)(?:\s+(?:in|at|for|with)\b[^.!]*)?\s*[.!]?\s*$)",
                                      std::regex::icase);
      std::smatch m;
      std::optional<std::string> role;
      if (std::regex_match(answer, m, role_re)) role = m[1].str();
      auto variant = rng() % 3;
      if (variant == 1 || !role) return "I see, " + swapped + ". What do you enjoy most about your work?";
      if (variant == 0) return "That's wonderful! What do you think is the most important part of your work as " + *role + "?";
      return "Thank you. What is the most challenging part of your work as " + *role + "?";
    }
    case TemplateName::IcebreakComment: {
      if (text::trim(get(b, "answer")).empty()) return "";
      return pick({"That sounds like very rewarding work.", "You must be working very hard. I really respect that.",
                   "Wonderful! It sounds like you enjoy what you do.", "Thank you for sharing that with me."});
    }
    case TemplateName::Summarize: {
      auto first = text::first_sentence(text::collapse_whitespace(get(b, "summary_long")));
      if (first.empty()) return "";
      auto name = get(b, "name");
      if (first.find(name) == std::string::npos) first = name + ": " + first;
      return text::truncate_codepoints(first, static_cast<std::size_t>(std::max(1, req.params.max_length)));
    }
    case TemplateName::GenerateQuestions:
      return mock_generate_questions(b, rng);
    case TemplateName::TranslatePoint: {
      static const std::regex like_re(R"(^\s*do you like (.+?)\s*[?？]\s*$)", std::regex::icase);
      std::smatch m;
      auto q = get(b, "question");
      if (std::regex_match(q, m, like_re)) return get(b, "name") + " is recommended for people who like " + m[1].str() + ".";
      return get(b, "name") + " is recommended for you.";
    }
    case TemplateName::Comment: {
      auto echo = mock::echo_fragment(get(b, "answer"));
      auto ack = pick({"Thank you for telling me.", "I will keep that in mind.",
                       "That helps me find a good place for you.", "I would suggest a place you can enjoy."});
      if (echo.empty()) return ack;
      return capitalize(echo) + ", okay. " + ack;
    }
    case TemplateName::ExtractInfo: {
      auto lines = lines_of(get(b, "info"));
      if (lines.empty()) return "";
      auto wanted = sightdb::query_fields(get(b, "question"));
      for (const auto& line : lines) {
        auto [field, value] = split_label(line);
        if (field && std::find(wanted.begin(), wanted.end(), *field) != wanted.end()) return value;
      }
      return split_label(lines.front()).second;
    }
    case TemplateName::RecommendAppeal: {
      auto summary = get(b, "summary");
      auto name = get(b, "name");
      if (summary.starts_with(name + ": ")) summary = summary.substr(name.size() + 2);
      summary = text::trim(summary);
      if (summary.empty()) return "";
      auto lower = text::to_lower_ascii(summary);
      if (lower.starts_with("it is ") || lower.starts_with("it's ") || lower.starts_with("you can ")) {
        summary[0] = static_cast<char>(std::tolower(static_cast<unsigned char>(summary[0])));
        return ensure_period(summary);
      }
      return "of what it offers: " + ensure_period(summary);
    }
    case TemplateName::RecommendUtterance: {
      auto points = lines_of(get(b, "points"));
      auto data = lines_of(get(b, "data"));
      std::string out;
      for (const auto& p : points) {
        auto t = p.starts_with("- ") ? p.substr(2) : p;
        out += (out.empty() ? "" : " ") + ensure_period(t);
      }
      if (!data.empty()) {
        auto [field, value] = split_label(data[rng() % data.size()]);
        if (field == sightdb::Field::Review) {
          out += " A visitor wrote: \"" + value + "\"";
        } else if (field) {
          out += " For your information, the " + text::to_lower_ascii(sightdb::field_label(*field)) + " is " +
                 ensure_period(value);
        }
      }
      return text::trim(out);
    }
    case TemplateName::CounterUtterance: {
      auto other = get(b, "other_name");
      auto rec = get(b, "recommended_name");
      auto weak = get(b, "weaknesses");
      if (weak.empty()) return other + " is also a nice place, but I think " + rec + " suits you better.";
      return pick({"", "Of course, "}) + other + " is also a good place, but " + weak + ", so " + rec +
             " is probably a better choice.";
    }
    case TemplateName::QaAnswer: {
      auto q = text::to_lower_ascii(get(b, "question"));
      std::string names[2] = {get(b, "name1"), get(b, "name2")};
      std::string blocks[2] = {get(b, "data1"), get(b, "data2")};
      int target = get(b, "recommended") == names[1] ? 1 : 0;
      for (int i = 0; i < 2; ++i) {
        if (!names[i].empty() && q.find(text::to_lower_ascii(names[i])) != std::string::npos) {
          target = i;
          break;
        }
      }
      if (lines_of(blocks[target]).empty()) target = 1 - target;
      auto lines = lines_of(blocks[target]);
      if (lines.empty()) return "I'm not sure. Please search by yourself.";
      auto [field, value] = split_label(lines.front());
      if (field == sightdb::Field::Review) {
        return "According to the search information, a visitor to " + names[target] + " wrote: \"" + value + "\"";
      }
      std::string label = field ? text::to_lower_ascii(sightdb::field_label(*field)) : std::string("information");
      return "According to the search information, the " + label + " for " + names[target] + " is: " +
             ensure_period(value);
    }
    case TemplateName::ClosingNarration: {
      auto name = get(b, "name");
      auto reviews = lines_of(get(b, "reviews"));
      if (reviews.empty()) {
        auto summary = get(b, "summary");
        if (summary.starts_with(name + ": ")) summary = summary.substr(name.size() + 2);
        return "We are sure you will love " + name + ". " + ensure_period(capitalize(summary));
      }
      auto r = reviews[rng() % reviews.size()];
      if (r.starts_with("- ")) r = r.substr(2);
      auto sentence = text::first_sentence(r);
      return "One of our visitors told us, \"" + sentence + "\" We are sure you will feel the same at " + name + ".";
    }
    case TemplateName::KanaNormalize:
      return mock_kana(b);
  }
  return "";
}

RemoteBackend::RemoteBackend(std::string endpoint, std::string bearer_token, int timeout_seconds)
    : token_(std::move(bearer_token)), timeout_seconds_(timeout_seconds) {
  static const std::regex url_re(R"(^(https?://[^/]+)(/.*)?$)");
  std::smatch m;
  if (!std::regex_match(endpoint, m, url_re)) throw ConfigError("bad backend endpoint: " + endpoint);
  base_ = m[1].str();
  path_ = m[2].matched ? m[2].str() : "/";
}

std::string RemoteBackend::complete(const GenRequest& req) {
  json body;
  body["prompt"] = req.prompt;
  body["params"] = {{"temperature", req.params.temperature},
                    {"max_length", req.params.max_length},
                    {"stop", req.params.stop},
                    {"seed", req.params.seed}};
  httplib::Client cli(base_);
  cli.set_connection_timeout(timeout_seconds_);
  cli.set_read_timeout(timeout_seconds_);
  httplib::Headers headers;
  if (!token_.empty()) headers.emplace("Authorization", "Bearer " + token_);
  auto res = cli.Post(path_, headers, body.dump(), "application/json");
  if (!res) throw BackendError("backend unreachable: " + httplib::to_string(res.error()));
  if (res->status != 200) throw BackendError("backend returned HTTP " + std::to_string(res->status));
  try {
    auto reply = json::parse(res->body);
    return apply_stop(reply.at("completion").get<std::string>(), req.params.stop);
  } catch (const std::exception& e) {
    throw BackendError(std::string("malformed backend reply: ") + e.what());
  }
}

}  // namespace tourdesk::llm
