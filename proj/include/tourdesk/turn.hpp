#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace tourdesk {

// Scenario phases in the order a consultation visits them.
enum class Phase { Greeting, Icebreaker, BriefExplanation, Interview, Recommendation, QA, Closing, Done };

std::string_view to_string(Phase p);
std::optional<Phase> parse_phase(std::string_view s);

enum class Expression { Smile, Surprised };
enum class Provenance { Fixed, Generated, Retrieved };

std::string_view to_string(Expression e);
std::string_view to_string(Provenance p);
std::optional<Expression> parse_expression(std::string_view s);
std::optional<Provenance> parse_provenance(std::string_view s);

struct AgentAnnotations {
  Expression expression = Expression::Smile;
  bool nod_cue = false;
  bool look_at_monitor = false;
  Provenance provenance = Provenance::Fixed;

  bool operator==(const AgentAnnotations&) const = default;
};

// One outgoing utterance. `speech` carries the TTS rendering when kana
// normalization is enabled.
struct AgentTurn {
  std::string text;
  Phase phase = Phase::Greeting;
  AgentAnnotations annotations;
  std::optional<std::string> speech;

  bool operator==(const AgentTurn&) const = default;
};

inline AgentTurn make_turn(std::string text, Provenance provenance) {
  AgentTurn t;
  t.text = std::move(text);
  t.annotations.provenance = provenance;
  return t;
}

}  // namespace tourdesk
