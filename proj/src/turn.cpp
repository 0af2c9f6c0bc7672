#include "tourdesk/turn.hpp"

#include <array>

namespace tourdesk {

namespace {

constexpr std::array kPhaseNames = {"Greeting", "Icebreaker", "BriefExplanation", "Interview",
                                    "Recommendation", "QA", "Closing", "Done"};

}  // namespace

std::string_view to_string(Phase p) { return kPhaseNames[static_cast<std::size_t>(p)]; }

std::optional<Phase> parse_phase(std::string_view s) {
  for (std::size_t i = 0; i < kPhaseNames.size(); ++i) {
    if (s == kPhaseNames[i]) return static_cast<Phase>(i);
  }
  return std::nullopt;
}

std::string_view to_string(Expression e) { return e == Expression::Smile ? "smile" : "surprised"; }

std::string_view to_string(Provenance p) {
  switch (p) {
    case Provenance::Fixed: return "fixed";
    case Provenance::Generated: return "generated";
    case Provenance::Retrieved: return "retrieved";
  }
  return "fixed";
}

std::optional<Expression> parse_expression(std::string_view s) {
  if (s == "smile") return Expression::Smile;
  if (s == "surprised") return Expression::Surprised;
  return std::nullopt;
}

std::optional<Provenance> parse_provenance(std::string_view s) {
  for (auto p : {Provenance::Fixed, Provenance::Generated, Provenance::Retrieved}) {
    if (to_string(p) == s) return p;
  }
  return std::nullopt;
}

}  // namespace tourdesk
