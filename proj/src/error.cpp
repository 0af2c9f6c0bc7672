#include "tourdesk/error.hpp"

namespace tourdesk {

namespace {

std::string join_diagnostics(const std::vector<std::string>& diagnostics) {
  std::string msg = "corpus rejected";
  for (const auto& d : diagnostics) msg += "\n  " + d;
  return msg;
}

}  // namespace

CorpusError::CorpusError(std::vector<std::string> diagnostics)
    : Error(join_diagnostics(diagnostics)), diagnostics_(std::move(diagnostics)) {}

}  // namespace tourdesk
