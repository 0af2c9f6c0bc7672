#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "tourdesk/llm/template.hpp"

namespace tourdesk::llm {

struct GenParams {
  double temperature = 0.3;
  int max_length = 200;
  std::vector<std::string> stop;
  std::uint64_t seed = 0;
};

// What a backend is asked to complete. Remote backends only see prompt and
// params; task and bindings let the offline mock stand in for a real model.
struct GenRequest {
  std::string prompt;
  GenParams params;
  TemplateName task = TemplateName::Comment;
  Bindings bindings;
};

// Text-in/text-out completion. Implementations must be callable from several
// threads at once. Transport failures throw BackendError.
class GenBackend {
 public:
  virtual ~GenBackend() = default;
  virtual std::string complete(const GenRequest& request) = 0;
  virtual std::string_view name() const = 0;
};

// Cuts the completion at the earliest stop sequence.
std::string apply_stop(std::string completion, const std::vector<std::string>& stop);

// Deterministic offline stand-in: echo templates for dialog turns, a
// first-sentence summarizer and a keyword question generator. Output is a pure
// function of (prompt, params, seed).
class MockBackend final : public GenBackend {
 public:
  explicit MockBackend(std::uint64_t seed) : seed_(seed) {}
  std::string complete(const GenRequest& request) override;
  std::string_view name() const override { return "mock"; }
  std::uint64_t seed() const { return seed_; }

 private:
  std::uint64_t seed_;
};

// Speaks {prompt, params} -> {completion} JSON over HTTP POST.
class RemoteBackend final : public GenBackend {
 public:
  // endpoint like "http://host:port/v1/complete"; bearer token may be empty.
  RemoteBackend(std::string endpoint, std::string bearer_token, int timeout_seconds = 30);
  std::string complete(const GenRequest& request) override;
  std::string_view name() const override { return "remote"; }

 private:
  std::string base_;
  std::string path_;
  std::string token_;
  int timeout_seconds_;
};

// Helpers shared by the mock and by tests.
namespace mock {

// "I am a manager" -> "you are a manager": first/second person swap.
std::string swap_person(std::string_view s);
// Drops leading fillers such as "They are", "Yes," and trailing punctuation.
std::string echo_fragment(std::string_view answer);

}  // namespace mock

}  // namespace tourdesk::llm
