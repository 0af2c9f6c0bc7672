#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>

#include <json.hpp>

#include "tourdesk/llm/backend.hpp"
#include "tourdesk/session.hpp"
#include "tourdesk/sightdb.hpp"

namespace tourdesk::service {

enum class BackendKind { Mock, Remote };

struct BackendConfig {
  BackendKind kind = BackendKind::Mock;
  std::optional<std::uint64_t> seed;  // mandatory for the mock
  std::string endpoint;
  // Name of the environment variable holding the bearer token; the token
  // itself never appears in a config file.
  std::string credential_env = "TOURDESK_BACKEND_TOKEN";
  int timeout_seconds = 30;
};

struct EngineConfig {
  std::string language = "en";
  std::filesystem::path corpus;  // JSONL corpus, prepared at startup
  std::filesystem::path bundle;  // prebuilt bundle; wins over corpus when set
  std::filesystem::path templates;
  std::filesystem::path lexicon;
  std::filesystem::path question_graph;
  BackendConfig backend;
  Duration time_budget{std::chrono::seconds(300)};
  int max_retries = 2;
  int summary_budget = 120;
  sightdb::FeatureThresholds thresholds;
  bool speech_normalization = false;
  std::filesystem::path state_dir;  // transcripts for crash recovery; empty disables

  // Relative paths are resolved against base_dir. Unknown keys are errors.
  static EngineConfig from_json(const nlohmann::json& j, const std::filesystem::path& base_dir);
  static EngineConfig load(const std::filesystem::path& path);

  // Throws ConfigError listing every problem: missing files, missing mock seed, bad values.
  void validate() const;

  text::TokenizeMode tokenize_mode() const;
  llm::GatewayConfig gateway_config() const;
  EngineSettings engine_settings() const;
};

// Defaults pointing at the shipped data directory.
EngineConfig default_config(const std::filesystem::path& data_dir);

std::unique_ptr<llm::GenBackend> make_backend(const BackendConfig& cfg);

// Loads templates, lexicon and graph, then the bundle or the corpus; a corpus
// is prepared (summaries, questions, points, appeal) before the engine starts.
std::unique_ptr<Engine> build_engine(const EngineConfig& cfg, llm::GenerationMetrics* build_metrics = nullptr);

// Offline preparation only, for the build-corpus command.
bundle::Bundle prepare_corpus(const EngineConfig& cfg, const std::filesystem::path& corpus,
                              llm::GenerationMetrics* metrics = nullptr);

}  // namespace tourdesk::service
