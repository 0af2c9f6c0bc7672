#include "tourdesk/service/config.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>

#include "tourdesk/error.hpp"

namespace tourdesk::service {

using nlohmann::json;

namespace {

std::filesystem::path resolve(const std::filesystem::path& base, const json& v) {
  if (v.is_null()) return {};
  std::filesystem::path p = v.get<std::string>();
  if (p.empty() || p.is_absolute()) return p;
  return base / p;
}

void reject_unknown(const json& j, std::initializer_list<std::string_view> known, std::string_view where) {
  for (const auto& [key, _] : j.items()) {
    if (std::find(known.begin(), known.end(), key) == known.end()) {
      throw ConfigError(std::string(where) + ": unknown key '" + key + "'");
    }
  }
}

}  // namespace

EngineConfig EngineConfig::from_json(const json& j, const std::filesystem::path& base_dir) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  reject_unknown(j,
                 {"language", "corpus", "bundle", "templates", "lexicon", "question_graph", "backend",
                  "time_budget_seconds", "max_retries", "summary_budget", "thresholds", "speech_normalization",
                  "state_dir"},
                 "config");
  EngineConfig c;
  try {
    c.language = j.value("language", c.language);
    if (j.contains("corpus")) c.corpus = resolve(base_dir, j["corpus"]);
    if (j.contains("bundle")) c.bundle = resolve(base_dir, j["bundle"]);
    if (j.contains("templates")) c.templates = resolve(base_dir, j["templates"]);
    if (j.contains("lexicon")) c.lexicon = resolve(base_dir, j["lexicon"]);
    if (j.contains("question_graph")) c.question_graph = resolve(base_dir, j["question_graph"]);
    if (j.contains("state_dir")) c.state_dir = resolve(base_dir, j["state_dir"]);
    if (j.contains("time_budget_seconds")) {
      c.time_budget = Duration(static_cast<Duration::rep>(j["time_budget_seconds"].get<double>() * 1000.0));
    }
    c.max_retries = j.value("max_retries", c.max_retries);
    c.summary_budget = j.value("summary_budget", c.summary_budget);
    c.speech_normalization = j.value("speech_normalization", c.speech_normalization);
    if (j.contains("backend")) {
      const auto& b = j["backend"];
      reject_unknown(b, {"kind", "seed", "endpoint", "credential_env", "timeout_seconds"}, "config.backend");
      auto kind = b.value("kind", std::string("mock"));
      if (kind == "mock") {
        c.backend.kind = BackendKind::Mock;
      } else if (kind == "remote") {
        c.backend.kind = BackendKind::Remote;
      } else {
        throw ConfigError("config.backend.kind must be \"mock\" or \"remote\"");
      }
      if (b.contains("seed") && !b["seed"].is_null()) c.backend.seed = b["seed"].get<std::uint64_t>();
      c.backend.endpoint = b.value("endpoint", c.backend.endpoint);
      c.backend.credential_env = b.value("credential_env", c.backend.credential_env);
      c.backend.timeout_seconds = b.value("timeout_seconds", c.backend.timeout_seconds);
    }
    if (j.contains("thresholds")) {
      const auto& t = j["thresholds"];
      reject_unknown(t,
                     {"low_max_yen", "mid_max_yen", "near_max_m", "walk_m_per_min", "popularity_low_below",
                      "popularity_high_from"},
                     "config.thresholds");
      auto& th = c.thresholds;
      th.low_max_yen = t.value("low_max_yen", th.low_max_yen);
      th.mid_max_yen = t.value("mid_max_yen", th.mid_max_yen);
      th.near_max_m = t.value("near_max_m", th.near_max_m);
      th.walk_m_per_min = t.value("walk_m_per_min", th.walk_m_per_min);
      th.popularity_low_below = t.value("popularity_low_below", th.popularity_low_below);
      th.popularity_high_from = t.value("popularity_high_from", th.popularity_high_from);
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return c;
}

EngineConfig EngineConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError("config " + path.string() + ": " + e.what());
  }
  return from_json(j, path.parent_path());
}

void EngineConfig::validate() const {
  std::vector<std::string> problems;
  auto need = [&](const std::filesystem::path& p, std::string_view what) {
    if (p.empty()) {
      problems.push_back(std::string(what) + " path is not set");
    } else if (!std::filesystem::is_regular_file(p)) {
      problems.push_back(std::string(what) + " not found: " + p.string());
    }
  };
  need(templates, "templates");
  need(lexicon, "lexicon");
  need(question_graph, "question_graph");
  if (!bundle.empty()) {
    need(bundle, "bundle");
  } else {
    need(corpus, "corpus");
  }
  if (backend.kind == BackendKind::Mock && !backend.seed) problems.push_back("backend.seed is required for the mock backend");
  if (backend.kind == BackendKind::Remote && backend.endpoint.empty()) problems.push_back("backend.endpoint is required for the remote backend");
  if (time_budget <= Duration::zero()) problems.push_back("time_budget_seconds must be positive");
  if (max_retries < 1) problems.push_back("max_retries must be >= 1");
  if (summary_budget < 8) problems.push_back("summary_budget must be >= 8");
  if (language != "en" && language != "ja") problems.push_back("language must be \"en\" or \"ja\"");
  if (!problems.empty()) {
    std::string msg;
    for (const auto& p : problems) msg += (msg.empty() ? "" : "; ") + p;
    throw ConfigError(msg);
  }
}

text::TokenizeMode EngineConfig::tokenize_mode() const {
  return language == "ja" ? text::TokenizeMode::CjkBigrams : text::TokenizeMode::Words;
}

llm::GatewayConfig EngineConfig::gateway_config() const {
  llm::GatewayConfig g;
  g.max_retries = max_retries;
  g.summary_budget = summary_budget;
  g.base_seed = backend.seed.value_or(0);
  return g;
}

EngineSettings EngineConfig::engine_settings() const {
  EngineSettings s;
  s.time_budget = time_budget;
  s.speech_normalization = speech_normalization;
  return s;
}

EngineConfig default_config(const std::filesystem::path& data_dir) {
  EngineConfig c;
  c.corpus = data_dir / "fixtures" / "odaiba.jsonl";
  c.templates = data_dir / "en" / "templates.json";
  c.lexicon = data_dir / "en" / "lexicon.json";
  c.question_graph = data_dir / "en" / "question_graph.json";
  return c;
}

std::unique_ptr<llm::GenBackend> make_backend(const BackendConfig& cfg) {
  if (cfg.kind == BackendKind::Mock) {
    if (!cfg.seed) throw ConfigError("backend.seed is required for the mock backend");
    return std::make_unique<llm::MockBackend>(*cfg.seed);
  }
  std::string token;
  if (!cfg.credential_env.empty()) {
    if (const char* v = std::getenv(cfg.credential_env.c_str())) token = v;
  }
  return std::make_unique<llm::RemoteBackend>(cfg.endpoint, token, cfg.timeout_seconds);
}

bundle::Bundle prepare_corpus(const EngineConfig& cfg, const std::filesystem::path& corpus,
                              llm::GenerationMetrics* metrics) {
  auto pack = llm::TemplatePack::load(cfg.templates);
  auto lexicon = interview::AnswerLexicon::load(cfg.lexicon);
  auto backend = make_backend(cfg.backend);
  llm::Gateway gateway(pack, *backend, cfg.gateway_config());
  auto catalog = sightdb::Catalog::ingest(corpus, cfg.thresholds, cfg.tokenize_mode());
  return bundle::build(std::move(catalog), gateway, lexicon, 3, metrics);
}

std::unique_ptr<Engine> build_engine(const EngineConfig& cfg, llm::GenerationMetrics* build_metrics) {
  cfg.validate();
  auto pack = llm::TemplatePack::load(cfg.templates);
  auto lexicon = interview::AnswerLexicon::load(cfg.lexicon);
  auto graph = interview::QuestionGraph::load(cfg.question_graph);
  auto backend = make_backend(cfg.backend);
  bundle::Bundle prepared;
  if (!cfg.bundle.empty()) {
    prepared = bundle::load(cfg.bundle, cfg.thresholds, cfg.tokenize_mode());
  } else {
    llm::Gateway gateway(pack, *backend, cfg.gateway_config());
    auto catalog = sightdb::Catalog::ingest(cfg.corpus, cfg.thresholds, cfg.tokenize_mode());
    prepared = bundle::build(std::move(catalog), gateway, lexicon, 3, build_metrics);
  }
  return std::make_unique<Engine>(std::move(prepared), std::move(pack), std::move(lexicon), std::move(graph),
                                  std::move(backend), cfg.gateway_config(), cfg.engine_settings());
}

}  // namespace tourdesk::service
