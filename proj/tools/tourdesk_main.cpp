// tourdesk: corpus preparation, HTTP service, terminal chat and transcript replay.

#include <csignal>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>

#include <CLI11.hpp>

#include "tourdesk/error.hpp"
#include "tourdesk/service/config.hpp"
#include "tourdesk/service/http_api.hpp"
#include "tourdesk/service/registry.hpp"
#include "tourdesk/session.hpp"

#ifndef TOURDESK_DATA_DIR
#define TOURDESK_DATA_DIR "data"
#endif

namespace {

using namespace tourdesk;

struct CommonOptions {
  std::string config;
  std::string corpus;
  std::string bundle;
  std::string backend;
  std::string endpoint;
  std::optional<std::uint64_t> seed;
  std::optional<double> time_budget;
};

service::EngineConfig resolve_config(const CommonOptions& o) {
  auto cfg = o.config.empty() ? service::default_config(TOURDESK_DATA_DIR) : service::EngineConfig::load(o.config);
  if (!o.corpus.empty()) {
    cfg.corpus = o.corpus;
    cfg.bundle.clear();
  }
  if (!o.bundle.empty()) cfg.bundle = o.bundle;
  if (o.backend == "mock") cfg.backend.kind = service::BackendKind::Mock;
  if (o.backend == "remote") cfg.backend.kind = service::BackendKind::Remote;
  if (!o.endpoint.empty()) cfg.backend.endpoint = o.endpoint;
  if (o.seed) cfg.backend.seed = *o.seed;
  if (o.time_budget) cfg.time_budget = Duration(static_cast<Duration::rep>(*o.time_budget * 1000.0));
  return cfg;
}

void print_turns(const std::vector<AgentTurn>& turns) {
  for (const auto& t : turns) std::cout << "Shoko> " << t.text << "\n";
  std::cout.flush();
}

service::ApiServer* g_server = nullptr;

void on_signal(int) {
  if (g_server) g_server->stop();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Travel consultation dialog engine"};
  app.require_subcommand(1);
  CommonOptions common;
  app.add_option("--config", common.config, "Engine config JSON")->check(CLI::ExistingFile);
  app.add_option("--corpus", common.corpus, "Sight corpus (JSONL)")->check(CLI::ExistingFile);
  app.add_option("--bundle", common.bundle, "Prepared bundle from build-corpus")->check(CLI::ExistingFile);
  app.add_option("--backend", common.backend, "Generation backend")->check(CLI::IsMember({"mock", "remote"}));
  app.add_option("--endpoint", common.endpoint, "Remote backend URL");
  app.add_option("--seed", common.seed, "Mock backend seed");
  app.add_option("--time-budget", common.time_budget, "Session time budget in seconds");

  auto* build = app.add_subcommand("build-corpus", "Prepare summaries, questions, points and appeals");
  std::string out_path;
  build->add_option("--out,-o", out_path, "Bundle output path")->required();

  auto* serve = app.add_subcommand("serve", "Run the HTTP API");
  int port = 8080;
  std::string host = "127.0.0.1";
  serve->add_option("--port", port, "Listen port")->check(CLI::Range(0, 65535));
  serve->add_option("--host", host, "Listen address");

  auto* chat = app.add_subcommand("chat", "Consult in the terminal; one customer line per turn");
  SightAssignment assignment;
  std::string transcript_out;
  std::string clock_start;
  long clock_step_ms = 1000;
  for (auto* sub : {chat}) {
    sub->add_option("-a,--candidate-a", assignment.candidate_a, "First candidate sight id")->required();
    sub->add_option("-b,--candidate-b", assignment.candidate_b, "Second candidate sight id")->required();
    sub->add_option("-r,--recommended", assignment.recommended, "Sight to recommend")->required();
  }
  chat->add_option("--transcript", transcript_out, "Write the transcript here when the session ends");
  chat->add_option("--clock-start", clock_start, "Simulated clock start (RFC 3339); default is the system clock");
  chat->add_option("--clock-step-ms", clock_step_ms, "Simulated clock step per read");

  auto* replay = app.add_subcommand("replay", "Render a saved transcript");
  std::string replay_path;
  SightAssignment replay_assignment;
  replay->add_option("transcript", replay_path, "Transcript JSONL")->required()->check(CLI::ExistingFile);
  replay->add_option("-a,--candidate-a", replay_assignment.candidate_a, "Rebuild state: first candidate");
  replay->add_option("-b,--candidate-b", replay_assignment.candidate_b, "Rebuild state: second candidate");
  replay->add_option("-r,--recommended", replay_assignment.recommended, "Rebuild state: recommended sight");

  CLI11_PARSE(app, argc, argv);

  try {
    auto cfg = resolve_config(common);

    if (*build) {
      cfg.validate();
      llm::GenerationMetrics m;
      auto b = service::prepare_corpus(cfg, cfg.corpus, &m);
      bundle::save(b, out_path);
      for (const auto& r : b.catalog.records()) {
        const auto& p = b.at(r.sight_id);
        std::cout << r.sight_id << ": " << p.loc.questions.size() << " questions\n";
        for (const auto& q : p.loc.questions) std::cout << "  " << q << "\n";
      }
      std::cout << "backend calls " << m.backend_calls << ", rejections " << m.rejections << ", fallbacks "
                << m.fallbacks << "\n";
      return 0;
    }

    if (*replay) {
      auto records = load_transcript(replay_path);
      std::cout << render_transcript(records);
      if (!replay_assignment.candidate_a.empty()) {
        auto engine = service::build_engine(cfg);
        SystemClock clock;
        ReplayReport rep;
        auto s = Session::replay(*engine, replay_assignment, records, clock, {}, &rep);
        std::cout << "state: phase " << to_string(s->phase()) << ", profile " << interview::to_json(s->profile()).dump()
                  << ", regenerated turns differing " << rep.divergent_turns << "\n";
      }
      return 0;
    }

    auto engine = service::build_engine(cfg);

    if (*serve) {
      SystemClock clock;
      service::SessionRegistry registry(*engine, clock, cfg.state_dir);
      auto restored = registry.restore();
      service::ApiServer server(registry);
      g_server = &server;
      std::signal(SIGINT, on_signal);
      std::signal(SIGTERM, on_signal);
      std::cerr << "listening on " << host << ":" << port << " (" << restored << " sessions restored)\n";
      if (!server.listen(host, port)) {
        std::cerr << "error: cannot listen on " << host << ":" << port << "\n";
        return 1;
      }
      return 0;
    }

    if (*chat) {
      std::unique_ptr<Clock> clock;
      if (clock_start.empty()) {
        clock = std::make_unique<SystemClock>();
      } else {
        clock = std::make_unique<SteppingClock>(parse_rfc3339(clock_start), Duration(clock_step_ms));
      }
      auto session = engine->create_session(assignment, *clock);
      print_turns(session->advance(std::nullopt));
      std::string line;
      while (!session->done()) {
        std::cout << "You> " << std::flush;
        if (!std::getline(std::cin, line)) break;
        std::cout << "\n";
        print_turns(session->advance(std::string_view(line)));
      }
      if (!transcript_out.empty()) session->persist_transcript(std::filesystem::path(transcript_out));
      return 0;
    }
  } catch (const CorpusError& e) {
    std::cerr << "corpus error:\n";
    for (const auto& d : e.diagnostics()) std::cerr << "  " << d << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
