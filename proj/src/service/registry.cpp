#include "tourdesk/service/registry.hpp"

#include <fstream>

#include "tourdesk/error.hpp"

namespace tourdesk::service {

SessionRegistry::SessionRegistry(const Engine& engine, Clock& clock, std::filesystem::path state_dir)
    : engine_(&engine), clock_(&clock), state_dir_(std::move(state_dir)) {
  if (!state_dir_.empty()) {
    std::error_code ec;
    std::filesystem::create_directories(state_dir_, ec);
    if (ec) throw ConfigError("cannot create state_dir " + state_dir_.string() + ": " + ec.message());
  }
}

void SessionRegistry::checkpoint(const Session& s, bool with_meta) const {
  if (state_dir_.empty()) return;
  if (with_meta) {
    auto meta = state_dir_ / (s.id() + ".json");
    std::ofstream out(meta, std::ios::binary | std::ios::trunc);
    out << to_json(s.assignment()).dump() << "\n";
    if (!out) throw IoError("cannot write " + meta.string());
  }
  s.persist_transcript(state_dir_ / (s.id() + ".jsonl"));
}

std::pair<std::string, std::vector<AgentTurn>> SessionRegistry::create(const SightAssignment& a) {
  auto entry = std::make_shared<Entry>();
  entry->session = engine_->create_session(a, *clock_);
  std::lock_guard lock(entry->mu);
  auto id = entry->session->id();
  {
    std::unique_lock map_lock(mu_);
    sessions_.emplace(id, entry);
  }
  auto turns = entry->session->advance(std::nullopt);
  checkpoint(*entry->session, true);
  return {id, std::move(turns)};
}

std::shared_ptr<SessionRegistry::Entry> SessionRegistry::find(const std::string& id) const {
  std::shared_lock lock(mu_);
  auto it = sessions_.find(id);
  return it == sessions_.end() ? nullptr : it->second;
}

std::vector<AgentTurn> SessionRegistry::advance(const std::string& id, std::optional<std::string_view> utterance,
                                                Phase* phase_after, Duration* elapsed) {
  auto entry = find(id);
  if (!entry) throw std::out_of_range("unknown session '" + id + "'");
  std::lock_guard lock(entry->mu);
  auto& s = *entry->session;
  auto turns = s.advance(utterance);
  checkpoint(s, false);
  if (phase_after) *phase_after = s.phase();
  if (elapsed) *elapsed = s.transcript().empty() ? Duration::zero() : s.elapsed(s.transcript().back().ts);
  return turns;
}

std::string SessionRegistry::transcript(const std::string& id) const {
  auto entry = find(id);
  if (!entry) throw std::out_of_range("unknown session '" + id + "'");
  std::lock_guard lock(entry->mu);
  return transcript_jsonl(entry->session->transcript());
}

std::size_t SessionRegistry::restore() {
  if (state_dir_.empty()) return 0;
  std::size_t n = 0;
  for (const auto& f : std::filesystem::directory_iterator(state_dir_)) {
    if (f.path().extension() != ".json") continue;
    auto id = f.path().stem().string();
    std::ifstream in(f.path(), std::ios::binary);
    auto a = assignment_from_json(nlohmann::json::parse(in));
    auto transcript_path = state_dir_ / (id + ".jsonl");
    std::vector<TurnRecord> records;
    if (std::filesystem::exists(transcript_path)) records = load_transcript(transcript_path);
    auto entry = std::make_shared<Entry>();
    entry->session = Session::replay(*engine_, a, records, *clock_, id);
    std::unique_lock lock(mu_);
    sessions_[id] = std::move(entry);
    ++n;
  }
  return n;
}

std::size_t SessionRegistry::size() const {
  std::shared_lock lock(mu_);
  return sessions_.size();
}

}  // namespace tourdesk::service
