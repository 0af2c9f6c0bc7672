#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <shared_mutex>
#include <string>
#include <utility>
#include <vector>

#include "tourdesk/session.hpp"

namespace tourdesk::service {

// Live sessions by id. Each session has its own mutex, so advances on one
// session queue up behind each other while different sessions run in parallel.
class SessionRegistry {
 public:
  struct Entry {
    std::mutex mu;
    std::unique_ptr<Session> session;
  };

  // With a state directory every session is checkpointed there after each
  // advance (<id>.json for the assignment, <id>.jsonl for the transcript).
  SessionRegistry(const Engine& engine, Clock& clock, std::filesystem::path state_dir = {});

  // Validates, creates and runs the opening advance. Throws ConfigError.
  std::pair<std::string, std::vector<AgentTurn>> create(const SightAssignment& a);

  std::shared_ptr<Entry> find(const std::string& id) const;

  // Advance under the session's lock, then checkpoint. Throws std::out_of_range
  // for unknown ids and SessionClosedError for finished sessions.
  std::vector<AgentTurn> advance(const std::string& id, std::optional<std::string_view> utterance,
                                 Phase* phase_after = nullptr, Duration* elapsed = nullptr);

  std::string transcript(const std::string& id) const;

  // Rebuilds sessions from the state directory by replay; returns how many.
  std::size_t restore();

  std::size_t size() const;
  const Engine& engine() const { return *engine_; }
  Clock& clock() const { return *clock_; }

 private:
  void checkpoint(const Session& s, bool with_meta) const;

  const Engine* engine_;
  Clock* clock_;
  std::filesystem::path state_dir_;
  mutable std::shared_mutex mu_;
  std::map<std::string, std::shared_ptr<Entry>> sessions_;
};

}  // namespace tourdesk::service
