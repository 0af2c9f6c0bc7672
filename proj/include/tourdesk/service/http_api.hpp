#pragma once

#include <memory>
#include <string>

#include <json.hpp>

#include "tourdesk/service/registry.hpp"

namespace httplib {
class Server;
}

// JSON over HTTP: POST /sessions, POST /sessions/{id}/utterance,
// GET /sessions/{id}/transcript, GET /healthz. Schemas in docs/api.md.
namespace tourdesk::service {

nlohmann::ordered_json to_json(const AgentTurn& t);

class ApiServer {
 public:
  explicit ApiServer(SessionRegistry& registry);
  ~ApiServer();
  ApiServer(const ApiServer&) = delete;
  ApiServer& operator=(const ApiServer&) = delete;

  // Blocks until stop().
  bool listen(const std::string& host, int port);
  // Binds an ephemeral port and returns it; then call listen_after_bind().
  int bind_any_port(const std::string& host);
  bool listen_after_bind();
  void stop();
  void wait_until_ready() const;

 private:
  void routes();

  SessionRegistry* registry_;
  std::unique_ptr<httplib::Server> server_;
};

}  // namespace tourdesk::service
