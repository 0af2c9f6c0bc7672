#include "tourdesk/service/http_api.hpp"

#include <httplib.h>

#include "tourdesk/error.hpp"

namespace tourdesk::service {

using nlohmann::json;
using nlohmann::ordered_json;

nlohmann::ordered_json to_json(const AgentTurn& t) {
  ordered_json j;
  j["text"] = t.text;
  j["phase"] = to_string(t.phase);
  j["annotations"] = ordered_json{{"expression", to_string(t.annotations.expression)},
                                  {"nod_cue", t.annotations.nod_cue},
                                  {"look_at_monitor", t.annotations.look_at_monitor},
                                  {"provenance", to_string(t.annotations.provenance)}};
  if (t.speech) j["speech"] = *t.speech;
  return j;
}

namespace {

void reply(httplib::Response& res, int status, const ordered_json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json; charset=utf-8");
}

void fail(httplib::Response& res, int status, const std::string& message) {
  reply(res, status, ordered_json{{"error", message}});
}

ordered_json turns_json(const std::vector<AgentTurn>& turns) {
  auto arr = ordered_json::array();
  for (const auto& t : turns) arr.push_back(to_json(t));
  return arr;
}

}  // namespace

ApiServer::ApiServer(SessionRegistry& registry) : registry_(&registry), server_(std::make_unique<httplib::Server>()) {
  routes();
}

ApiServer::~ApiServer() { stop(); }

void ApiServer::routes() {
  auto& srv = *server_;

  srv.Get("/healthz", [this](const httplib::Request&, httplib::Response& res) {
    reply(res, 200, ordered_json{{"status", "ok"}, {"sessions", registry_->size()}});
  });

  srv.Post("/sessions", [this](const httplib::Request& req, httplib::Response& res) {
    json body;
    try {
      body = json::parse(req.body);
    } catch (const json::exception& e) {
      return fail(res, 400, std::string("body is not valid JSON: ") + e.what());
    }
    SightAssignment a;
    try {
      a = assignment_from_json(body);
    } catch (const std::invalid_argument& e) {
      return fail(res, 400, e.what());
    }
    try {
      auto [id, turns] = registry_->create(a);
      ordered_json out;
      out["session_id"] = id;
      out["phase"] = to_string(registry_->find(id)->session->phase());
      out["turns"] = turns_json(turns);
      reply(res, 201, out);
    } catch (const ConfigError& e) {
      fail(res, 422, e.what());
    }
  });

  srv.Post(R"(/sessions/([^/]+)/utterance)", [this](const httplib::Request& req, httplib::Response& res) {
    std::string id = req.matches[1];
    std::optional<std::string> text;
    try {
      auto body = req.body.empty() ? json::object() : json::parse(req.body);
      if (!body.is_object()) return fail(res, 400, "body must be a JSON object");
      if (body.contains("text") && !body["text"].is_null()) {
        if (!body["text"].is_string()) return fail(res, 400, "text must be a string or null");
        text = body["text"].get<std::string>();
      }
    } catch (const json::exception& e) {
      return fail(res, 400, std::string("body is not valid JSON: ") + e.what());
    }
    try {
      Phase phase{};
      Duration elapsed{};
      auto turns = registry_->advance(id, text ? std::optional<std::string_view>(*text) : std::nullopt, &phase, &elapsed);
      ordered_json out;
      out["turns"] = turns_json(turns);
      out["phase"] = to_string(phase);
      out["elapsed_ms"] = elapsed.count();
      reply(res, 200, out);
    } catch (const std::out_of_range& e) {
      fail(res, 404, e.what());
    } catch (const SessionClosedError& e) {
      fail(res, 410, e.what());
    } catch (const IoError& e) {
      fail(res, 500, e.what());
    }
  });

  srv.Get(R"(/sessions/([^/]+)/transcript)", [this](const httplib::Request& req, httplib::Response& res) {
    try {
      res.status = 200;
      res.set_content(registry_->transcript(req.matches[1]), "application/x-ndjson; charset=utf-8");
    } catch (const std::out_of_range& e) {
      fail(res, 404, e.what());
    }
  });

  srv.set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
    std::string msg = "internal error";
    try {
      std::rethrow_exception(ep);
    } catch (const std::exception& e) {
      msg = e.what();
    } catch (...) {
    }
    fail(res, 500, msg);
  });
}

bool ApiServer::listen(const std::string& host, int port) { return server_->listen(host, port); }

int ApiServer::bind_any_port(const std::string& host) { return server_->bind_to_any_port(host); }

bool ApiServer::listen_after_bind() { return server_->listen_after_bind(); }

void ApiServer::stop() {
  if (server_) server_->stop();
}

void ApiServer::wait_until_ready() const { server_->wait_until_ready(); }

}  // namespace tourdesk::service
