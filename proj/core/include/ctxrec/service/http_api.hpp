#pragma once

#include <nlohmann/json.hpp>

#include <filesystem>
#include <memory>
#include <string>

#include "ctxrec/service/session_manager.hpp"

namespace ctxrec::service {

/// JSON body of GET /api/sessions/{id}/next for a served trial. The target's
/// category is withheld so the runner never sees the answer.
[[nodiscard]] nlohmann::json served_trial_json(const ServedTrial& served);

[[nodiscard]] nlohmann::json session_json(const Session& session);

/// REST front end over a SessionManager plus read-only asset delivery.
///
///   POST /api/sessions                  create (or fetch) a session
///   GET  /api/sessions/{id}             session status
///   GET  /api/sessions/{id}/next        trial at the cursor, or {"done": true}
///   POST /api/sessions/{id}/responses   submit the cursor trial's answer
///   GET  /api/export                    response CSV (session_id, subject_id, experiment filters)
///   GET  /assets/<path>                 stimulus files, immutable cache headers
///   GET  /api/health
class HttpServer {
 public:
  HttpServer(SessionManager& sessions, std::filesystem::path asset_root);
  ~HttpServer();
  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  /// Binds (port 0 picks a free port) and returns the bound port.
  int bind(const std::string& host, int port);
  /// Serves until stop(); call after bind().
  void listen();
  /// Binds and serves on a background thread; returns the bound port.
  int start(const std::string& host, int port);
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace ctxrec::service
