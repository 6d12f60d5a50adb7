#include "ctxrec/service/http_api.hpp"

#include <httplib.h>

#include <thread>

#include "ctxrec/digest.hpp"

namespace ctxrec::service {

using nlohmann::json;

json session_json(const Session& s) {
  return {{"session_id", s.session_id}, {"subject_id", s.subject_id}, {"experiment", s.experiment},
          {"seed", s.seed},             {"mode", to_string(s.mode)},  {"total", s.trial_ids.size()},
          {"cursor", s.cursor},         {"done", s.done()}};
}

json served_trial_json(const ServedTrial& served) {
  const auto& t = served.trial;
  json phases = json::array();
  for (const auto& p : t.phases) {
    const bool stimulus = p.name != "fixation" && p.name != "cue";
    if (!served.exposure_limited && p.name == "mask") continue;
    phases.push_back({{"name", p.name}, {"ms", stimulus && !served.exposure_limited ? json(nullptr) : json(p.ms)}});
  }
  json assets = json::object();
  for (const auto& [role, path] : t.assets) assets[role] = "/assets/" + path;
  return {{"done", false},
          {"index", served.index},
          {"total", served.total},
          {"exposure_limited", served.exposure_limited},
          {"trial",
           {{"trial_id", t.trial_id},
            {"block", t.block},
            {"condition_key", t.condition.key()},
            {"timing", t.timing.key()},
            {"phases", phases},
            {"assets", assets},
            {"target",
             {{"bbox", {t.target.bbox.x, t.target.bbox.y, t.target.bbox.width, t.target.bbox.height}},
              {"image_width", t.target.image_width},
              {"image_height", t.target.image_height}}}}}};
}

namespace {

void send_json(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, const std::string& message) {
  send_json(res, status, {{"error", message}});
}

std::string content_type(const std::filesystem::path& p) {
  const auto ext = p.extension().string();
  if (ext == ".png") return "image/png";
  if (ext == ".jpg" || ext == ".jpeg") return "image/jpeg";
  if (ext == ".json") return "application/json";
  return "application/octet-stream";
}

}  // namespace

struct HttpServer::Impl {
  SessionManager& sessions;
  std::filesystem::path asset_root;
  httplib::Server server;
  std::thread thread;

  Impl(SessionManager& s, std::filesystem::path root) : sessions(s), asset_root(std::move(root)) { routes(); }

  void routes() {
    server.Get("/api/health", [](const httplib::Request&, httplib::Response& res) {
      send_json(res, 200, {{"status", "ok"}});
    });

    server.Post("/api/sessions", [this](const httplib::Request& req, httplib::Response& res) {
      CreateSessionRequest r;
      try {
        const auto body = json::parse(req.body);
        r.subject_id = body.at("subject_id").get<std::string>();
        r.experiment = body.value("experiment", std::string());
        r.seed = body.value("seed", std::uint64_t{0});
        r.mode = parse_session_mode(body.value("mode", std::string("timed")));
        if (body.contains("trials") && !body["trials"].is_null()) r.trials = body["trials"].get<int>();
      } catch (const std::exception& e) {
        return send_error(res, 400, std::string("bad session request: ") + e.what());
      }
      try {
        const bool existed = [&] {
          try {
            CreateSessionRequest probe = r;
            if (probe.mode == SessionMode::UntimedGroundTruth) probe.experiment = "groundtruth";
            (void)sessions.session(make_session_id(probe));
            return true;
          } catch (const UnknownSession&) {
            return false;
          }
        }();
        send_json(res, existed ? 200 : 201, session_json(sessions.create_session(r)));
      } catch (const SessionDeficit& e) {
        send_error(res, 422, e.what());
      } catch (const StoreWriteError& e) {
        send_error(res, 503, e.what());
      } catch (const std::invalid_argument& e) {
        send_error(res, 400, e.what());
      }
    });

    server.Get(R"(/api/sessions/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
      try {
        send_json(res, 200, session_json(sessions.session(req.matches[1])));
      } catch (const UnknownSession& e) {
        send_error(res, 404, e.what());
      }
    });

    server.Get(R"(/api/sessions/([^/]+)/next)", [this](const httplib::Request& req, httplib::Response& res) {
      try {
        const auto served = sessions.next_trial(req.matches[1]);
        res.set_header("Cache-Control", "no-store");
        send_json(res, 200, served ? served_trial_json(*served) : json{{"done", true}});
      } catch (const UnknownSession& e) {
        send_error(res, 404, e.what());
      }
    });

    server.Post(R"(/api/sessions/([^/]+)/responses)", [this](const httplib::Request& req, httplib::Response& res) {
      std::string trial_id, answer;
      json timing;
      try {
        const auto body = json::parse(req.body);
        trial_id = body.at("trial_id").get<std::string>();
        answer = body.at("raw_answer").get<std::string>();
        timing = body.value("timing_log", json::object());
      } catch (const std::exception& e) {
        return send_error(res, 400, std::string("bad response payload: ") + e.what());
      }
      try {
        const auto cursor = sessions.record_response(req.matches[1], trial_id, answer, timing);
        const auto s = sessions.session(req.matches[1]);
        send_json(res, 200, {{"accepted", true}, {"cursor", cursor}, {"done", s.done()}});
      } catch (const UnknownSession& e) {
        send_error(res, 404, e.what());
      } catch (const ResponseRejected& e) {
        send_error(res, 409, e.what());
      } catch (const StoreWriteError& e) {
        send_error(res, 503, e.what());
      }
    });

    server.Get("/api/export", [this](const httplib::Request& req, httplib::Response& res) {
      ExportFilter f;
      if (req.has_param("session_id")) f.session_id = req.get_param_value("session_id");
      if (req.has_param("subject_id")) f.subject_id = req.get_param_value("subject_id");
      if (req.has_param("experiment")) f.experiment = req.get_param_value("experiment");
      const auto table = sessions.export_results(f);
      std::ostringstream out;
      eval::write_csv_row(out, table.header);
      for (const auto& row : table.rows) eval::write_csv_row(out, row);
      res.status = 200;
      res.set_content(out.str(), "text/csv");
    });

    server.Get(R"(/assets/(.+))", [this](const httplib::Request& req, httplib::Response& res) {
      const std::filesystem::path rel = std::string(req.matches[1]);
      for (const auto& part : rel) {
        if (part == ".." || part.is_absolute()) return send_error(res, 400, "invalid asset path");
      }
      const auto full = asset_root / rel;
      std::error_code ec;
      if (!std::filesystem::is_regular_file(full, ec)) return send_error(res, 404, "no such asset");
      res.status = 200;
      res.set_header("Cache-Control", "public, max-age=31536000, immutable");
      res.set_content(read_file(full), content_type(full));
    });
  }
};

HttpServer::HttpServer(SessionManager& sessions, std::filesystem::path asset_root)
    : impl_(std::make_unique<Impl>(sessions, std::move(asset_root))) {}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind(const std::string& host, int port) {
  if (port == 0) {
    const int bound = impl_->server.bind_to_any_port(host);
    if (bound < 0) throw std::runtime_error("cannot bind " + host);
    return bound;
  }
  if (!impl_->server.bind_to_port(host, port)) {
    throw std::runtime_error("cannot bind " + host + ":" + std::to_string(port));
  }
  return port;
}

void HttpServer::listen() { impl_->server.listen_after_bind(); }

int HttpServer::start(const std::string& host, int port) {
  const int bound = bind(host, port);
  impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
  return bound;
}

void HttpServer::stop() {
  if (!impl_) return;
  impl_->server.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

}  // namespace ctxrec::service
