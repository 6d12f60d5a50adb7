#include "ctxrec/service/session_manager.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <set>
#include <tuple>

#include "ctxrec/rng.hpp"
#include "ctxrec/stimulus/selection.hpp"

namespace ctxrec::service {

using nlohmann::json;

std::string_view to_string(SessionMode m) {
  return m == SessionMode::Timed ? "timed" : "untimed_groundtruth";
}

SessionMode parse_session_mode(std::string_view text) {
  if (text == "timed") return SessionMode::Timed;
  if (text == "untimed_groundtruth") return SessionMode::UntimedGroundTruth;
  throw std::invalid_argument("unknown session mode '" + std::string(text) + "'");
}

std::string make_session_id(const CreateSessionRequest& r) {
  const std::string label = r.subject_id + '\x1f' + r.experiment + '\x1f' + std::string(to_string(r.mode)) + '\x1f' +
                            (r.trials ? std::to_string(*r.trials) : std::string("auto"));
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(derive_seed(r.seed, label)));
  return buf;
}

std::string utc_now_iso8601() {
  const auto now = std::chrono::system_clock::now();
  const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(now.time_since_epoch()).count() % 1000;
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[64];
  std::snprintf(buf, sizeof buf, "%04d-%02d-%02dT%02d:%02d:%02d.%03lldZ", tm.tm_year + 1900, tm.tm_mon + 1, tm.tm_mday,
                tm.tm_hour, tm.tm_min, tm.tm_sec, static_cast<long long>(ms));
  return buf;
}

const std::vector<std::string>& export_columns() {
  static const std::vector<std::string> columns = [] {
    std::vector<std::string> c{"session_id", "subject_id", "mode", "trial_index", "trial_id"};
    const auto& cond = stimulus::condition_columns();
    c.insert(c.end(), cond.begin(), cond.end());
    c.insert(c.end(), {"raw_answer", "timing_log", "received_at"});
    return c;
  }();
  return columns;
}

SessionManager::SessionManager(stimulus::Manifest manifest, ResponseStore& store)
    : SessionManager(std::move(manifest), store, Options{}) {}

SessionManager::SessionManager(stimulus::Manifest manifest, ResponseStore& store, Options options)
    : manifest_(std::move(manifest)), store_(store), options_(std::move(options)) {
  if (!options_.clock) options_.clock = utc_now_iso8601;
  for (std::size_t i = 0; i < manifest_.entries.size(); ++i) trial_index_.emplace(manifest_.entries[i].trial_id, i);
  replay();
}

void SessionManager::replay() {
  for (const auto& r : store_.records()) {
    const std::string type = r.value("type", "");
    if (type == "session") {
      auto s = std::make_unique<Slot>();
      s->session.session_id = r.at("session_id").get<std::string>();
      s->session.subject_id = r.at("subject_id").get<std::string>();
      s->session.experiment = r.at("experiment").get<std::string>();
      s->session.seed = r.at("seed").get<std::uint64_t>();
      s->session.mode = parse_session_mode(r.at("mode").get<std::string>());
      s->session.trial_ids = r.at("trial_ids").get<std::vector<std::string>>();
      for (const auto& id : s->session.trial_ids) {
        if (!trial_index_.contains(id)) {
          throw std::runtime_error("store references trial " + id + " which is not in the manifest");
        }
      }
      sessions_[s->session.session_id] = std::move(s);
    } else if (type == "response") {
      auto it = sessions_.find(r.at("session_id").get<std::string>());
      if (it == sessions_.end()) throw std::runtime_error("store has a response for an unknown session");
      Session& s = it->second->session;
      const auto index = r.at("trial_index").get<std::size_t>();
      if (index != s.cursor || index >= s.trial_ids.size() || s.trial_ids[index] != r.at("trial_id")) {
        throw std::runtime_error("store response out of sequence for session " + s.session_id);
      }
      ++s.cursor;
    }
  }
}

std::vector<std::string> SessionManager::sample_slice(const CreateSessionRequest& request) const {
  std::vector<std::size_t> pool;
  for (std::size_t i = 0; i < manifest_.entries.size(); ++i) {
    const auto& t = manifest_.entries[i];
    const bool wanted = request.mode == SessionMode::UntimedGroundTruth
                            ? t.condition.experiment == stimulus::Experiment::A1Full &&
                                  t.timing.kind == stimulus::TimingKind::Sync
                            : t.block == request.experiment;
    if (wanted) pool.push_back(i);
  }
  if (pool.empty()) {
    throw SessionDeficit("manifest has no trials for experiment '" + request.experiment + "'");
  }
  std::vector<stimulus::SessionCandidate> candidates;
  std::set<std::int64_t> images;
  std::set<std::string> categories;
  for (std::size_t i : pool) {
    const auto& t = manifest_.entries[i];
    candidates.push_back({t.target.image_id, t.target.category, t.target.size_bin, t.condition.key() + "/" + t.timing.key()});
    images.insert(t.target.image_id);
    categories.insert(t.target.category);
  }
  const std::uint64_t seed = derive_seed(request.seed, request.subject_id + "/" + request.experiment);
  auto pick = [&](int count) {
    std::vector<std::string> ids;
    for (std::size_t c : stimulus::balance_session(candidates, count, options_.max_per_category, seed)) {
      ids.push_back(manifest_.entries[pool[c]].trial_id);
    }
    return ids;
  };
  if (request.trials) {
    if (*request.trials < 1) throw std::invalid_argument("trials must be >= 1");
    try {
      return pick(*request.trials);
    } catch (const stimulus::SessionInfeasible& e) {
      throw SessionDeficit(e.what());
    }
  }
  int count = static_cast<int>(std::min(images.size(), categories.size() * options_.max_per_category));
  for (; count > 0; --count) {
    try {
      return pick(count);
    } catch (const stimulus::SessionInfeasible&) {
    }
  }
  throw SessionDeficit("no balanced session can be drawn for experiment '" + request.experiment + "'");
}

Session SessionManager::create_session(const CreateSessionRequest& request) {
  if (request.subject_id.empty()) throw std::invalid_argument("subject_id is required");
  CreateSessionRequest req = request;
  if (req.mode == SessionMode::UntimedGroundTruth) req.experiment = "groundtruth";
  const std::string id = make_session_id(req);
  std::lock_guard lock(sessions_mutex_);
  if (auto it = sessions_.find(id); it != sessions_.end()) {
    std::lock_guard slot_lock(it->second->mutex);
    return it->second->session;
  }
  auto s = std::make_unique<Slot>();
  s->session = {id, req.subject_id, req.experiment, req.seed, req.mode, sample_slice(req), 0};
  store_.append({{"type", "session"},
                 {"session_id", id},
                 {"subject_id", req.subject_id},
                 {"experiment", req.experiment},
                 {"seed", req.seed},
                 {"mode", to_string(req.mode)},
                 {"trial_ids", s->session.trial_ids},
                 {"created_at", options_.clock()}});
  Session copy = s->session;
  sessions_[id] = std::move(s);
  return copy;
}

SessionManager::Slot& SessionManager::slot(const std::string& id) const {
  std::lock_guard lock(sessions_mutex_);
  auto it = sessions_.find(id);
  if (it == sessions_.end()) throw UnknownSession(id);
  return *it->second;
}

Session SessionManager::session(const std::string& id) const {
  Slot& s = slot(id);
  std::lock_guard lock(s.mutex);
  return s.session;
}

std::vector<std::string> SessionManager::session_ids() const {
  std::lock_guard lock(sessions_mutex_);
  std::vector<std::string> ids;
  for (const auto& [id, s] : sessions_) ids.push_back(id);
  return ids;
}

std::optional<ServedTrial> SessionManager::next_trial(const std::string& session_id) const {
  Slot& s = slot(session_id);
  std::lock_guard lock(s.mutex);
  if (s.session.done()) return std::nullopt;
  ServedTrial served;
  served.index = s.session.cursor;
  served.total = s.session.trial_ids.size();
  served.trial = manifest_.entries[trial_index_.at(s.session.trial_ids[s.session.cursor])];
  served.exposure_limited = s.session.mode == SessionMode::Timed;
  return served;
}

std::size_t SessionManager::record_response(const std::string& session_id, const std::string& trial_id,
                                            const std::string& raw_answer, const json& timing_log) {
  Slot& s = slot(session_id);
  std::lock_guard lock(s.mutex);
  Session& session = s.session;
  const auto& ids = session.trial_ids;
  const auto answered_end = ids.begin() + static_cast<std::ptrdiff_t>(session.cursor);
  if (std::find(ids.begin(), answered_end, trial_id) != answered_end) {
    throw ResponseRejected(ResponseRejected::Reason::Duplicate, "trial " + trial_id + " already answered");
  }
  if (session.done()) throw ResponseRejected(ResponseRejected::Reason::Done, "session " + session_id + " is complete");
  if (ids[session.cursor] != trial_id) {
    throw ResponseRejected(ResponseRejected::Reason::OutOfOrder,
                           "expected trial " + ids[session.cursor] + ", got " + trial_id);
  }
  store_.append({{"type", "response"},
                 {"session_id", session_id},
                 {"subject_id", session.subject_id},
                 {"trial_id", trial_id},
                 {"trial_index", session.cursor},
                 {"raw_answer", raw_answer},
                 {"timing_log", timing_log},
                 {"received_at", options_.clock()}});
  return ++session.cursor;
}

eval::CsvTable SessionManager::export_results(const ExportFilter& filter) const {
  std::map<std::string, std::pair<std::string, std::string>> session_info;  // id -> (experiment, mode)
  std::vector<json> responses;
  for (const auto& r : store_.records()) {
    const std::string type = r.value("type", "");
    if (type == "session") {
      session_info[r.at("session_id")] = {r.at("experiment"), r.at("mode")};
    } else if (type == "response") {
      responses.push_back(r);
    }
  }
  std::vector<std::tuple<std::string, std::size_t, const json*>> order;
  for (const auto& r : responses) {
    const std::string sid = r.at("session_id");
    if (filter.session_id && sid != *filter.session_id) continue;
    if (filter.subject_id && r.at("subject_id") != *filter.subject_id) continue;
    if (filter.experiment && session_info[sid].first != *filter.experiment) continue;
    order.emplace_back(sid, r.at("trial_index").get<std::size_t>(), &r);
  }
  std::sort(order.begin(), order.end(),
            [](const auto& a, const auto& b) { return std::tie(std::get<0>(a), std::get<1>(a)) <
                                                      std::tie(std::get<0>(b), std::get<1>(b)); });
  eval::CsvTable table;
  table.header = export_columns();
  for (const auto& [sid, index, rec] : order) {
    const auto& r = *rec;
    const std::string trial_id = r.at("trial_id");
    std::vector<std::string> row{sid, r.at("subject_id"), session_info[sid].second, std::to_string(index), trial_id};
    const auto cond = stimulus::condition_values(manifest_.entries[trial_index_.at(trial_id)]);
    row.insert(row.end(), cond.begin(), cond.end());
    row.insert(row.end(), {r.at("raw_answer").get<std::string>(), r.at("timing_log").dump(),
                           r.at("received_at").get<std::string>()});
    table.rows.push_back(std::move(row));
  }
  return table;
}

}  // namespace ctxrec::service
