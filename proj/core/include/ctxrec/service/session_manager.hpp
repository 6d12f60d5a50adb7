#pragma once

#include <nlohmann/json.hpp>

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ctxrec/eval/csv.hpp"
#include "ctxrec/service/response_store.hpp"
#include "ctxrec/stimulus/trial.hpp"

namespace ctxrec::service {

enum class SessionMode { Timed, UntimedGroundTruth };

[[nodiscard]] std::string_view to_string(SessionMode m);
[[nodiscard]] SessionMode parse_session_mode(std::string_view text);

struct Session {
  std::string session_id;
  std::string subject_id;
  std::string experiment;
  std::uint64_t seed = 0;
  SessionMode mode = SessionMode::Timed;
  std::vector<std::string> trial_ids;
  std::size_t cursor = 0;

  [[nodiscard]] bool done() const { return cursor >= trial_ids.size(); }
};

class UnknownSession : public std::out_of_range {
 public:
  explicit UnknownSession(const std::string& id) : std::out_of_range("unknown session " + id) {}
};

/// Response rejected because it is a duplicate or not the cursor trial.
class ResponseRejected : public std::runtime_error {
 public:
  enum class Reason { Duplicate, OutOfOrder, Done };
  ResponseRejected(Reason r, const std::string& message) : std::runtime_error(message), reason(r) {}
  Reason reason;
};

/// Raised when the manifest cannot supply a balanced session.
class SessionDeficit : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct CreateSessionRequest {
  std::string subject_id;
  std::string experiment;  // manifest block, e.g. "A1"; ignored in ground-truth mode
  std::uint64_t seed = 0;
  SessionMode mode = SessionMode::Timed;
  std::optional<int> trials;  // default: as many as the balance constraints allow
};

/// A served trial: the manifest entry plus the presentation to use.
struct ServedTrial {
  std::size_t index = 0;
  std::size_t total = 0;
  stimulus::TrialSpec trial;
  bool exposure_limited = true;  // false in ground-truth mode
};

struct ExportFilter {
  std::optional<std::string> session_id;
  std::optional<std::string> subject_id;
  std::optional<std::string> experiment;
};

using Clock = std::function<std::string()>;

class SessionManager {
 public:
  struct Options {
    int max_per_category = 2;
    Clock clock;  // ISO-8601 UTC timestamps; defaults to the system clock
  };

  /// Replays every session and response record already in the store.
  SessionManager(stimulus::Manifest manifest, ResponseStore& store);
  SessionManager(stimulus::Manifest manifest, ResponseStore& store, Options options);

  /// Deterministic in (subject, experiment, seed, mode): asking again returns
  /// the existing session unchanged.
  Session create_session(const CreateSessionRequest& request);

  /// Trial at the cursor, or nullopt when the session is done. Never advances.
  [[nodiscard]] std::optional<ServedTrial> next_trial(const std::string& session_id) const;

  /// Appends the response and advances the cursor. The cursor is unchanged if
  /// the store write fails (StoreWriteError propagates).
  std::size_t record_response(const std::string& session_id, const std::string& trial_id,
                              const std::string& raw_answer, const nlohmann::json& timing_log);

  [[nodiscard]] Session session(const std::string& session_id) const;
  [[nodiscard]] std::vector<std::string> session_ids() const;

  /// One row per stored response joined with the trial's condition columns,
  /// ordered by (session_id, trial_index).
  [[nodiscard]] eval::CsvTable export_results(const ExportFilter& filter = {}) const;

  [[nodiscard]] const stimulus::Manifest& manifest() const { return manifest_; }

 private:
  struct Slot {
    mutable std::mutex mutex;
    Session session;
  };

  [[nodiscard]] Slot& slot(const std::string& id) const;
  [[nodiscard]] std::vector<std::string> sample_slice(const CreateSessionRequest& request) const;
  void replay();

  stimulus::Manifest manifest_;
  ResponseStore& store_;
  Options options_;
  std::map<std::string, std::size_t> trial_index_;  // trial_id -> manifest entry
  mutable std::mutex sessions_mutex_;
  std::map<std::string, std::unique_ptr<Slot>> sessions_;
};

/// Stable session id derived from the creation parameters.
[[nodiscard]] std::string make_session_id(const CreateSessionRequest& request);

[[nodiscard]] std::string utc_now_iso8601();

[[nodiscard]] const std::vector<std::string>& export_columns();

}  // namespace ctxrec::service
