#pragma once

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <mutex>
#include <stdexcept>
#include <string>
#include <vector>

namespace ctxrec::service {

/// Raised when an append did not reach the log; the caller may retry.
class StoreWriteError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when a complete line in the middle of the log fails its checksum.
class StoreCorrupted : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Append-only record log. Each line is "<crc32 hex>\t<compact json>\n"; a
/// record is present iff its full line (newline included) is on disk.
/// Appends from any thread are serialized and issued as one write(2).
class ResponseStore {
 public:
  struct Options {
    bool fsync = true;
    int index_every = 64;  // rewrite the side index after this many appends
  };

  /// Opens or creates the log, replays existing records and drops a torn
  /// trailing line left by a crash.
  explicit ResponseStore(std::filesystem::path path);
  ResponseStore(std::filesystem::path path, Options options);
  ~ResponseStore();
  ResponseStore(const ResponseStore&) = delete;
  ResponseStore& operator=(const ResponseStore&) = delete;

  /// Appends one record; returns its sequence number.
  std::uint64_t append(const nlohmann::json& record);

  /// Snapshot of every record in append order.
  [[nodiscard]] std::vector<nlohmann::json> records() const;
  [[nodiscard]] std::size_t size() const;
  [[nodiscard]] const std::filesystem::path& path() const { return path_; }
  [[nodiscard]] std::filesystem::path index_path() const;

  /// Writes the side index now: record count, byte length and per-type counts.
  void write_index() const;

 private:
  void write_index_locked() const;

  std::filesystem::path path_;
  Options options_;
  int fd_ = -1;
  mutable std::mutex mutex_;
  std::vector<nlohmann::json> records_;
  std::uint64_t bytes_ = 0;
};

/// Offline integrity report over a log file.
struct StoreCheck {
  std::size_t records = 0;
  std::size_t bad_checksums = 0;
  bool torn_tail = false;
  std::size_t duplicate_responses = 0;  // same (session_id, trial_id) twice
};

[[nodiscard]] StoreCheck check_store(const std::filesystem::path& path);

/// "<crc32 hex>\t<json>\n" for one record.
[[nodiscard]] std::string encode_record(const nlohmann::json& record);

}  // namespace ctxrec::service
