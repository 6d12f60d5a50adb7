#include "ctxrec/service/response_store.hpp"

#include <fcntl.h>
#include <unistd.h>
#include <zlib.h>

#include <cerrno>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <string_view>

#include "ctxrec/digest.hpp"

namespace ctxrec::service {

using nlohmann::json;

namespace {

std::string crc_hex(std::string_view payload) {
  const auto crc = ::crc32(0L, reinterpret_cast<const Bytef*>(payload.data()), static_cast<uInt>(payload.size()));
  char buf[9];
  std::snprintf(buf, sizeof buf, "%08lx", static_cast<unsigned long>(crc));
  return buf;
}

// Parsed view of a log file: complete valid records plus diagnostics.
struct Scan {
  std::vector<json> records;
  std::uint64_t good_bytes = 0;
  std::size_t bad = 0;
  std::optional<std::uint64_t> first_bad_offset;
  bool torn_tail = false;
};

Scan scan(std::string_view text) {
  Scan s;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) {
      s.torn_tail = true;
      break;
    }
    const std::string_view line = text.substr(pos, nl - pos);
    const auto tab = line.find('\t');
    bool ok = tab == 8 && crc_hex(line.substr(9)) == line.substr(0, 8);
    if (ok) {
      try {
        s.records.push_back(json::parse(line.substr(9)));
      } catch (const json::exception&) {
        ok = false;
      }
    }
    if (!ok) {
      ++s.bad;
      if (!s.first_bad_offset) s.first_bad_offset = pos;
    }
    pos = nl + 1;
    if (ok && s.bad == 0) s.good_bytes = pos;
  }
  return s;
}

}  // namespace

std::string encode_record(const json& record) {
  const std::string payload = record.dump();
  return crc_hex(payload) + "\t" + payload + "\n";
}

ResponseStore::ResponseStore(std::filesystem::path path) : ResponseStore(std::move(path), Options{}) {}

ResponseStore::ResponseStore(std::filesystem::path path, Options options)
    : path_(std::move(path)), options_(options) {
  if (path_.has_parent_path()) std::filesystem::create_directories(path_.parent_path());
  std::string text;
  if (std::filesystem::exists(path_)) text = read_file(path_);
  Scan s = scan(text);
  if (s.bad > 0) {
    throw StoreCorrupted(path_.string() + ": checksum failure at byte " + std::to_string(*s.first_bad_offset));
  }
  records_ = std::move(s.records);
  bytes_ = s.good_bytes;
  fd_ = ::open(path_.c_str(), O_WRONLY | O_CREAT | O_APPEND | O_CLOEXEC, 0644);
  if (fd_ < 0) throw StoreWriteError("cannot open " + path_.string() + ": " + std::strerror(errno));
  if (s.torn_tail && ::ftruncate(fd_, static_cast<off_t>(bytes_)) != 0) {
    throw StoreWriteError("cannot drop torn tail of " + path_.string());
  }
}

ResponseStore::~ResponseStore() {
  if (fd_ >= 0) {
    try {
      std::lock_guard lock(mutex_);
      write_index_locked();
    } catch (...) {
    }
    ::close(fd_);
  }
}

std::uint64_t ResponseStore::append(const json& record) {
  const std::string line = encode_record(record);
  std::lock_guard lock(mutex_);
  const ssize_t written = ::write(fd_, line.data(), line.size());
  if (written != static_cast<ssize_t>(line.size())) {
    // Roll back a short write so the log stays line-aligned.
    if (written > 0 && ::ftruncate(fd_, static_cast<off_t>(bytes_)) != 0) {
      throw StoreCorrupted("short write to " + path_.string() + " could not be rolled back");
    }
    throw StoreWriteError("append to " + path_.string() + " failed: " + std::strerror(errno));
  }
  if (options_.fsync && ::fsync(fd_) != 0) {
    throw StoreWriteError("fsync of " + path_.string() + " failed: " + std::strerror(errno));
  }
  bytes_ += line.size();
  records_.push_back(record);
  if (options_.index_every > 0 && records_.size() % static_cast<std::size_t>(options_.index_every) == 0) {
    write_index_locked();
  }
  return records_.size() - 1;
}

std::vector<json> ResponseStore::records() const {
  std::lock_guard lock(mutex_);
  return records_;
}

std::size_t ResponseStore::size() const {
  std::lock_guard lock(mutex_);
  return records_.size();
}

std::filesystem::path ResponseStore::index_path() const {
  auto p = path_;
  p += ".idx";
  return p;
}

void ResponseStore::write_index() const {
  std::lock_guard lock(mutex_);
  write_index_locked();
}

void ResponseStore::write_index_locked() const {
  std::map<std::string, std::size_t> by_type;
  for (const auto& r : records_) ++by_type[r.value("type", std::string("unknown"))];
  const json index = {{"records", records_.size()}, {"bytes", bytes_}, {"by_type", by_type}};
  auto tmp = index_path();
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    out << index.dump() << '\n';
  }
  std::filesystem::rename(tmp, index_path());
}

StoreCheck check_store(const std::filesystem::path& path) {
  const Scan s = scan(std::filesystem::exists(path) ? read_file(path) : std::string());
  StoreCheck c;
  c.records = s.records.size();
  c.bad_checksums = s.bad;
  c.torn_tail = s.torn_tail;
  std::set<std::pair<std::string, std::string>> seen;
  for (const auto& r : s.records) {
    if (r.value("type", "") != "response") continue;
    if (!seen.emplace(r.value("session_id", ""), r.value("trial_id", "")).second) ++c.duplicate_responses;
  }
  return c;
}

}  // namespace ctxrec::service
