#include <gtest/gtest.h>

#include <sys/resource.h>

#include <csignal>
#include <fstream>
#include <set>
#include <thread>

#include "ctxrec/digest.hpp"
#include "ctxrec/service/response_store.hpp"
#include "fixtures.hpp"

namespace ctxrec::service {
namespace {

using nlohmann::json;

TEST(Store, AppendAndReopen) {
  testing::TempDir dir;
  {
    ResponseStore s(dir / "log.jsonl");
    EXPECT_EQ(s.append({{"type", "response"}, {"n", 1}}), 0u);
    EXPECT_EQ(s.append({{"type", "response"}, {"n", 2}}), 1u);
  }
  ResponseStore s(dir / "log.jsonl");
  ASSERT_EQ(s.size(), 2u);
  EXPECT_EQ(s.records()[1]["n"], 2);
  EXPECT_TRUE(std::filesystem::exists(s.index_path()));
  const auto idx = json::parse(read_file(s.index_path()));
  EXPECT_EQ(idx["records"], 2);
}

TEST(Store, LineFormat) {
  const auto line = encode_record({{"a", 1}});
  EXPECT_EQ(line.size(), 8 + 1 + std::string(R"({"a":1})").size() + 1);
  EXPECT_EQ(line[8], '\t');
  EXPECT_EQ(line.back(), '\n');
}

TEST(Store, TornTailDropped) {
  testing::TempDir dir;
  const auto path = dir / "log.jsonl";
  {
    ResponseStore s(path, {false, 64});
    s.append({{"k", 1}});
    s.append({{"k", 2}});
  }
  const auto good = std::filesystem::file_size(path);
  const auto partial = encode_record({{"k", 3}});
  {
    std::ofstream out(path, std::ios::app | std::ios::binary);
    out << partial.substr(0, partial.size() / 2);
  }
  const auto before = check_store(path);
  EXPECT_TRUE(before.torn_tail);
  EXPECT_EQ(before.records, 2u);
  {
    ResponseStore s(path);
    EXPECT_EQ(s.size(), 2u);
    EXPECT_EQ(std::filesystem::file_size(path), good);
    s.append({{"k", 4}});
  }
  const auto after = check_store(path);
  EXPECT_FALSE(after.torn_tail);
  EXPECT_EQ(after.records, 3u);
  EXPECT_EQ(after.bad_checksums, 0u);
}

TEST(Store, MidFileCorruptionRefused) {
  testing::TempDir dir;
  const auto path = dir / "log.jsonl";
  {
    ResponseStore s(path, {false, 64});
    s.append({{"k", "aaaa"}});
    s.append({{"k", "bbbb"}});
  }
  auto text = read_file(path);
  text[text.find("aaaa")] = 'z';
  std::ofstream(path, std::ios::binary | std::ios::trunc) << text;
  EXPECT_EQ(check_store(path).bad_checksums, 1u);
  EXPECT_THROW(ResponseStore{path}, StoreCorrupted);
}

TEST(Store, ConcurrentWritersNeverInterleave) {
  testing::TempDir dir;
  const auto path = dir / "log.jsonl";
  constexpr int kThreads = 8;
  constexpr int kPerThread = 250;
  {
    ResponseStore s(path, {false, 16});
    std::vector<std::jthread> threads;
    for (int t = 0; t < kThreads; ++t) {
      threads.emplace_back([&, t] {
        for (int i = 0; i < kPerThread; ++i) {
          s.append({{"type", "response"}, {"session_id", "s" + std::to_string(t)}, {"trial_id", std::to_string(i)},
                    {"padding", std::string(static_cast<std::size_t>(50 + (i * 37) % 400), 'x')}});
        }
      });
    }
  }
  const auto check = check_store(path);
  EXPECT_EQ(check.records, static_cast<std::size_t>(kThreads * kPerThread));
  EXPECT_EQ(check.bad_checksums, 0u);
  EXPECT_FALSE(check.torn_tail);
  EXPECT_EQ(check.duplicate_responses, 0u);
  ResponseStore reopened(path);
  std::set<std::pair<std::string, std::string>> seen;
  for (const auto& r : reopened.records()) seen.emplace(r.at("session_id").get<std::string>(), r.at("trial_id").get<std::string>());
  EXPECT_EQ(seen.size(), static_cast<std::size_t>(kThreads * kPerThread));
}

TEST(Store, DuplicateResponsesDetected) {
  testing::TempDir dir;
  const auto path = dir / "log.jsonl";
  {
    ResponseStore s(path, {false, 64});
    const json r{{"type", "response"}, {"session_id", "a"}, {"trial_id", "t"}};
    s.append(r);
    s.append(r);
  }
  EXPECT_EQ(check_store(path).duplicate_responses, 1u);
}

// Caps the process file-size limit so the next write(2) fails with EFBIG.
class FileSizeCap {
 public:
  explicit FileSizeCap(rlim_t bytes) {
    std::signal(SIGXFSZ, SIG_IGN);
    getrlimit(RLIMIT_FSIZE, &saved_);
    rlimit cap = saved_;
    cap.rlim_cur = bytes;
    setrlimit(RLIMIT_FSIZE, &cap);
  }
  ~FileSizeCap() { setrlimit(RLIMIT_FSIZE, &saved_); }

 private:
  rlimit saved_{};
};

TEST(Store, FailedWriteLeavesLogIntact) {
  testing::TempDir dir;
  const auto path = dir / "log.jsonl";
  ResponseStore s(path, {false, 0});
  s.append({{"k", 1}});
  const auto size = std::filesystem::file_size(path);
  {
    FileSizeCap cap(size + 5);
    EXPECT_THROW(s.append({{"k", std::string(100, 'y')}}), StoreWriteError);
  }
  EXPECT_EQ(std::filesystem::file_size(path), size);
  EXPECT_EQ(s.size(), 1u);
  s.append({{"k", 2}});
  const auto check = check_store(path);
  EXPECT_EQ(check.records, 2u);
  EXPECT_EQ(check.bad_checksums, 0u);
}

}  // namespace
}  // namespace ctxrec::service
