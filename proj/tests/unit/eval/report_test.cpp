#include <gtest/gtest.h>

#include <cmath>

#include "ctxrec/digest.hpp"
#include "ctxrec/eval/report.hpp"
#include "fixtures.hpp"

namespace ctxrec::eval {
namespace {

ResponseRecord rec(const std::string& cond, bool correct, const std::string& block = "A1") {
  ResponseRecord r;
  r.trial_id = cond + std::to_string(correct);
  r.correct = correct;
  r.fields = {{"condition_key", cond}, {"timing", "sync_T200"}, {"size_bin", "S1"}, {"block", block}};
  return r;
}

TEST(Report, AccuracyAndSem) {
  const std::vector<ResponseRecord> rs{rec("a", true), rec("a", false), rec("a", false), rec("a", false)};
  const auto rep = condition_report(rs);
  ASSERT_EQ(rep.size(), 1u);
  EXPECT_EQ(rep[0].n, 4u);
  EXPECT_DOUBLE_EQ(rep[0].accuracy, 0.25);
  EXPECT_NEAR(rep[0].sem, 0.2165, 1e-4);
  EXPECT_FALSE(rep[0].single_observation);
}

TEST(Report, SingleRecordAndEmpty) {
  const auto rep = condition_report({rec("b", true)});
  ASSERT_EQ(rep.size(), 1u);
  EXPECT_EQ(rep[0].sem, 0.0);
  EXPECT_TRUE(rep[0].single_observation);
  EXPECT_TRUE(condition_report({}).empty());
}

TEST(Report, GroupKey) {
  const auto r = rec("x", true);
  EXPECT_EQ(group_key(r, default_grouping()), "condition_key=x|timing=sync_T200|size_bin=S1");
  EXPECT_EQ(group_key(r, {"missing"}), "missing=");
}

TEST(Report, SummaryCorrelatesPairedConditions) {
  std::vector<ResponseRecord> human, model;
  // Per-condition accuracies human (0.1, 0.4, 0.7), model (0.2, 0.5, 0.6).
  const double h[] = {0.1, 0.4, 0.7}, m[] = {0.2, 0.5, 0.6};
  for (int c = 0; c < 3; ++c) {
    for (int i = 0; i < 10; ++i) {
      human.push_back(rec("c" + std::to_string(c), i < std::lround(h[c] * 10)));
      model.push_back(rec("c" + std::to_string(c), i < std::lround(m[c] * 10)));
    }
  }
  model.push_back(rec("model_only", true));
  const auto s = summarize(human, model);
  EXPECT_EQ(s.paired_conditions, 3u);
  ASSERT_TRUE(s.correlation);
  EXPECT_NEAR(*s.correlation, 0.960769, 5e-7);
  EXPECT_EQ(s.conditions.size(), 4u);
  EXPECT_NEAR(s.human_block_accuracy.at("A1"), 0.4, 1e-12);
}

TEST(Report, CorrelationUndefinedIsExplained) {
  const auto s = summarize({rec("a", true)}, {rec("a", false)});
  EXPECT_FALSE(s.correlation);
  EXPECT_FALSE(s.correlation_note.empty());
}

TEST(Report, WritesFiles) {
  testing::TempDir dir;
  write_report(dir / "out", {rec("a", true), rec("b", false)}, {rec("a", true)});
  for (const char* f : {"human_conditions.csv", "model_conditions.csv", "comparison.csv", "summary.md"}) {
    EXPECT_TRUE(std::filesystem::exists(dir / "out" / f)) << f;
  }
  const auto md = read_file(dir / "out/summary.md");
  EXPECT_LT(md.find("Accuracy"), md.find("correlation"));
}

TEST(Report, LoadsModelReadoutRows) {
  const auto t = parse_csv(
      "trial_id,condition_key,step,readout,predicted_label,correct\n"
      "t1,a,1,0,cat,0\n"
      "t1,a,2,1,dog,1\n"
      "t2,a,2,1,cat,0\n");
  const auto rs = load_model_results(t);
  ASSERT_EQ(rs.size(), 2u);
  EXPECT_TRUE(rs[0].correct);
  EXPECT_EQ(rs[0].answer, "dog");
  EXPECT_EQ(rs[0].fields.at("condition_key"), "a");
}

TEST(Report, ScoresHumanExportAgainstKey) {
  const auto key = AnswerKey::parse(R"({"image:7": ["mouse"], "t9": ["cup"]})");
  const auto t = parse_csv(
      "session_id,subject_id,trial_id,image_id,raw_answer\n"
      "s,u1,t1,7,Mice\n"
      "s,u1,t9,8,spoon\n");
  const auto rs = load_human_results(t, key);
  ASSERT_EQ(rs.size(), 2u);
  EXPECT_TRUE(rs[0].correct);
  EXPECT_FALSE(rs[1].correct);
  EXPECT_EQ(rs[0].responder, "u1");
  const auto bad = parse_csv("trial_id,raw_answer\nzzz,cat\n");
  EXPECT_THROW((void)load_human_results(bad, key), UnknownTrial);
}

}  // namespace
}  // namespace ctxrec::eval
