#include <gtest/gtest.h>
#include <httplib.h>

#include "ctxrec/digest.hpp"
#include "ctxrec/eval/csv.hpp"
#include "ctxrec/service/http_api.hpp"
#include "fixtures.hpp"

namespace ctxrec::service {
namespace {

using nlohmann::json;

class HttpTest : public ::testing::Test {
 protected:
  void SetUp() override {
    manifest_ = testing::make_session_manifest(4, 2, dir_.path());
    store_ = std::make_unique<ResponseStore>(dir_ / "responses.jsonl", ResponseStore::Options{false, 64});
    mgr_ = std::make_unique<SessionManager>(manifest_, *store_);
    server_ = std::make_unique<HttpServer>(*mgr_, dir_.path());
    port_ = server_->start("127.0.0.1", 0);
    client_ = std::make_unique<httplib::Client>("127.0.0.1", port_);
  }

  void TearDown() override { server_->stop(); }

  json create(const json& body, int expect) {
    auto r = client_->Post("/api/sessions", body.dump(), "application/json");
    EXPECT_TRUE(r);
    EXPECT_EQ(r->status, expect) << r->body;
    return json::parse(r->body);
  }

  httplib::Result respond(const std::string& sid, const json& body) {
    return client_->Post("/api/sessions/" + sid + "/responses", body.dump(), "application/json");
  }

  testing::TempDir dir_;
  stimulus::Manifest manifest_;
  std::unique_ptr<ResponseStore> store_;
  std::unique_ptr<SessionManager> mgr_;
  std::unique_ptr<HttpServer> server_;
  std::unique_ptr<httplib::Client> client_;
  int port_ = 0;
};

TEST_F(HttpTest, Health) {
  auto r = client_->Get("/api/health");
  ASSERT_TRUE(r);
  EXPECT_EQ(r->status, 200);
  EXPECT_EQ(json::parse(r->body), json({{"status", "ok"}}));
}

TEST_F(HttpTest, CreateAndFetchSession) {
  const json req = {{"subject_id", "s1"}, {"experiment", "A1"}, {"seed", 5}};
  const auto a = create(req, 201);
  const auto b = create(req, 200);
  EXPECT_EQ(a["session_id"], b["session_id"]);
  EXPECT_EQ(a["total"], 8);
  EXPECT_EQ(a["cursor"], 0);
  EXPECT_EQ(a["mode"], "timed");
  auto r = client_->Get("/api/sessions/" + a["session_id"].get<std::string>());
  ASSERT_TRUE(r);
  EXPECT_EQ(r->status, 200);
  EXPECT_EQ(json::parse(r->body)["subject_id"], "s1");
  EXPECT_EQ(client_->Get("/api/sessions/ffff")->status, 404);
  EXPECT_EQ(client_->Get("/api/sessions/ffff/next")->status, 404);
}

TEST_F(HttpTest, CreateErrors) {
  EXPECT_EQ(client_->Post("/api/sessions", "{not json", "application/json")->status, 400);
  EXPECT_EQ(client_->Post("/api/sessions", json({{"experiment", "A1"}}).dump(), "application/json")->status, 400);
  create({{"subject_id", "s"}, {"experiment", "A1"}, {"mode", "sideways"}}, 400);
  create({{"subject_id", "s"}, {"experiment", "Z7"}}, 422);
  create({{"subject_id", "s"}, {"experiment", "A1"}, {"trials", 500}}, 422);
  create({{"subject_id", "s"}, {"experiment", "A1"}, {"trials", 0}}, 400);
}

TEST_F(HttpTest, FullSessionFlow) {
  const auto s = create({{"subject_id", "s2"}, {"experiment", "A1"}, {"seed", 1}, {"trials", 3}}, 201);
  const std::string sid = s["session_id"];
  std::vector<std::string> served;
  for (int i = 0; i < 3; ++i) {
    auto r = client_->Get("/api/sessions/" + sid + "/next");
    ASSERT_TRUE(r);
    ASSERT_EQ(r->status, 200);
    EXPECT_EQ(r->get_header_value("Cache-Control"), "no-store");
    for (int c = 0; c < 4; ++c) EXPECT_EQ(r->body.find("cat" + std::to_string(c)), std::string::npos);
    const auto body = json::parse(r->body);
    EXPECT_FALSE(body["done"].get<bool>());
    EXPECT_EQ(body["index"], i);
    EXPECT_TRUE(body["exposure_limited"].get<bool>());
    const auto& trial = body["trial"];
    EXPECT_FALSE(trial["target"].contains("category"));
    for (const auto& p : trial["phases"]) EXPECT_TRUE(p["ms"].is_number());
    for (const auto& [role, url] : trial["assets"].items()) {
      const std::string u = url;
      ASSERT_EQ(u.rfind("/assets/", 0), 0u);
      auto a = client_->Get(u);
      ASSERT_TRUE(a);
      EXPECT_EQ(a->status, 200);
      EXPECT_EQ(a->get_header_value("Content-Type"), "image/png");
      EXPECT_EQ(a->get_header_value("Cache-Control"), "public, max-age=31536000, immutable");
      EXPECT_EQ(a->body, read_file(dir_ / u.substr(8)));
    }
    served.push_back(trial["trial_id"]);
    auto post = respond(sid, {{"trial_id", served.back()}, {"raw_answer", "ans"}, {"timing_log", {{"image", 201}}}});
    ASSERT_TRUE(post);
    ASSERT_EQ(post->status, 200) << post->body;
    const auto ack = json::parse(post->body);
    EXPECT_TRUE(ack["accepted"].get<bool>());
    EXPECT_EQ(ack["cursor"], i + 1);
    EXPECT_EQ(ack["done"], i == 2);
  }
  auto end = client_->Get("/api/sessions/" + sid + "/next");
  EXPECT_EQ(json::parse(end->body), json({{"done", true}}));
  EXPECT_EQ(respond(sid, {{"trial_id", served[0]}, {"raw_answer", "x"}})->status, 409);
  EXPECT_EQ(respond(sid, {{"trial_id", "other"}, {"raw_answer", "x"}})->status, 409);
}

TEST_F(HttpTest, ResponseErrors) {
  const auto s = create({{"subject_id", "s3"}, {"experiment", "A1"}, {"trials", 2}}, 201);
  const std::string sid = s["session_id"];
  const auto next = json::parse(client_->Get("/api/sessions/" + sid + "/next")->body);
  const std::string first = next["trial"]["trial_id"];
  EXPECT_EQ(respond("0000", {{"trial_id", first}, {"raw_answer", "x"}})->status, 404);
  EXPECT_EQ(client_->Post("/api/sessions/" + sid + "/responses", "[]", "application/json")->status, 400);
  EXPECT_EQ(respond(sid, {{"trial_id", first}})->status, 400);
  EXPECT_EQ(respond(sid, {{"trial_id", first}, {"raw_answer", 3}})->status, 400);
  const auto before = store_->size();
  EXPECT_EQ(respond(sid, {{"trial_id", "nope"}, {"raw_answer", "x"}})->status, 409);
  EXPECT_EQ(store_->size(), before);
  EXPECT_EQ(respond(sid, {{"trial_id", first}, {"raw_answer", "x"}})->status, 200);
  EXPECT_EQ(respond(sid, {{"trial_id", first}, {"raw_answer", "x"}})->status, 409);
  EXPECT_EQ(store_->size(), before + 1);
}

TEST_F(HttpTest, GroundTruthModeHidesTiming) {
  const auto s = create({{"subject_id", "gt"}, {"mode", "untimed_groundtruth"}}, 201);
  EXPECT_EQ(s["experiment"], "groundtruth");
  const auto body = json::parse(client_->Get("/api/sessions/" + s["session_id"].get<std::string>() + "/next")->body);
  EXPECT_FALSE(body["exposure_limited"].get<bool>());
  EXPECT_EQ(body["trial"]["condition_key"], "A1_full");
  bool saw_image = false;
  for (const auto& p : body["trial"]["phases"]) {
    if (p["name"] == "image") {
      saw_image = true;
      EXPECT_TRUE(p["ms"].is_null());
    }
  }
  EXPECT_TRUE(saw_image);
}

TEST(ServedTrialJson, UntimedDropsMaskAndNullsStimulus) {
  const auto m = testing::make_session_manifest(1, 1);
  ServedTrial served{0, 1, m.entries.at(2), false};
  ASSERT_EQ(served.trial.block, "C2");
  const auto untimed = served_trial_json(served);
  for (const auto& p : untimed["trial"]["phases"]) {
    EXPECT_NE(p["name"], "mask");
    if (p["name"] == "fixation" || p["name"] == "cue") {
      EXPECT_TRUE(p["ms"].is_number());
    } else {
      EXPECT_TRUE(p["ms"].is_null());
    }
  }
  served.exposure_limited = true;
  const auto timed = served_trial_json(served);
  std::vector<std::string> names;
  for (const auto& p : timed["trial"]["phases"]) names.push_back(p["name"]);
  EXPECT_EQ(names, (std::vector<std::string>{"fixation", "cue", "image", "mask"}));
  EXPECT_EQ(timed["trial"]["phases"][2]["ms"], 50);
  EXPECT_TRUE(timed["trial"]["assets"].contains("mask"));
}

TEST_F(HttpTest, AssetsRejectTraversalAndMissing) {
  std::ofstream(dir_.path().parent_path() / "secret.txt") << "x";
  EXPECT_EQ(client_->Get("/assets/../secret.txt")->status, 400);
  EXPECT_EQ(client_->Get("/assets/assets/%2e%2e/%2e%2e/x")->status, 400);
  EXPECT_EQ(client_->Get("/assets/assets/none.png")->status, 404);
  std::filesystem::remove(dir_.path().parent_path() / "secret.txt");
}

TEST_F(HttpTest, ExportCsv) {
  auto empty = client_->Get("/api/export");
  ASSERT_TRUE(empty);
  EXPECT_EQ(empty->status, 200);
  EXPECT_EQ(empty->get_header_value("Content-Type"), "text/csv");
  auto t0 = eval::parse_csv(empty->body);
  EXPECT_EQ(t0.header, export_columns());
  EXPECT_TRUE(t0.rows.empty());

  const auto a = create({{"subject_id", "x1"}, {"experiment", "A1"}, {"trials", 2}}, 201);
  const auto b = create({{"subject_id", "x2"}, {"experiment", "C2"}, {"trials", 1}}, 201);
  for (const auto& s : {a, b}) {
    const std::string sid = s["session_id"];
    while (true) {
      const auto n = json::parse(client_->Get("/api/sessions/" + sid + "/next")->body);
      if (n["done"].get<bool>()) break;
      ASSERT_EQ(respond(sid, {{"trial_id", n["trial"]["trial_id"]}, {"raw_answer", "a, \"quoted\"\nline"}})->status, 200);
    }
  }
  EXPECT_EQ(eval::parse_csv(client_->Get("/api/export")->body).rows.size(), 3u);
  const auto only = eval::parse_csv(client_->Get("/api/export?subject_id=x1")->body);
  ASSERT_EQ(only.rows.size(), 2u);
  EXPECT_EQ(only.cell(0, "raw_answer"), "a, \"quoted\"\nline");
  EXPECT_EQ(eval::parse_csv(client_->Get("/api/export?experiment=C2")->body).rows.size(), 1u);
  const std::string sid = b["session_id"];
  EXPECT_EQ(eval::parse_csv(client_->Get("/api/export?session_id=" + sid)->body).rows.size(), 1u);
}

}  // namespace
}  // namespace ctxrec::service
