#include <gtest/gtest.h>

#include <chrono>
#include <filesystem>
#include <thread>

#include "morphocad/io.hpp"
#include "morphocad/pipeline.hpp"
#include "morphocad/selection.hpp"
#include "service.hpp"
#include "shapes.hpp"

// After Eigen: resolv.h defines _res.
#include <httplib.h>

using namespace morphocad;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

const fs::path kFixture = fs::path(MORPHOCAD_DATA_DIR) / "birads_counts.json";

io::SavedModel combined_model() {
  io::SavedModel m;
  m.id = "combo";
  m.mode = selection::Mode::Combined;
  m.model.feature_ids = {31, 5};
  m.model.coefficients = Eigen::Vector2d(1.5, 0.5);
  m.model.intercept = -0.5;
  m.model.standardizer.mean = Eigen::Vector2d(5.0, 16.0);
  m.model.standardizer.scale = Eigen::Vector2d(1.5, 4.0);
  m.cutoffs = {0.5, 0.05};
  return m;
}

json contour_json(const std::vector<geometry::Point2>& pts) {
  json out = json::array();
  for (const auto& p : pts) out.push_back({p.x, p.y});
  return out;
}

json lesion(const std::string& birads = "") {
  json body = {{"contour", contour_json(testsupport::ellipse_points(100, 100, 50, 30, 20, 256))}, {"spacingMm", 0.1}};
  if (!birads.empty()) body["birads"] = birads;
  return body;
}

class ServiceTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    root_ = fs::temp_directory_path() / "morphocad_service_test";
    fs::remove_all(root_);
    fs::create_directories(root_ / "models");
    fs::create_directories(root_ / "data");
    io::write_model(root_ / "models" / "combo.json", combined_model());
    fs::copy_file(kFixture, root_ / "data" / "counts.json");
    io::write_mask_png(root_ / "data" / "disk.png", testsupport::disk_grid(96, 96, 48, 48, 30));

    selection::StudyConfig config;
    config.mode = selection::Mode::BiradsOnly;
    config.bootstrap = 50;
    const auto study = selection::run_study(io::load_birads_fixture(kFixture), config);
    pipeline::write_study(root_ / "models" / "birads", pipeline::saved_model_from_study("birads", study), study);

    service_ = new service::Service({root_ / "models", root_ / "data"});
    port_ = service_->bind("127.0.0.1", 0);
    thread_ = new std::thread([] { service_->serve(); });
    service_->wait_until_ready();
  }

  static void TearDownTestSuite() {
    service_->stop();
    thread_->join();
    delete thread_;
    delete service_;
    fs::remove_all(root_);
  }

  static httplib::Result post(const std::string& path, const json& body) {
    httplib::Client client("127.0.0.1", port_);
    return client.Post(path, body.dump(), "application/json");
  }

  static httplib::Result get(const std::string& path) {
    httplib::Client client("127.0.0.1", port_);
    return client.Get(path);
  }

  static json body_of(const httplib::Result& r) { return json::parse(r->body); }

  static inline fs::path root_;
  static inline service::Service* service_ = nullptr;
  static inline std::thread* thread_ = nullptr;
  static inline int port_ = 0;
};

}  // namespace

TEST_F(ServiceTest, HealthReportsLoadedModels) {
  const auto r = get("/health");
  ASSERT_TRUE(r);
  EXPECT_EQ(r->status, 200);
  EXPECT_GE(body_of(r).at("models").get<int>(), 2);
}

TEST_F(ServiceTest, ExtractUnitSquare) {
  const json body = {{"contour", contour_json(testsupport::unit_square())}, {"spacingMm", 1.0}};
  const auto r = post("/extract", body);
  ASSERT_TRUE(r);
  ASSERT_EQ(r->status, 200) << r->body;
  const auto fv = body_of(r).at("featureVector");
  EXPECT_EQ(fv.size(), 30u);
  EXPECT_DOUBLE_EQ(fv.at("extent").get<double>(), 1.0);
  EXPECT_DOUBLE_EQ(fv.at("dwr").get<double>(), 1.0);
}

TEST_F(ServiceTest, ExtractFromMaskFile) {
  const auto r = post("/extract", {{"mask", "disk.png"}, {"spacingMm", 0.1}});
  ASSERT_TRUE(r);
  ASSERT_EQ(r->status, 200) << r->body;
  EXPECT_NEAR(body_of(r).at("featureVector").at("circularity").get<double>(), 4.0 * M_PI, 0.5);
}

TEST_F(ServiceTest, ExtractRejectsPathsOutsideTheDataRoot) {
  const auto r = post("/extract", {{"mask", "../models/combo.json"}, {"spacingMm", 0.1}});
  ASSERT_TRUE(r);
  EXPECT_EQ(r->status, 400);
  EXPECT_EQ(body_of(r).at("error").at("kind"), "schema");
}

TEST_F(ServiceTest, BadGeometryIs400) {
  const json body = {{"contour", json::array({{0, 0}, {1, 0}})}, {"spacingMm", 1.0}};
  const auto r = post("/extract", body);
  ASSERT_TRUE(r);
  EXPECT_EQ(r->status, 400);
  EXPECT_EQ(body_of(r).at("error").at("kind"), "invalid-contour");

  const auto garbage = [] {
    httplib::Client client("127.0.0.1", port_);
    return client.Post("/score", "{not json", "application/json");
  }();
  ASSERT_TRUE(garbage);
  EXPECT_EQ(garbage->status, 400);
  EXPECT_EQ(body_of(garbage).at("error").at("kind"), "parse");
}

TEST_F(ServiceTest, CombinedModelWithoutBiradsIs422) {
  json body = lesion();
  body["modelId"] = "combo";
  const auto r = post("/score", body);
  ASSERT_TRUE(r);
  EXPECT_EQ(r->status, 422);
  EXPECT_EQ(body_of(r).at("error").at("kind"), "missing-birads");
}

TEST_F(ServiceTest, UnknownModelIs404) {
  json body = lesion("4a");
  body["modelId"] = "nope";
  const auto r = post("/score", body);
  ASSERT_TRUE(r);
  EXPECT_EQ(r->status, 404);
  EXPECT_EQ(body_of(r).at("error").at("kind"), "not-found");
}

TEST_F(ServiceTest, ScoreIsDeterministicAndMatchesTheLibrary) {
  json body = lesion("4b");
  body["modelId"] = "combo";
  const auto first = post("/score", body);
  const auto second = post("/score", body);
  ASSERT_TRUE(first);
  ASSERT_TRUE(second);
  ASSERT_EQ(first->status, 200) << first->body;
  EXPECT_EQ(first->body, second->body);

  const auto expected = pipeline::score_json(
      pipeline::score_lesion(combined_model(), pipeline::parse_lesion_input(body, root_ / "data")));
  EXPECT_EQ(body_of(first), expected);
  const double p = body_of(first).at("probability").get<double>();
  EXPECT_GT(p, 0.0);
  EXPECT_LT(p, 1.0);
}

TEST_F(ServiceTest, ListsModelsWithRocAvailability) {
  const auto r = get("/models");
  ASSERT_TRUE(r);
  ASSERT_EQ(r->status, 200);
  const auto models = body_of(r).at("models");
  std::map<std::string, json> by_id;
  for (const auto& m : models) by_id[m.at("id")] = m;
  ASSERT_TRUE(by_id.count("combo"));
  ASSERT_TRUE(by_id.count("birads"));
  EXPECT_TRUE(by_id["combo"].at("needsBirads").get<bool>());
  EXPECT_FALSE(by_id["combo"].at("hasRoc").get<bool>());
  EXPECT_TRUE(by_id["birads"].at("hasRoc").get<bool>());
  EXPECT_EQ(by_id["birads"].at("mode"), "birads-only");
  EXPECT_EQ(by_id["combo"].at("features")[0].at("name"), "birads_code");
}

TEST_F(ServiceTest, RocOfAStoredStudy) {
  const auto r = get("/roc/birads");
  ASSERT_TRUE(r);
  ASSERT_EQ(r->status, 200);
  const auto roc = body_of(r);
  EXPECT_EQ(roc.at("studyId"), "birads");
  EXPECT_DOUBLE_EQ(roc.at("auc").get<double>(), 2265.0 / 2400.0);
  EXPECT_EQ(roc.at("positives"), 32);
  EXPECT_EQ(roc.at("negatives"), 75);
  const auto& pts = roc.at("points");
  ASSERT_GE(pts.size(), 2u);
  EXPECT_TRUE(pts.front().at("threshold").is_null());
  EXPECT_DOUBLE_EQ(pts.back().at("tpr").get<double>(), 1.0);
  EXPECT_DOUBLE_EQ(pts.back().at("fpr").get<double>(), 1.0);

  const auto missing = get("/roc/combo");
  ASSERT_TRUE(missing);
  EXPECT_EQ(missing->status, 404);
}

TEST_F(ServiceTest, StudyJobRegistersItsModelAndRoc) {
  const auto start = post("/studies", {{"fixture", "counts.json"}, {"mode", "birads-only"}, {"bootstrap", 20},
                                       {"id", "job1"}});
  ASSERT_TRUE(start);
  ASSERT_EQ(start->status, 202) << start->body;
  EXPECT_EQ(body_of(start).at("studyId"), "job1");

  json status;
  for (int i = 0; i < 200; ++i) {
    const auto r = get("/studies/job1");
    ASSERT_TRUE(r);
    status = body_of(r);
    if (status.at("status") == "done" || status.at("status") == "failed") break;
    std::this_thread::sleep_for(std::chrono::milliseconds(50));
  }
  ASSERT_EQ(status.at("status"), "done") << status.dump();
  EXPECT_EQ(status.at("report").at("chosen_subset").at("ids"), json::array({31}));
  EXPECT_TRUE(fs::exists(root_ / "models" / "job1" / "model.json"));

  const auto roc = get("/roc/job1");
  ASSERT_TRUE(roc);
  EXPECT_EQ(roc->status, 200);
  json body = lesion("3");
  body["modelId"] = "job1";
  const auto low = post("/score", body);
  body["birads"] = "5";
  const auto high = post("/score", body);
  ASSERT_EQ(low->status, 200);
  EXPECT_LT(body_of(low).at("probability").get<double>(), body_of(high).at("probability").get<double>());

  const auto again = post("/studies", {{"fixture", "counts.json"}, {"id", "job1"}});
  ASSERT_TRUE(again);
  EXPECT_EQ(again->status, 409);
  EXPECT_EQ(body_of(again).at("error").at("kind"), "duplicate-id");
}

TEST_F(ServiceTest, StudyRequestValidation) {
  const auto none = post("/studies", json::object());
  ASSERT_TRUE(none);
  EXPECT_EQ(none->status, 400);
  const auto two = post("/studies", {{"fixture", "a.json"}, {"features", "b.csv"}});
  EXPECT_EQ(two->status, 400);
  const auto bad_id = post("/studies", {{"fixture", "counts.json"}, {"id", "a/b"}});
  EXPECT_EQ(bad_id->status, 400);
  const auto bad_mode = post("/studies", {{"fixture", "counts.json"}, {"mode", "magic"}});
  EXPECT_EQ(bad_mode->status, 400);
  const auto unknown = get("/studies/nope");
  EXPECT_EQ(unknown->status, 404);
}

TEST_F(ServiceTest, FailedStudyReportsItsError) {
  const auto start = post("/studies", {{"fixture", "absent.json"}, {"id", "broken"}});
  ASSERT_TRUE(start);
  ASSERT_EQ(start->status, 202);
  service_->wait_for_studies();
  const auto status = body_of(get("/studies/broken"));
  EXPECT_EQ(status.at("status"), "failed");
  EXPECT_EQ(status.at("error").at("kind"), "missing-file");
}

TEST(ServiceErrors, StatusMapping) {
  EXPECT_EQ(service::http_status(ErrorKind::NotFound), 404);
  EXPECT_EQ(service::http_status(ErrorKind::MissingBirads), 422);
  EXPECT_EQ(service::http_status(ErrorKind::InvalidContour), 400);
  EXPECT_EQ(service::http_status(ErrorKind::Io), 500);
  EXPECT_EQ(service::error_json("schema", "x").dump(), R"({"error":{"kind":"schema","message":"x"}})");
}
