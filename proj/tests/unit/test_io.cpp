#include <gtest/gtest.h>

#include <filesystem>
#include <sstream>

#include "morphocad/error.hpp"
#include "morphocad/io.hpp"
#include "morphocad/selection.hpp"
#include "datasets.hpp"
#include "shapes.hpp"

using namespace morphocad;
using namespace morphocad::io;
using features::BiradsCategory;
using features::Label;
using geometry::Contour;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

class IoTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("morphocad_io_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  fs::path dir_;
};

ErrorKind kind_of(const std::function<void()>& f, std::string* message = nullptr) {
  try {
    f();
  } catch (const Error& e) {
    if (message) *message = e.what();
    return e.kind();
  }
  ADD_FAILURE() << "no error raised";
  return ErrorKind::Io;
}

json two_lesion_manifest() {
  return json::parse(R"({
    "schema_version": 1,
    "records": [
      {"id": "L1", "label": "benign", "birads": "3", "spacing_mm": 0.1,
       "plane_a": {"contour": "l1a.txt"}, "plane_b": {"mask": "l1b.png"}},
      {"id": "L2", "label": "malignant", "birads": "4c", "spacing_mm": 0.2,
       "plane_a": {"contour": "l2a.txt"}, "plane_b": {"contour": "l2b.txt"}}
    ]})");
}

void write_two_lesion_planes(const fs::path& dir) {
  using namespace testsupport;
  write_contour_text(dir / "l1a.txt", Contour(ellipse_points(100, 100, 40, 25, 15, 180)));
  write_mask_png(dir / "l1b.png", ellipse_grid(120, 100, 60, 50, 38, 26, 10));
  write_contour_text(dir / "l2a.txt", Contour(rose_points(90, 90, 40, 0.2, 5, 240)));
  write_contour_text(dir / "l2b.txt", Contour(circle_points(70, 70, 30, 64)));
}

}  // namespace

TEST(ContourText, ParsesCommentsAndBlankLines) {
  const auto c = parse_contour_text("# lesion\n0 0\n\n4 0  # corner\n4 3\n0 3\n", 0.5);
  ASSERT_EQ(c.size(), 4u);
  EXPECT_EQ(c.points()[2].x, 4.0);
  EXPECT_EQ(c.points()[2].y, 3.0);
  EXPECT_EQ(c.spacing(), 0.5);
}

TEST(ContourText, ReportsTheBadLine) {
  std::string msg;
  EXPECT_EQ(kind_of([] { parse_contour_text("0 0\n1 0\n1 x\n0 1\n"); }, &msg), ErrorKind::Parse);
  EXPECT_NE(msg.find("line 3"), std::string::npos) << msg;
  EXPECT_EQ(kind_of([] { parse_contour_text("0 0 0\n1 0\n1 1\n"); }), ErrorKind::Parse);
}

TEST_F(IoTest, ContourRoundTripIsExact) {
  const Contour c(testsupport::ellipse_points(10.125, -3.5, 7.3, 2.1, 33, 97));
  write_contour_text(dir_ / "c.txt", c);
  const auto back = read_contour_text(dir_ / "c.txt");
  ASSERT_EQ(back.size(), c.size());
  for (std::size_t i = 0; i < c.size(); ++i) {
    EXPECT_EQ(back.points()[i].x, c.points()[i].x);
    EXPECT_EQ(back.points()[i].y, c.points()[i].y);
  }
}

TEST_F(IoTest, MaskRoundTripIsExact) {
  const auto grid = testsupport::ellipse_grid(64, 48, 30, 22, 20, 12, 30);
  write_mask_png(dir_ / "m.png", grid);
  const auto mask = read_mask_png(dir_ / "m.png", 0.3);
  EXPECT_EQ(mask.grid(), grid);
  EXPECT_EQ(mask.spacing(), 0.3);
}

TEST_F(IoTest, MaskWithTwoComponentsIsATopologyError) {
  auto grid = testsupport::disk_grid(80, 60, 20, 30, 10);
  const auto other = testsupport::disk_grid(80, 60, 60, 30, 10);
  for (std::size_t i = 0; i < grid.cells.size(); ++i) grid.cells[i] |= other.cells[i];
  write_mask_png(dir_ / "two.png", grid);
  EXPECT_EQ(kind_of([&] { read_mask_png(dir_ / "two.png"); }), ErrorKind::Topology);

  auto doc = two_lesion_manifest();
  write_two_lesion_planes(dir_);
  doc["records"][0]["plane_b"] = {{"mask", "two.png"}};
  write_json(dir_ / "manifest.json", doc);
  std::string msg;
  EXPECT_EQ(kind_of([&] { load_manifest(dir_ / "manifest.json"); }, &msg), ErrorKind::Topology);
  EXPECT_NE(msg.find("record 'L1' plane B"), std::string::npos) << msg;
}

TEST_F(IoTest, MaskWithHoleIsFilled) {
  auto grid = testsupport::disk_grid(60, 60, 30, 30, 20);
  const auto hole = testsupport::disk_grid(60, 60, 30, 30, 5);
  for (std::size_t i = 0; i < grid.cells.size(); ++i) grid.cells[i] &= static_cast<std::uint8_t>(!hole.cells[i]);
  write_mask_png(dir_ / "hole.png", grid);
  EXPECT_EQ(read_mask_png(dir_ / "hole.png").grid(), testsupport::disk_grid(60, 60, 30, 30, 20));
}

TEST_F(IoTest, ManifestOfTwoLesions) {
  write_two_lesion_planes(dir_);
  write_json(dir_ / "manifest.json", two_lesion_manifest());
  ManifestSummary s;
  const auto records = load_manifest(dir_ / "manifest.json", &s);
  EXPECT_EQ(s.records, 2);
  EXPECT_EQ(s.benign, 1);
  EXPECT_EQ(s.malignant, 1);
  ASSERT_EQ(records.size(), 2u);
  EXPECT_EQ(records[0].id, "L1");
  EXPECT_EQ(records[1].birads, BiradsCategory::C4c);
  EXPECT_EQ(records[1].spacing_mm, 0.2);
  EXPECT_TRUE(std::holds_alternative<geometry::BinaryMask>(records[0].plane_b));
  const auto data = extract_dataset(records);
  EXPECT_EQ(data.size(), 2u);
  EXPECT_EQ(data.labels[1], 1);
}

TEST_F(IoTest, ManifestRoundTrip) {
  const auto m = parse_manifest(two_lesion_manifest());
  write_manifest(dir_ / "m.json", m);
  EXPECT_EQ(read_json(dir_ / "m.json"), two_lesion_manifest());
}

TEST_F(IoTest, ManifestErrorsNameTheRecord) {
  write_two_lesion_planes(dir_);
  auto doc = two_lesion_manifest();
  doc["records"][1]["id"] = "L1";
  write_json(dir_ / "dup.json", doc);
  EXPECT_EQ(kind_of([&] { load_manifest(dir_ / "dup.json"); }), ErrorKind::DuplicateId);

  doc = two_lesion_manifest();
  doc["records"][1]["plane_a"] = {{"contour", "missing.txt"}};
  write_json(dir_ / "missing.json", doc);
  std::string msg;
  EXPECT_EQ(kind_of([&] { load_manifest(dir_ / "missing.json"); }, &msg), ErrorKind::MissingFile);
  EXPECT_NE(msg.find("record 'L2' plane A"), std::string::npos) << msg;

  write_contour_text(dir_ / "short.txt", Contour(testsupport::circle_points(50, 50, 20, 12)));
  doc = two_lesion_manifest();
  doc["records"][0]["plane_a"] = {{"contour", "short.txt"}};
  write_json(dir_ / "short.json", doc);
  EXPECT_EQ(kind_of([&] { load_manifest(dir_ / "short.json"); }), ErrorKind::InvalidContour);

  doc = two_lesion_manifest();
  doc["records"][0]["birads"] = "7";
  EXPECT_EQ(kind_of([&] { parse_manifest(doc); }, &msg), ErrorKind::Parse);
  EXPECT_NE(msg.find("record 'L1'"), std::string::npos) << msg;
  doc = two_lesion_manifest();
  doc["records"][0]["spacing_mm"] = -1;
  EXPECT_EQ(kind_of([&] { parse_manifest(doc); }), ErrorKind::Units);
  doc = two_lesion_manifest();
  doc["records"][0]["plane_a"] = {{"contour", "a"}, {"mask", "b"}};
  EXPECT_EQ(kind_of([&] { parse_manifest(doc); }), ErrorKind::Schema);
  doc = two_lesion_manifest();
  doc["schema_version"] = 2;
  EXPECT_EQ(kind_of([&] { parse_manifest(doc); }), ErrorKind::Schema);
  EXPECT_EQ(kind_of([&] { load_manifest(dir_ / "nope.json"); }), ErrorKind::MissingFile);
}

TEST_F(IoTest, FeatureCsvRoundTripIsExact) {
  auto data = testsupport::informative_dataset(6, 5, 3);
  write_features_csv(dir_ / "f.csv", data);
  const auto back = read_features_csv(dir_ / "f.csv");
  ASSERT_EQ(back.size(), data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    EXPECT_EQ(back.ids[i], data.ids[i]);
    EXPECT_EQ(back.labels[i], data.labels[i]);
    EXPECT_EQ(back.birads[i], data.birads[i]);
    for (std::size_t f = 0; f < 31; ++f) {
      if (std::isnan(data.rows[i][f])) {
        EXPECT_TRUE(std::isnan(back.rows[i][f]));
      } else {
        EXPECT_EQ(back.rows[i][f], data.rows[i][f]);
      }
    }
  }
  std::ostringstream a, b;
  write_features_csv(a, data);
  write_features_csv(b, back);
  EXPECT_EQ(a.str(), b.str());
}

TEST(FeatureCsv, RejectsBadTables) {
  std::istringstream bad_header("id,label,birads,foo\n");
  EXPECT_EQ(kind_of([&] { read_features_csv(bad_header); }), ErrorKind::Schema);
  std::ostringstream out;
  write_features_csv(out, testsupport::informative_dataset(2, 2, 1));
  std::string text = out.str();
  text += "S999,benign,3,1\n";
  std::istringstream short_row(text);
  EXPECT_EQ(kind_of([&] { read_features_csv(short_row); }), ErrorKind::Parse);
  std::istringstream empty("");
  EXPECT_EQ(kind_of([&] { read_features_csv(empty); }), ErrorKind::Parse);
}

TEST(BiradsFixture, ShippedTableMatchesCounts) {
  const auto data = load_birads_fixture(fs::path(MORPHOCAD_DATA_DIR) / "birads_counts.json");
  ASSERT_EQ(data.size(), 107u);
  EXPECT_EQ(data.class_counts()[0], 75);
  EXPECT_EQ(data.class_counts()[1], 32);
  EXPECT_EQ(data.ids.front(), "T001");
  EXPECT_EQ(data.ids.back(), "T107");
  const auto reference = testsupport::birads_count_dataset();
  EXPECT_EQ(data.labels, reference.labels);
  EXPECT_EQ(data.birads, reference.birads);
  int c3 = 0;
  for (std::size_t i = 0; i < data.size(); ++i) c3 += data.birads[i] == BiradsCategory::C3;
  EXPECT_EQ(c3, 41);
}

TEST(BiradsFixture, LoocvAucOfTheCodedCategory) {
  const auto data = load_birads_fixture(fs::path(MORPHOCAD_DATA_DIR) / "birads_counts.json");
  const int birads = features::kBiradsFeature;
  const auto scores = eval::loocv_scores(data, std::span<const int>(&birads, 1), {});
  EXPECT_DOUBLE_EQ(eval::roc_and_auc(scores, data.labels).auc, 2265.0 / 2400.0);
  const auto full = eval::full_sensitivity_cutoff(scores, data.labels);
  EXPECT_EQ(full.sensitivity, 100.0);
  EXPECT_EQ(eval::round1(full.specificity), 54.7);
  EXPECT_EQ(eval::round1(full.accuracy), 68.2);
}

TEST(BiradsFixture, RejectsMismatchedRows) {
  auto doc = json::parse(R"({"schema_version":1,"categories":["3","4a"],"benign":[1],"malignant":[0,1]})");
  EXPECT_EQ(kind_of([&] { parse_birads_fixture(doc); }), ErrorKind::Schema);
  doc = json::parse(R"({"schema_version":1,"categories":["3"],"benign":[-1],"malignant":[0]})");
  EXPECT_EQ(kind_of([&] { parse_birads_fixture(doc); }), ErrorKind::Schema);
}

TEST_F(IoTest, ModelRoundTrip) {
  const auto data = testsupport::informative_dataset(20, 12, 4);
  const std::vector<int> ids{1, 2, 3};
  const auto x = data.columns(ids);
  SavedModel saved;
  saved.id = "m1";
  saved.mode = selection::Mode::Morphological;
  saved.model = model::fit(x, data.labels, {}, ids);
  saved.cutoffs = {0.41, 0.12};
  write_model(dir_ / "m.json", saved);
  const auto back = read_model(dir_ / "m.json");
  EXPECT_EQ(back.id, "m1");
  EXPECT_EQ(back.mode, saved.mode);
  EXPECT_EQ(back.model.feature_ids, ids);
  EXPECT_EQ(back.model.coefficients, saved.model.coefficients);
  EXPECT_EQ(back.model.intercept, saved.model.intercept);
  EXPECT_EQ(back.model.standardizer.mean, saved.model.standardizer.mean);
  EXPECT_EQ(back.model.standardizer.scale, saved.model.standardizer.scale);
  EXPECT_EQ(back.cutoffs.optimal, 0.41);
  EXPECT_FALSE(back.needs_birads());
  const std::array<double, 3> row{0.3, -1.0, 2.0};
  EXPECT_EQ(back.model.predict_proba(row), saved.model.predict_proba(row));
  const auto doc = read_json(dir_ / "m.json");
  EXPECT_EQ(doc["feature_names"][0], "angular_characteristics");

  auto broken = doc;
  broken["coefficients"] = json::array({1.0});
  EXPECT_EQ(kind_of([&] { saved_model_from_json(broken); }), ErrorKind::Schema);
  broken = doc;
  broken["standardizer"]["scale"][1] = 0.0;
  EXPECT_EQ(kind_of([&] { saved_model_from_json(broken); }), ErrorKind::Schema);
}

TEST(MetricsJson, RoundsPercentagesAndRoundTrips) {
  eval::MetricsReport r;
  r.policy = "optimal";
  r.cutoff = 0.5;
  r.counts = {30, 2, 66, 9};
  r.sensitivity = 93.75;
  r.specificity = 88.0;
  r.accuracy = 100.0 * 96 / 107;
  const auto doc = to_json(r);
  EXPECT_EQ(doc["sensitivity"], 93.8);
  EXPECT_EQ(doc["accuracy"], 89.7);
  const auto back = metrics_from_json(doc);
  EXPECT_EQ(back.counts.fp, 9);
  EXPECT_EQ(back.policy, "optimal");
  EXPECT_EQ(to_json(back), doc);
}

TEST(TraceJson, RoundTripIsByteIdentical) {
  const auto data = testsupport::informative_dataset(15, 10, 9);
  selection::StudyConfig c;
  c.bootstrap = 50;
  const std::vector<int> pool{1, 2, 3, 4};
  const auto trace = selection::forward_select(data, pool, {}, c);
  const auto doc = to_json(trace);
  const auto back = trace_from_json(doc);
  EXPECT_EQ(to_json(back).dump(), doc.dump());
  EXPECT_EQ(doc["steps"][0]["feature"], features::feature_name(trace.steps[0].chosen));
}

TEST(StudyReport, CarriesSubsetMetricsAndSeries) {
  const auto data = testsupport::birads_count_dataset();
  selection::StudyConfig c;
  c.mode = selection::Mode::BiradsOnly;
  c.bootstrap = 50;
  const auto report = study_report(selection::run_study(data, c));
  EXPECT_EQ(report["mode"], "birads-only");
  EXPECT_EQ(report["chosen_subset"]["ids"], json::array({31}));
  EXPECT_EQ(report["metrics"][1]["specificity"], 54.7);
  EXPECT_EQ(report["avoided_biopsies"]["total"], 41);
  EXPECT_EQ(report["avoided_biopsies"]["by_birads"]["3"], 41);
  EXPECT_EQ(report["series"].size(), 1u);
}

TEST(RocCsv, HeaderAndRows) {
  const auto roc = eval::roc_and_auc(std::vector<double>{0.1, 0.4, 0.35, 0.8}, std::vector<int>{0, 0, 1, 1});
  std::ostringstream out;
  write_roc_csv(out, roc);
  const std::string text = out.str();
  EXPECT_EQ(text.rfind("threshold,fpr,tpr\n", 0), 0u);
  EXPECT_EQ(static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n')), roc.points.size() + 1);
}

TEST(Labels, ParseAndPrint) {
  EXPECT_EQ(parse_label("malignant"), Label::Malignant);
  EXPECT_EQ(to_string(Label::Benign), "benign");
  EXPECT_EQ(kind_of([] { parse_label("cyst"); }), ErrorKind::Parse);
}

TEST_F(IoTest, TextHelpers) {
  write_text(dir_ / "a" / "b" / "c.txt", "hello");
  EXPECT_EQ(read_text(dir_ / "a" / "b" / "c.txt"), "hello");
  EXPECT_EQ(kind_of([&] { read_text(dir_ / "none.txt"); }), ErrorKind::MissingFile);
  write_text(dir_ / "bad.json", "{oops");
  EXPECT_EQ(kind_of([&] { read_json(dir_ / "bad.json"); }), ErrorKind::Parse);
  write_json(dir_ / "ok.json", json{{"a", 1}});
  EXPECT_EQ(read_text(dir_ / "ok.json"), "{\n  \"a\": 1\n}\n");
}
