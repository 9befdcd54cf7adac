#include <benchmark/benchmark.h>

#include <random>

#include "morphocad/eval.hpp"
#include "morphocad/features.hpp"
#include "morphocad/geometry.hpp"
#include "morphocad/io.hpp"
#include "morphocad/selection.hpp"
#include "morphocad/synth.hpp"

using namespace morphocad;

namespace {

synth::ShapeSpec spiculated(double r0) {
  synth::ShapeSpec s;
  s.kind = synth::ShapeKind::Spiculated;
  s.a = r0 * 1.1;
  s.b = r0;
  s.r0 = r0;
  s.center_x = s.center_y = 2 * r0;
  s.spicules = 12;
  s.spicule_amplitude = 0.2;
  s.noise = 0.02;
  s.seed = 7;
  return s;
}

geometry::Contour lesion(double r0) {
  const auto shape = synth::make_shape(spiculated(r0));
  return geometry::Contour(std::vector<geometry::Point2>(shape.points().begin(), shape.points().end()), 0.1);
}

const eval::Dataset& synthetic_features() {
  static const eval::Dataset data = io::extract_dataset(synth::make_dataset(75, 32, 1).records);
  return data;
}

}  // namespace

static void BM_MakeShape(benchmark::State& state) {
  const auto spec = spiculated(60);
  for (auto _ : state) benchmark::DoNotOptimize(synth::make_shape(spec));
}
BENCHMARK(BM_MakeShape);

static void BM_ExtractContour(benchmark::State& state) {
  const auto contour = lesion(static_cast<double>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(features::extract_plane(features::plane_from_contour(contour)));
}
BENCHMARK(BM_ExtractContour)->Arg(30)->Arg(60)->Arg(120)->Unit(benchmark::kMillisecond);

static void BM_ExtractMask(benchmark::State& state) {
  const auto mask = geometry::rasterize_local(lesion(60)).mask;
  for (auto _ : state) benchmark::DoNotOptimize(features::extract_plane(features::plane_from_mask(mask)));
}
BENCHMARK(BM_ExtractMask)->Unit(benchmark::kMillisecond);

static void BM_RasterizeAndTrace(benchmark::State& state) {
  const auto contour = lesion(60);
  for (auto _ : state) {
    const auto mask = geometry::rasterize_local(contour).mask;
    benchmark::DoNotOptimize(geometry::trace_boundary(mask));
  }
}
BENCHMARK(BM_RasterizeAndTrace);

static void BM_RocAndAuc(benchmark::State& state) {
  std::mt19937 rng(3);
  std::normal_distribution<double> noise(0, 1);
  const auto n = static_cast<std::size_t>(state.range(0));
  std::vector<double> scores(n);
  std::vector<int> labels(n);
  for (std::size_t i = 0; i < n; ++i) {
    labels[i] = static_cast<int>(i % 3 == 0);
    scores[i] = noise(rng) + labels[i];
  }
  for (auto _ : state) benchmark::DoNotOptimize(eval::roc_and_auc(scores, labels));
}
BENCHMARK(BM_RocAndAuc)->Arg(107)->Arg(10000);

static void BM_Loocv(benchmark::State& state) {
  const auto& data = synthetic_features();
  std::vector<int> subset;
  for (int id = 1; id <= state.range(0); ++id) subset.push_back(id);
  for (auto _ : state) benchmark::DoNotOptimize(eval::loocv_scores(data, subset, {}));
}
BENCHMARK(BM_Loocv)->Arg(1)->Arg(5)->Arg(10)->Unit(benchmark::kMillisecond);

static void BM_BootstrapStd(benchmark::State& state) {
  const auto& data = synthetic_features();
  const auto scores = data.column(static_cast<int>(features::FeatureId::Spiculation));
  for (auto _ : state) benchmark::DoNotOptimize(eval::bootstrap_auc_std(scores, data.labels, 1000, 1));
}
BENCHMARK(BM_BootstrapStd)->Unit(benchmark::kMillisecond);

static void BM_Study(benchmark::State& state) {
  const auto& data = synthetic_features();
  selection::StudyConfig config;
  config.mode = selection::Mode::Combined;
  config.bootstrap = 200;
  for (auto _ : state) benchmark::DoNotOptimize(selection::run_study(data, config));
}
BENCHMARK(BM_Study)->Unit(benchmark::kSecond)->Iterations(1);
BENCHMARK_MAIN();
