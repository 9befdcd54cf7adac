// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "datasets.hpp"
#include "morphocad/eval.hpp"
#include "morphocad/features.hpp"
#include "morphocad/geometry.hpp"
#include "morphocad/io.hpp"
#include "morphocad/selection.hpp"
#include "morphocad/stats.hpp"
#include "morphocad/synth.hpp"
#include "oracles.hpp"
#include "shapes.hpp"

using namespace morphocad;
using features::FeatureId;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

struct Criterion {
  const char* name;
  double budget_s;
  std::function<Outcome()> run;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// Failing sub-checks accumulate into the detail line.
class Checks {
 public:
  void expect(bool ok, const std::string& what) {
    if (!ok) {
      pass_ = false;
      if (failures_++ < 4) failed_ += (failed_.empty() ? "" : "; ") + what;
    }
  }
  Outcome done(const std::string& summary) const {
    if (pass_) return {true, summary};
    return {false, summary + " | " + failed_ + (failures_ > 4 ? fmt(" (+%d more)", failures_ - 4) : "")};
  }

 private:
  bool pass_ = true;
  int failures_ = 0;
  std::string failed_;
};

struct CountTable {
  eval::Dataset data;
  std::vector<double> scores;
};

CountTable count_table() {
  CountTable t{io::load_birads_fixture(std::string(MORPHOCAD_DATA_DIR) + "/birads_counts.json"), {}};
  t.scores = t.data.column(features::kBiradsFeature);
  return t;
}

Outcome count_table_full_sensitivity() {
  const auto t = count_table();
  const auto m = eval::full_sensitivity_cutoff(t.scores, t.data.labels);
  Checks c;
  c.expect(m.cutoff == features::encode_birads(features::BiradsCategory::C4a),
           fmt("cutoff %.3f is not the category-3 threshold", m.cutoff));
  c.expect(std::fabs(eval::round1(m.sensitivity) - 100.0) <= 0.1, "sensitivity");
  c.expect(std::fabs(eval::round1(m.specificity) - 54.7) <= 0.1, "specificity");
  c.expect(std::fabs(eval::round1(m.accuracy) - 68.2) <= 0.1, "accuracy");
  return c.done(fmt("sens %.1f spec %.1f acc %.1f", eval::round1(m.sensitivity), eval::round1(m.specificity),
                    eval::round1(m.accuracy)));
}

Outcome count_table_auc() {
  const auto t = count_table();
  const double trapezoid = eval::roc_and_auc(t.scores, t.data.labels).auc;
  const double pairs = testsupport::pair_count_auc(t.scores, t.data.labels);
  Checks c;
  c.expect(std::fabs(pairs - 0.9665) <= 0.0005, "pair-count AUC off 0.9665");
  c.expect(trapezoid == pairs, "trapezoid != pair count");
  c.expect(eval::rank_auc(t.scores, t.data.labels) == pairs, "rank AUC != pair count");
  return c.done(fmt("trapezoid %.6f pair-count %.6f", trapezoid, pairs));
}

Outcome count_table_avoided() {
  const auto t = count_table();
  const double cutoff = eval::full_sensitivity_cutoff(t.scores, t.data.labels).cutoff;
  const auto avoided = eval::avoided_biopsies(t.scores, t.data.labels, t.data.birads, cutoff);
  int total = 0;
  for (int n : avoided) total += n;
  const int cat3 = avoided[static_cast<int>(features::BiradsCategory::C3)];
  Checks c;
  c.expect(total == 41, "total avoided");
  c.expect(cat3 == 41, "avoided outside category 3");
  return c.done(fmt("avoided %d (category 3: %d)", total, cat3));
}

Outcome geometry_oracles() {
  Checks c;
  const double a = 200, b = 100;
  const double ref_perimeter = testsupport::ramanujan_perimeter(a, b);
  double worst_area = 0, worst_perimeter = 0, worst_ratio = 0, worst_round = 0, worst_enc = 0;
  for (double theta : {0.0, 30.0, 75.0}) {
    const auto mask = geometry::BinaryMask::from_grid(testsupport::ellipse_grid(512, 512, 256, 256, a, b, theta));
    const auto m = geometry::polygon_metrics(geometry::trace_boundary(mask));
    const auto e = features::ellipse_features(features::plane_from_mask(mask));
    worst_area = std::max(worst_area, std::fabs(m.area / (std::numbers::pi * a * b) - 1));
    worst_perimeter = std::max(worst_perimeter, std::fabs(m.perimeter / ref_perimeter - 1));
    worst_ratio = std::max(worst_ratio, std::fabs(e.long_short_ratio / 2.0 - 1));
    worst_round = std::max(worst_round, std::fabs(e.roundness / 0.5 - 1));
    worst_enc = std::max(worst_enc, std::fabs(e.enc - 1));
  }
  c.expect(worst_area <= 0.01, "area");
  c.expect(worst_perimeter <= 0.015, "perimeter");
  c.expect(worst_ratio <= 0.02, "long/short ratio");
  c.expect(worst_round <= 0.02, "roundness");
  c.expect(worst_enc <= 0.02, "ENC");

  const auto disk = geometry::BinaryMask::from_grid(testsupport::disk_grid(512, 512, 256, 256, 200), 0.1);
  const double circ = features::extract_plane(features::plane_from_mask(disk))[FeatureId::Circularity];
  const double circ_err = std::fabs(circ / (4 * std::numbers::pi) - 1);
  c.expect(circ_err <= 0.02, "circularity");
  return c.done(fmt("max rel err: area %.4f perim %.4f ratio %.4f round %.4f enc %.4f circ %.4f", worst_area,
                    worst_perimeter, worst_ratio, worst_round, worst_enc, circ_err));
}

bool rotation_exempt(int id) {
  return id == static_cast<int>(FeatureId::Orientation) || id == static_cast<int>(FeatureId::Dwr) ||
         id == static_cast<int>(FeatureId::AspectRatio);
}

bool scale_exempt(int id) {
  return id == static_cast<int>(FeatureId::LesionSize) || id == static_cast<int>(FeatureId::NormalizedResidualValue);
}

// Reciprocal pairs are two independently rounded quotients.
constexpr double kReciprocalUlps = 4 * std::numeric_limits<double>::epsilon();

Outcome invariance_suite() {
  Checks c;
  int shapes = 0;
  double worst_scale = 0, worst_reciprocal = 0, worst_orientation = 0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    for (std::uint64_t k = 0; k < 20; ++k) {
      const std::uint64_t key = seed * 1000 + k;
      const auto pts = testsupport::random_lesion(key, 0, 0, 45);
      const geometry::Contour base(pts, 0.1);
      const auto ref = features::extract_plane(base);
      ++shapes;

      const auto moved = features::extract_plane(geometry::translated(base, {300 + double(k), 217 - double(seed)}));
      c.expect(moved.values == ref.values, fmt("translation shape %llu", (unsigned long long)key));

      const auto mask = geometry::rasterize_local(base).mask;
      const auto ma = features::extract_plane(features::plane_from_mask(mask));
      const auto mb = features::extract_plane(features::plane_from_mask(geometry::rotate90(mask)));
      for (int id = 1; id <= features::kMorphologicalCount; ++id) {
        if (rotation_exempt(id)) continue;
        c.expect(ma.at(id) == mb.at(id), fmt("rotation %s shape %llu", std::string(features::feature_name(id)).c_str(),
                                             (unsigned long long)key));
      }
      const double dwr = std::fabs(ma[FeatureId::Dwr] * mb[FeatureId::Dwr] - 1);
      const double aspect = std::fabs(ma[FeatureId::AspectRatio] * mb[FeatureId::AspectRatio] - 1);
      const double orient =
          std::fabs(std::remainder(mb[FeatureId::Orientation] - ma[FeatureId::Orientation] - 90.0, 180.0));
      worst_reciprocal = std::max({worst_reciprocal, dwr, aspect});
      worst_orientation = std::max(worst_orientation, orient);
      c.expect(dwr <= kReciprocalUlps && aspect <= kReciprocalUlps, "rotation swaps dwr/aspect ratio");
      c.expect(orient <= 1e-12, "rotation shifts orientation by 90");

      for (const auto& v : {ref, ma}) {
        const double prod = std::fabs(v[FeatureId::Solidity] * v[FeatureId::OverlapRatio] - 1);
        worst_reciprocal = std::max(worst_reciprocal, prod);
        c.expect(prod <= kReciprocalUlps, "solidity * overlap ratio");
      }

      for (double s : {0.5, 2.0}) {
        std::vector<geometry::Point2> q = pts;
        for (auto& p : q) p = {p.x * s + 400, p.y * s + 400};
        const auto v = features::extract_plane(geometry::Contour(q, 0.1));
        for (int id = 1; id <= features::kMorphologicalCount; ++id) {
          if (scale_exempt(id)) continue;
          const double err = std::fabs(v.at(id) - ref.at(id)) / std::max(std::fabs(ref.at(id)), 1.0);
          worst_scale = std::max(worst_scale, err);
          c.expect(err <= 0.02, fmt("scale %.1f %s shape %llu", s, std::string(features::feature_name(id)).c_str(),
                                    (unsigned long long)key));
        }
      }
    }
  }
  return c.done(fmt("%d shapes; scale err %.4f, reciprocal err %.1e, orientation err %.1e", shapes, worst_scale,
                    worst_reciprocal, worst_orientation));
}

Outcome auc_equivalence() {
  std::mt19937 rng(2468);
  std::uniform_int_distribution<int> size(2, 40), level(0, 6), coin(0, 1);
  Checks c;
  int tied = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const int n = size(rng);
    std::vector<double> scores;
    std::vector<int> labels;
    for (int i = 0; i < n; ++i) {
      scores.push_back(level(rng) * 0.125);
      labels.push_back(coin(rng));
    }
    labels[0] = 0;
    labels[1] = 1;
    tied += std::set<double>(scores.begin(), scores.end()).size() < scores.size();
    const double pairs = testsupport::pair_count_auc(scores, labels);
    c.expect(eval::roc_and_auc(scores, labels).auc == pairs, fmt("trial %d trapezoid", trial));
    c.expect(eval::rank_auc(scores, labels) == pairs, fmt("trial %d rank", trial));
  }
  return c.done(fmt("200 instances, %d with ties", tied));
}

// Groups of n around means 0, gap, 2 gap with within-group mean square 0.625.
std::vector<std::vector<double>> spaced_groups(double gap, int n = 5) {
  std::vector<std::vector<double>> groups(3);
  for (int g = 0; g < 3; ++g) {
    for (int i = 0; i < n; ++i) groups[g].push_back(g * gap + (-1.0 + 0.5 * i));
  }
  return groups;
}

Outcome anova_tukey() {
  Checks c;
  const auto r = stats::one_way_anova({{1, 2, 3}, {2, 3, 4}, {3, 4, 5}});
  c.expect(r.f == 3.0, "F != 3 exactly");
  c.expect(std::fabs(r.p - 0.125) <= 1e-9, "p != 0.125");

  // Studentized range q(0.05; 3, 12) = 3.773 from published tables; HSD =
  // q sqrt(MSE / n) = 3.773 sqrt(0.625 / 5).
  const double tabulated = 3.773;
  const double hsd = tabulated * std::sqrt(0.625 / 5);
  const auto below = stats::tukey_hsd(spaced_groups(0.98 * hsd));
  const auto above = stats::tukey_hsd(spaced_groups(1.02 * hsd));
  c.expect(std::fabs(below.q_critical - tabulated) <= 5e-4, "q critical off the table");
  c.expect(!below.significant[0][1] && !below.significant[1][2] && below.significant[0][2],
           "gap just below HSD: only the outer pair may differ");
  c.expect(above.significant[0][1] && above.significant[1][2] && above.significant[0][2],
           "gap just above HSD: every pair differs");
  return c.done(fmt("F %.6f p %.10f q(3,12) %.4f", r.f, r.p, below.q_critical));
}

selection::StudyConfig selection_config(selection::Mode mode) {
  selection::StudyConfig c;
  c.mode = mode;
  c.bootstrap = 200;
  c.seed = 17;
  c.candidates = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  return c;
}

Outcome selection_properties() {
  Checks c;
  const auto data = testsupport::informative_dataset(45, 35, 2024);
  const auto config = selection_config(selection::Mode::Morphological);
  const auto study = selection::run_study(data, config);
  const auto& steps = study.trace.steps;
  for (std::size_t k = 1; k < steps.size(); ++k) {
    const auto& prev = steps[k - 1].subset;
    const auto& cur = steps[k].subset;
    const bool nested = cur.size() == prev.size() + 1 && std::equal(prev.begin(), prev.end(), cur.begin()) &&
                        std::find(prev.begin(), prev.end(), cur.back()) == prev.end();
    c.expect(nested, fmt("step %zu not a strict extension", k + 1));
  }
  const auto again = selection::run_study(data, config);
  c.expect(io::to_json(study.trace).dump() == io::to_json(again.trace).dump(), "trace JSON differs across runs");

  auto combined_data = data;
  for (std::size_t i = 0; i < combined_data.size(); ++i) {
    combined_data.rows[i][features::kBiradsFeature - 1] = combined_data.labels[i] ? 5 + (i % 3) : 3 + (i % 3);
  }
  auto combined = selection_config(selection::Mode::Combined);
  int evaluated = 0, with_birads = 0;
  combined.on_evaluate = [&](std::span<const int> subset) {
    ++evaluated;
    with_birads += std::find(subset.begin(), subset.end(), features::kBiradsFeature) != subset.end();
  };
  selection::run_study(combined_data, combined);
  c.expect(evaluated > 0 && evaluated == with_birads, "combined subset without BI-RADS");

  const auto best = testsupport::exhaustive_best(data, config.candidates);
  const double chosen = steps[study.reduction.chosen_step - 1].auc;
  c.expect(chosen >= best.first - 0.02, "chosen AUC more than 0.02 below exhaustive best");
  return c.done(fmt("%zu nested steps; %d/%d combined subsets hold BI-RADS; chosen %.4f vs exhaustive %.4f",
                    steps.size(), with_birads, evaluated, chosen, best.first));
}

Outcome end_to_end() {
  Checks c;
  std::string summary;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto synthetic = synth::make_dataset(75, 32, seed);
    const auto data = io::extract_dataset(synthetic.records);
    selection::StudyConfig config;
    config.seed = seed;
    config.mode = selection::Mode::Morphological;
    const auto morph = selection::run_study(data, config);
    config.mode = selection::Mode::Combined;
    const auto comb = selection::run_study(data, config);
    const double spec_m = morph.full_sensitivity.specificity, spec_c = comb.full_sensitivity.specificity;
    c.expect(comb.roc.auc >= morph.roc.auc, fmt("seed %llu AUC", (unsigned long long)seed));
    c.expect(spec_c >= spec_m, fmt("seed %llu full-sensitivity specificity", (unsigned long long)seed));
    summary += fmt("%sseed %llu auc %.3f/%.3f spec %.1f/%.1f", summary.empty() ? "" : "; ", (unsigned long long)seed,
                   morph.roc.auc, comb.roc.auc, spec_m, spec_c);
  }
  return c.done("morph/combined " + summary);
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {"birads-full-sensitivity", 1, count_table_full_sensitivity},
      {"birads-auc-oracle", 1, count_table_auc},
      {"birads-avoided-biopsies", 1, count_table_avoided},
      {"geometry-feature-oracles", 10, geometry_oracles},
      {"invariance-suite", 120, invariance_suite},
      {"auc-equivalence", 60, auc_equivalence},
      {"anova-tukey-oracle", 10, anova_tukey},
      {"selection-properties", 300, selection_properties},
      {"end-to-end-synthetic", 600, end_to_end},
  };
  int failed = 0;
  for (const auto& cr : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = cr.run();
    } catch (const std::exception& e) {
      out = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (secs > cr.budget_s) {
      out.pass = false;
      out.detail += fmt(" | over the %.0f s budget", cr.budget_s);
    }
    failed += !out.pass;
    std::printf("%s %s: %s [%.2f s]\n", out.pass ? "PASS" : "FAIL", cr.name, out.detail.c_str(), secs);
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
