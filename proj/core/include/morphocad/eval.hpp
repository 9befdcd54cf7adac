#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "morphocad/features.hpp"
#include "morphocad/model.hpp"

namespace morphocad::eval {

inline constexpr int kColumnCount = features::kBiradsFeature;

/// Lesion-level table: one row per lesion, columns indexed by feature id
/// (1..30 morphological, 31 coded BI-RADS). Missing morphological values are
/// NaN and only rejected when a subset actually uses them.
struct Dataset {
  std::vector<std::string> ids;
  std::vector<int> labels;
  std::vector<features::BiradsCategory> birads;
  std::vector<std::array<double, kColumnCount>> rows;

  /// ErrorKind::DuplicateId when `id` is already present.
  void add(std::string id, features::Label label, features::BiradsCategory category,
           const features::FeatureVector& values);
  /// Row without morphological values (BI-RADS-only fixtures).
  void add(std::string id, features::Label label, features::BiradsCategory category);

  std::size_t size() const noexcept { return ids.size(); }
  std::array<int, 2> class_counts() const noexcept;
  /// ErrorKind::Schema for unknown ids or non-finite values.
  Eigen::MatrixXd columns(std::span<const int> feature_ids) const;
  std::vector<double> column(int feature_id) const;
};

struct LoocvResult {
  std::vector<double> scores;      // aligned with dataset rows
  std::vector<int> fold_sizes;     // training-set size of each fold
  int unconverged_folds = 0;
};

/// Scores every lesion with a model trained on all other lesions. Training
/// rows are ordered by lesion id, so row order in the dataset does not change
/// any score. Folds are seeded from the full-data optimum.
LoocvResult loocv(const Dataset& data, std::span<const int> subset,
                  const model::FitOptions& options = {});
std::vector<double> loocv_scores(const Dataset& data, std::span<const int> subset,
                                 const model::FitOptions& options = {});

struct RocPoint {
  double fpr = 0.0;
  double tpr = 0.0;
  double threshold = 0.0;  // score >= threshold is called malignant
  int tp = 0;
  int fp = 0;
};

struct RocCurve {
  std::vector<RocPoint> points;  // first point has threshold +inf
  double auc = 0.0;
  int positives = 0;
  int negatives = 0;
  std::vector<double> scores;
  std::vector<int> labels;
};

/// ErrorKind::UndefinedAuc unless both classes are present.
RocCurve roc_and_auc(std::span<const double> scores, std::span<const int> labels);
/// Mann-Whitney statistic (wins + ties / 2) / (P N), computed by sorting.
double rank_auc(std::span<const double> scores, std::span<const int> labels);

struct BootstrapResult {
  std::vector<double> replicates;  // in replicate order
  double std = 0.0;                // sample standard deviation
};

inline constexpr int kDefaultBootstrap = 1000;

/// Lesion-level resampling with replacement; resamples that miss a class are
/// redrawn. Replicate b draws from its own stream keyed by (seed, b).
BootstrapResult bootstrap_auc(std::span<const double> scores, std::span<const int> labels,
                              int replicates = kDefaultBootstrap, std::uint64_t seed = 1);
double bootstrap_auc_std(std::span<const double> scores, std::span<const int> labels,
                         int replicates = kDefaultBootstrap, std::uint64_t seed = 1);

struct Confusion {
  int tp = 0;
  int fn = 0;
  int tn = 0;
  int fp = 0;
  int total() const noexcept { return tp + fn + tn + fp; }
};

struct MetricsReport {
  std::string policy;
  double cutoff = 0.0;
  Confusion counts;
  double sensitivity = 0.0;  // percent
  double specificity = 0.0;
  double accuracy = 0.0;
};

MetricsReport metrics_at(std::span<const double> scores, std::span<const int> labels, double cutoff,
                         std::string policy = "fixed");
/// ROC point closest to (0, 1); ties go to the higher sensitivity.
MetricsReport optimal_cutoff(const RocCurve& roc);
/// Cutoff at the lowest malignant score.
MetricsReport full_sensitivity_cutoff(std::span<const double> scores, std::span<const int> labels);

/// Percentages as printed in reports.
double round1(double percent) noexcept;

/// Benign lesions scored below `cutoff`, per BI-RADS category (index =
/// code - 1).
std::array<int, 8> avoided_biopsies(std::span<const double> scores, std::span<const int> labels,
                                    std::span<const features::BiradsCategory> birads, double cutoff);

}  // namespace morphocad::eval
