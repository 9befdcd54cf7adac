#pragma once

#include <Eigen/Dense>
#include <array>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace morphocad::model {

/// Per-column z-scoring with the population standard deviation.
struct Standardizer {
  Eigen::VectorXd mean;
  Eigen::VectorXd scale;

  /// ErrorKind::Unfittable when a column has zero variance.
  static Standardizer fit(const Eigen::MatrixXd& x);
  Eigen::MatrixXd apply(const Eigen::MatrixXd& x) const;
  Eigen::VectorXd apply_row(std::span<const double> row) const;
};

struct FitOptions {
  double lambda = 1e-6;
  double tolerance = 1e-8;
  int max_iterations = 500;
};

/// Linear predictor in raw feature units: eta = intercept + weights . x.
struct RawLinear {
  double intercept = 0.0;
  Eigen::VectorXd weights;
};

struct TrainedModel {
  std::vector<int> feature_ids;
  Eigen::VectorXd coefficients;  // on standardized features
  double intercept = 0.0;
  Standardizer standardizer;
  double lambda = 0.0;
  bool converged = false;
  int iterations = 0;
  double gradient_norm = 0.0;

  RawLinear raw() const;
  /// Probability of the positive class for one raw feature row (same column
  /// order as feature_ids).
  double predict_proba(std::span<const double> row) const;
  double predict_linear(std::span<const double> row) const;
};

/// w_c = N / (2 N_c) for c in {0, 1}.
std::array<double, 2> class_weights(std::span<const int> labels);

/// Maximizes (1 / sum w) sum_i w_i loglik_i - (lambda / 2) |beta|^2 over the
/// standardized coefficients (intercept unpenalized) with damped Newton
/// steps. `warm_start`, when given, seeds the optimizer in raw units.
TrainedModel fit(const Eigen::MatrixXd& x, std::span<const int> labels, const FitOptions& options,
                 std::vector<int> feature_ids = {},
                 const std::optional<RawLinear>& warm_start = std::nullopt);

/// Same objective with explicit per-sample weights.
TrainedModel fit_weighted(const Eigen::MatrixXd& x, std::span<const int> labels,
                          std::span<const double> weights, const FitOptions& options,
                          std::vector<int> feature_ids = {},
                          const std::optional<RawLinear>& warm_start = std::nullopt);

double logistic(double eta) noexcept;

}  // namespace morphocad::model
