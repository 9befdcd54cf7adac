#include "morphocad/model.hpp"

#include <cmath>
#include <string>

#include "morphocad/error.hpp"

namespace morphocad::model {
namespace {

double log1pexp(double eta) {
  return eta > 0.0 ? eta + std::log1p(std::exp(-eta)) : std::log1p(std::exp(eta));
}

void require_finite(const Eigen::MatrixXd& x) {
  if (!x.allFinite()) throw Error(ErrorKind::InvalidParameter, "training matrix has non-finite entries");
}

struct Objective {
  const Eigen::MatrixXd& z;  // intercept column first
  const Eigen::VectorXd& y;
  const Eigen::VectorXd& w;
  double total_weight;
  double lambda;

  double value(const Eigen::VectorXd& theta) const {
    const Eigen::VectorXd eta = z * theta;
    double ll = 0.0;
    for (Eigen::Index i = 0; i < eta.size(); ++i) ll += w[i] * (y[i] * eta[i] - log1pexp(eta[i]));
    const double penalty = theta.tail(theta.size() - 1).squaredNorm();
    return ll / total_weight - 0.5 * lambda * penalty;
  }
};

}  // namespace

double logistic(double eta) noexcept {
  if (eta >= 0.0) return 1.0 / (1.0 + std::exp(-eta));
  const double e = std::exp(eta);
  return e / (1.0 + e);
}

Standardizer Standardizer::fit(const Eigen::MatrixXd& x) {
  if (x.rows() < 1) throw Error(ErrorKind::Unfittable, "no training samples");
  Standardizer s;
  const double n = static_cast<double>(x.rows());
  s.mean = x.colwise().sum().transpose() / n;
  s.scale.resize(x.cols());
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    const double var = (x.col(j).array() - s.mean[j]).square().sum() / n;
    const double sd = std::sqrt(var);
    if (!(sd > 0.0) || sd <= 1e-12 * std::max(1.0, std::fabs(s.mean[j]))) {
      throw Error(ErrorKind::Unfittable,
                  "feature column " + std::to_string(j) + " has zero variance");
    }
    s.scale[j] = sd;
  }
  return s;
}

Eigen::MatrixXd Standardizer::apply(const Eigen::MatrixXd& x) const {
  return (x.rowwise() - mean.transpose()).array().rowwise() / scale.transpose().array();
}

Eigen::VectorXd Standardizer::apply_row(std::span<const double> row) const {
  if (static_cast<Eigen::Index>(row.size()) != mean.size()) {
    throw Error(ErrorKind::Schema, "feature row has " + std::to_string(row.size()) +
                                       " values, model expects " + std::to_string(mean.size()));
  }
  Eigen::VectorXd z(mean.size());
  for (Eigen::Index j = 0; j < z.size(); ++j) z[j] = (row[static_cast<std::size_t>(j)] - mean[j]) / scale[j];
  return z;
}

RawLinear TrainedModel::raw() const {
  RawLinear r;
  r.weights = coefficients.array() / standardizer.scale.array();
  r.intercept = intercept - r.weights.dot(standardizer.mean);
  return r;
}

double TrainedModel::predict_linear(std::span<const double> row) const {
  return intercept + coefficients.dot(standardizer.apply_row(row));
}

double TrainedModel::predict_proba(std::span<const double> row) const {
  return logistic(predict_linear(row));
}

std::array<double, 2> class_weights(std::span<const int> labels) {
  double counts[2] = {0.0, 0.0};
  for (int y : labels) {
    if (y != 0 && y != 1) throw Error(ErrorKind::InvalidParameter, "labels must be 0 or 1");
    counts[y] += 1.0;
  }
  if (counts[0] == 0.0 || counts[1] == 0.0) {
    throw Error(ErrorKind::Unfittable, "training set contains a single class");
  }
  const double n = counts[0] + counts[1];
  return {n / (2.0 * counts[0]), n / (2.0 * counts[1])};
}

TrainedModel fit(const Eigen::MatrixXd& x, std::span<const int> labels, const FitOptions& options,
                 std::vector<int> feature_ids, const std::optional<RawLinear>& warm_start) {
  const auto cw = class_weights(labels);
  std::vector<double> w(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) w[i] = cw[static_cast<std::size_t>(labels[i])];
  return fit_weighted(x, labels, w, options, std::move(feature_ids), warm_start);
}

TrainedModel fit_weighted(const Eigen::MatrixXd& x, std::span<const int> labels,
                          std::span<const double> weights, const FitOptions& options,
                          std::vector<int> feature_ids, const std::optional<RawLinear>& warm_start) {
  const Eigen::Index n = x.rows();
  const Eigen::Index p = x.cols();
  if (static_cast<std::size_t>(n) != labels.size() || labels.size() != weights.size()) {
    throw Error(ErrorKind::InvalidParameter, "sample, label and weight counts differ");
  }
  if (!(options.lambda >= 0.0) || !(options.tolerance > 0.0) || options.max_iterations < 1) {
    throw Error(ErrorKind::InvalidParameter, "invalid optimizer options");
  }
  require_finite(x);
  bool has[2] = {false, false};
  for (int y : labels) {
    if (y != 0 && y != 1) throw Error(ErrorKind::InvalidParameter, "labels must be 0 or 1");
    has[y] = true;
  }
  if (!has[0] || !has[1]) throw Error(ErrorKind::Unfittable, "training set contains a single class");
  if (feature_ids.empty()) {
    for (Eigen::Index j = 0; j < p; ++j) feature_ids.push_back(static_cast<int>(j) + 1);
  }
  if (static_cast<Eigen::Index>(feature_ids.size()) != p) {
    throw Error(ErrorKind::InvalidParameter, "feature id count does not match matrix columns");
  }

  TrainedModel m;
  m.feature_ids = std::move(feature_ids);
  m.lambda = options.lambda;
  m.standardizer = Standardizer::fit(x);

  Eigen::MatrixXd z(n, p + 1);
  z.col(0).setOnes();
  z.rightCols(p) = m.standardizer.apply(x);
  Eigen::VectorXd y(n), w(n);
  double total = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    y[i] = labels[static_cast<std::size_t>(i)];
    w[i] = weights[static_cast<std::size_t>(i)];
    if (!(w[i] > 0.0) || !std::isfinite(w[i])) {
      throw Error(ErrorKind::InvalidParameter, "sample weights must be positive");
    }
    total += w[i];
  }
  const Objective objective{z, y, w, total, options.lambda};

  Eigen::VectorXd theta = Eigen::VectorXd::Zero(p + 1);
  if (warm_start && warm_start->weights.size() == p) {
    theta.tail(p) = warm_start->weights.array() * m.standardizer.scale.array();
    theta[0] = warm_start->intercept + warm_start->weights.dot(m.standardizer.mean);
    if (!theta.allFinite()) theta.setZero();
  }

  Eigen::VectorXd penalty_diag = Eigen::VectorXd::Constant(p + 1, options.lambda);
  penalty_diag[0] = 0.0;
  double current = objective.value(theta);
  for (int it = 0; it < options.max_iterations; ++it) {
    const Eigen::VectorXd eta = z * theta;
    Eigen::VectorXd resid(n), curv(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double pr = logistic(eta[i]);
      resid[i] = w[i] * (y[i] - pr);
      curv[i] = w[i] * pr * (1.0 - pr);
    }
    const Eigen::VectorXd grad =
        z.transpose() * resid / total - penalty_diag.cwiseProduct(theta);
    m.gradient_norm = grad.cwiseAbs().maxCoeff();
    m.iterations = it;
    if (m.gradient_norm < options.tolerance) {
      m.converged = true;
      break;
    }
    Eigen::MatrixXd hess = z.transpose() * curv.asDiagonal() * z / total;
    hess.diagonal() += penalty_diag;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(hess);
    Eigen::VectorXd step = ldlt.solve(grad);
    if (ldlt.info() != Eigen::Success || !step.allFinite()) {
      hess.diagonal().array() += 1e-10;
      step = hess.ldlt().solve(grad);
    }
    double scale = 1.0;
    bool moved = false;
    for (int halving = 0; halving < 60; ++halving, scale *= 0.5) {
      const Eigen::VectorXd trial = theta + scale * step;
      const double value = objective.value(trial);
      if (value >= current) {
        theta = trial;
        current = value;
        moved = true;
        break;
      }
    }
    if (!moved) {
      m.iterations = it + 1;
      break;
    }
    m.iterations = it + 1;
  }
  if (!m.converged) {
    // Final gradient for reporting.
    const Eigen::VectorXd eta = z * theta;
    Eigen::VectorXd resid(n);
    for (Eigen::Index i = 0; i < n; ++i) resid[i] = w[i] * (y[i] - logistic(eta[i]));
    const Eigen::VectorXd grad = z.transpose() * resid / total - penalty_diag.cwiseProduct(theta);
    m.gradient_norm = grad.cwiseAbs().maxCoeff();
    m.converged = m.gradient_norm < options.tolerance;
  }
  m.intercept = theta[0];
  m.coefficients = theta.tail(p);
  return m;
}

}  // namespace morphocad::model
