#include "morphocad/eval.hpp"

#include <algorithm>
#include <boost/random/mersenne_twister.hpp>
#include <boost/random/uniform_int_distribution.hpp>
#include <cmath>
#include <numeric>
#include <string>

#include "morphocad/error.hpp"
#include "morphocad/numeric.hpp"

namespace morphocad::eval {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void check_binary(std::span<const double> scores, std::span<const int> labels, int& pos, int& neg) {
  if (scores.size() != labels.size()) {
    throw Error(ErrorKind::InvalidParameter, "score and label counts differ");
  }
  pos = neg = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] == 1) {
      ++pos;
    } else if (labels[i] == 0) {
      ++neg;
    } else {
      throw Error(ErrorKind::InvalidParameter, "labels must be 0 or 1");
    }
    if (!std::isfinite(scores[i])) throw Error(ErrorKind::InvalidParameter, "scores must be finite");
  }
  if (pos == 0 || neg == 0) throw Error(ErrorKind::UndefinedAuc, "AUC needs both classes");
}

std::vector<std::size_t> descending_order(std::span<const double> scores) {
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  return order;
}

// Twice the Mann-Whitney count: 2 wins + ties.
std::int64_t doubled_pair_count(std::span<const double> scores, std::span<const int> labels,
                                const std::vector<std::size_t>& order) {
  std::int64_t total = 0;
  std::int64_t pos_above = 0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    std::int64_t pos = 0, neg = 0;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) {
      (labels[order[j]] == 1 ? pos : neg) += 1;
      ++j;
    }
    total += neg * (2 * pos_above + pos);
    pos_above += pos;
    i = j;
  }
  return total;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

double percent(int num, int den) { return den == 0 ? 0.0 : 100.0 * num / den; }

}  // namespace

void Dataset::add(std::string id, features::Label label, features::BiradsCategory category,
                  const features::FeatureVector& values) {
  if (std::find(ids.begin(), ids.end(), id) != ids.end()) {
    throw Error(ErrorKind::DuplicateId, "duplicate lesion id '" + id + "'");
  }
  std::array<double, kColumnCount> row{};
  std::copy(values.values.begin(), values.values.end(), row.begin());
  row[kColumnCount - 1] = features::encode_birads(category);
  ids.push_back(std::move(id));
  labels.push_back(static_cast<int>(label));
  birads.push_back(category);
  rows.push_back(row);
}

void Dataset::add(std::string id, features::Label label, features::BiradsCategory category) {
  features::FeatureVector empty;
  empty.values.fill(kNaN);
  add(std::move(id), label, category, empty);
}

std::array<int, 2> Dataset::class_counts() const noexcept {
  std::array<int, 2> c{0, 0};
  for (int y : labels) ++c[static_cast<std::size_t>(y)];
  return c;
}

Eigen::MatrixXd Dataset::columns(std::span<const int> feature_ids) const {
  Eigen::MatrixXd x(static_cast<Eigen::Index>(size()), static_cast<Eigen::Index>(feature_ids.size()));
  for (std::size_t j = 0; j < feature_ids.size(); ++j) {
    const int id = feature_ids[j];
    if (id < 1 || id > kColumnCount) {
      throw Error(ErrorKind::Schema, "unknown feature id " + std::to_string(id));
    }
    for (std::size_t i = 0; i < size(); ++i) {
      const double v = rows[i][static_cast<std::size_t>(id - 1)];
      if (!std::isfinite(v)) {
        throw Error(ErrorKind::Schema, "lesion '" + ids[i] + "' has no value for " +
                                           std::string(features::feature_name(id)));
      }
      x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v;
    }
  }
  return x;
}

std::vector<double> Dataset::column(int feature_id) const {
  const int one[] = {feature_id};
  const Eigen::MatrixXd x = columns(one);
  return {x.data(), x.data() + x.size()};
}

LoocvResult loocv(const Dataset& data, std::span<const int> subset, const model::FitOptions& options) {
  const auto counts = data.class_counts();
  if (counts[0] < 2 || counts[1] < 2) {
    throw Error(ErrorKind::Unfittable, "LOOCV needs at least two lesions of each class");
  }
  if (subset.empty()) throw Error(ErrorKind::InvalidParameter, "empty feature subset");
  const std::size_t n = data.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return data.ids[a] < data.ids[b]; });

  const Eigen::MatrixXd raw = data.columns(subset);
  Eigen::MatrixXd x(raw.rows(), raw.cols());
  std::vector<int> y(n);
  for (std::size_t k = 0; k < n; ++k) {
    x.row(static_cast<Eigen::Index>(k)) = raw.row(static_cast<Eigen::Index>(order[k]));
    y[k] = data.labels[order[k]];
  }
  const std::vector<int> ids(subset.begin(), subset.end());
  const model::RawLinear seed = model::fit(x, y, options, ids).raw();

  LoocvResult out;
  out.scores.assign(n, 0.0);
  out.fold_sizes.assign(n, 0);
  std::vector<char> unconverged(n, 0);
  parallel_for(n, [&](std::size_t k) {
    const std::size_t held = order[k];
    try {
      Eigen::MatrixXd train(static_cast<Eigen::Index>(n - 1), x.cols());
      std::vector<int> ty;
      ty.reserve(n - 1);
      for (std::size_t r = 0, t = 0; r < n; ++r) {
        if (r == k) continue;
        train.row(static_cast<Eigen::Index>(t++)) = x.row(static_cast<Eigen::Index>(r));
        ty.push_back(y[r]);
      }
      const auto m = model::fit(train, ty, options, ids, seed);
      const Eigen::VectorXd row = x.row(static_cast<Eigen::Index>(k)).transpose();
      out.scores[held] = m.predict_proba({row.data(), static_cast<std::size_t>(row.size())});
      out.fold_sizes[held] = static_cast<int>(n - 1);
      unconverged[held] = m.converged ? 0 : 1;
    } catch (const Error& e) {
      throw e.with_context("fold '" + data.ids[held] + "'");
    }
  });
  out.unconverged_folds = static_cast<int>(std::count(unconverged.begin(), unconverged.end(), 1));
  return out;
}

std::vector<double> loocv_scores(const Dataset& data, std::span<const int> subset,
                                 const model::FitOptions& options) {
  return loocv(data, subset, options).scores;
}

RocCurve roc_and_auc(std::span<const double> scores, std::span<const int> labels) {
  RocCurve roc;
  check_binary(scores, labels, roc.positives, roc.negatives);
  roc.scores.assign(scores.begin(), scores.end());
  roc.labels.assign(labels.begin(), labels.end());
  const auto order = descending_order(scores);
  const double p = roc.positives, q = roc.negatives;
  roc.points.push_back({0.0, 0.0, std::numeric_limits<double>::infinity(), 0, 0});
  std::int64_t area2 = 0;
  int tp = 0, fp = 0;
  for (std::size_t i = 0; i < order.size();) {
    const double t = scores[order[i]];
    const int tp0 = tp, fp0 = fp;
    for (; i < order.size() && scores[order[i]] == t; ++i) (labels[order[i]] == 1 ? tp : fp) += 1;
    area2 += static_cast<std::int64_t>(fp - fp0) * (tp + tp0);
    roc.points.push_back({fp / q, tp / p, t, tp, fp});
  }
  roc.auc = static_cast<double>(area2) / (2.0 * p * q);
  return roc;
}

double rank_auc(std::span<const double> scores, std::span<const int> labels) {
  int pos = 0, neg = 0;
  check_binary(scores, labels, pos, neg);
  const auto order = descending_order(scores);
  return static_cast<double>(doubled_pair_count(scores, labels, order)) /
         (2.0 * static_cast<double>(pos) * static_cast<double>(neg));
}

BootstrapResult bootstrap_auc(std::span<const double> scores, std::span<const int> labels,
                              int replicates, std::uint64_t seed) {
  int pos = 0, neg = 0;
  check_binary(scores, labels, pos, neg);
  if (replicates < 2) throw Error(ErrorKind::InvalidParameter, "bootstrap needs at least two replicates");
  const std::size_t n = scores.size();
  BootstrapResult out;
  out.replicates.assign(static_cast<std::size_t>(replicates), 0.0);
  const std::uint64_t base = splitmix64(seed);
  parallel_for(out.replicates.size(), [&](std::size_t b) {
    boost::random::mt19937_64 rng(splitmix64(base ^ splitmix64(b)));
    boost::random::uniform_int_distribution<std::size_t> pick(0, n - 1);
    std::vector<double> s(n);
    std::vector<int> l(n);
    for (;;) {
      int p = 0;
      for (std::size_t i = 0; i < n; ++i) {
        const std::size_t k = pick(rng);
        s[i] = scores[k];
        l[i] = labels[k];
        p += l[i];
      }
      if (p > 0 && p < static_cast<int>(n)) break;
    }
    out.replicates[b] = rank_auc(s, l);
  });
  double mean = 0.0;
  for (double r : out.replicates) mean += r;
  mean /= replicates;
  double ss = 0.0;
  for (double r : out.replicates) ss += (r - mean) * (r - mean);
  out.std = std::sqrt(ss / (replicates - 1));
  return out;
}

double bootstrap_auc_std(std::span<const double> scores, std::span<const int> labels, int replicates,
                         std::uint64_t seed) {
  return bootstrap_auc(scores, labels, replicates, seed).std;
}

MetricsReport metrics_at(std::span<const double> scores, std::span<const int> labels, double cutoff,
                         std::string policy) {
  if (scores.size() != labels.size()) {
    throw Error(ErrorKind::InvalidParameter, "score and label counts differ");
  }
  MetricsReport r;
  r.policy = std::move(policy);
  r.cutoff = cutoff;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const bool called = scores[i] >= cutoff;
    if (labels[i] == 1) {
      (called ? r.counts.tp : r.counts.fn) += 1;
    } else {
      (called ? r.counts.fp : r.counts.tn) += 1;
    }
  }
  r.sensitivity = percent(r.counts.tp, r.counts.tp + r.counts.fn);
  r.specificity = percent(r.counts.tn, r.counts.tn + r.counts.fp);
  r.accuracy = percent(r.counts.tp + r.counts.tn, r.counts.total());
  return r;
}

MetricsReport optimal_cutoff(const RocCurve& roc) {
  if (roc.points.size() < 2) throw Error(ErrorKind::InvalidParameter, "empty ROC curve");
  const std::int64_t p = roc.positives, q = roc.negatives;
  std::size_t best = 1;
  auto key = [&](const RocPoint& pt) {
    const std::int64_t miss = p - pt.tp;
    return miss * miss * q * q + static_cast<std::int64_t>(pt.fp) * pt.fp * p * p;
  };
  for (std::size_t i = 2; i < roc.points.size(); ++i) {
    const auto k = key(roc.points[i]), kb = key(roc.points[best]);
    if (k < kb || (k == kb && roc.points[i].tp > roc.points[best].tp)) best = i;
  }
  return metrics_at(roc.scores, roc.labels, roc.points[best].threshold, "optimal");
}

MetricsReport full_sensitivity_cutoff(std::span<const double> scores, std::span<const int> labels) {
  int pos = 0, neg = 0;
  check_binary(scores, labels, pos, neg);
  double cutoff = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (labels[i] == 1) cutoff = std::min(cutoff, scores[i]);
  }
  return metrics_at(scores, labels, cutoff, "full-sensitivity");
}

double round1(double percent) noexcept { return std::round(percent * 10.0) / 10.0; }

std::array<int, 8> avoided_biopsies(std::span<const double> scores, std::span<const int> labels,
                                    std::span<const features::BiradsCategory> birads, double cutoff) {
  if (scores.size() != labels.size() || scores.size() != birads.size()) {
    throw Error(ErrorKind::InvalidParameter, "score, label and category counts differ");
  }
  std::array<int, 8> out{};
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (labels[i] == 0 && scores[i] < cutoff) {
      ++out[static_cast<std::size_t>(features::encode_birads(birads[i]) - 1)];
    }
  }
  return out;
}

}  // namespace morphocad::eval
