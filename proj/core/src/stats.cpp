#include "morphocad/stats.hpp"

#include <boost/math/distributions/fisher_f.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/roots.hpp>
#include <cmath>
#include <limits>
#include <numbers>

#include "morphocad/error.hpp"

namespace morphocad::stats {
namespace {

using boost::math::quadrature::gauss_kronrod;

constexpr double kTol = 1e-10;

void check_groups(const std::vector<std::vector<double>>& groups) {
  if (groups.size() < 2) throw Error(ErrorKind::InvalidParameter, "need at least two groups");
  for (const auto& g : groups) {
    if (g.size() < 2) throw Error(ErrorKind::InvalidParameter, "each group needs at least two samples");
    for (double v : g) {
      if (!std::isfinite(v)) throw Error(ErrorKind::InvalidParameter, "non-finite sample");
    }
  }
}

double mean_of(const std::vector<double>& g) {
  double s = 0.0;
  for (double v : g) s += v;
  return s / static_cast<double>(g.size());
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

// Phi(a) - Phi(b) for a >= b without cancellation in either tail.
double normal_interval(double a, double b) {
  if (b > 0.0) return 0.5 * (std::erfc(b / std::numbers::sqrt2) - std::erfc(a / std::numbers::sqrt2));
  return normal_cdf(a) - normal_cdf(b);
}

// Range distribution of k standard normals.
double range_cdf_infinite(double w, int k) {
  if (w <= 0.0) return 0.0;
  const double c = 1.0 / std::sqrt(2.0 * std::numbers::pi);
  auto f = [&](double z) {
    const double inner = normal_interval(z, z - w);
    return c * std::exp(-0.5 * z * z) * std::pow(inner, k - 1);
  };
  const double lo = -8.5, hi = 8.5 + w;
  const double v = gauss_kronrod<double, 61>::integrate(f, lo, 0.5 * w, 10, kTol) +
                   gauss_kronrod<double, 61>::integrate(f, 0.5 * w, hi, 10, kTol);
  return std::min(1.0, k * v);
}

}  // namespace

AnovaResult one_way_anova(const std::vector<std::vector<double>>& groups) {
  check_groups(groups);
  std::size_t total = 0;
  double grand = 0.0;
  for (const auto& g : groups) {
    total += g.size();
    for (double v : g) grand += v;
  }
  grand /= static_cast<double>(total);
  double ssb = 0.0, ssw = 0.0;
  for (const auto& g : groups) {
    const double m = mean_of(g);
    ssb += static_cast<double>(g.size()) * (m - grand) * (m - grand);
    for (double v : g) ssw += (v - m) * (v - m);
  }
  AnovaResult r;
  r.df_between = static_cast<int>(groups.size()) - 1;
  r.df_within = static_cast<int>(total - groups.size());
  r.ms_within = ssw / r.df_within;
  if (ssw == 0.0) {
    if (ssb == 0.0) throw Error(ErrorKind::AnovaUndefined, "all groups are constant with equal means");
    r.f = std::numeric_limits<double>::infinity();
    r.p = 0.0;
    return r;
  }
  r.f = (ssb / r.df_between) / r.ms_within;
  const boost::math::fisher_f_distribution<double> dist(r.df_between, r.df_within);
  r.p = boost::math::cdf(boost::math::complement(dist, r.f));
  return r;
}

double studentized_range_cdf(double q, int k, double df) {
  if (k < 2) throw Error(ErrorKind::InvalidParameter, "studentized range needs k >= 2");
  if (!(q > 0.0)) return 0.0;
  if (df <= 0.0 || std::isinf(df)) return range_cdf_infinite(q, k);
  const double half = 0.5 * df;
  const double log_norm = std::log(2.0 * df) - half * std::log(2.0) - std::lgamma(half);
  auto density = [&](double s) {
    if (s <= 0.0) return 0.0;
    const double u = df * s * s;
    return std::exp((half - 1.0) * std::log(u) - 0.5 * u + log_norm + std::log(s));
  };
  auto f = [&](double s) {
    const double d = density(s);
    return d == 0.0 ? 0.0 : d * range_cdf_infinite(q * s, k);
  };
  const double spread = 12.0 / std::sqrt(2.0 * df);
  const double lo = std::max(0.0, 1.0 - spread), hi = 1.0 + spread + (df < 4.0 ? 8.0 : 0.0);
  constexpr int kPanels = 16;
  double v = 0.0;
  for (int i = 0; i < kPanels; ++i) {
    const double a = lo + (hi - lo) * i / kPanels, b = lo + (hi - lo) * (i + 1) / kPanels;
    v += gauss_kronrod<double, 61>::integrate(f, a, b, 0);
  }
  return std::clamp(v, 0.0, 1.0);
}

double studentized_range_quantile(double alpha, int k, double df) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw Error(ErrorKind::InvalidParameter, "alpha must lie in (0, 1)");
  const double target = 1.0 - alpha;
  auto g = [&](double q) { return studentized_range_cdf(q, k, df) - target; };
  double hi = 8.0;
  while (g(hi) < 0.0) hi *= 2.0;
  std::uintmax_t iterations = 200;
  const auto root = boost::math::tools::toms748_solve(g, 0.0, hi, -target, g(hi),
                                                      boost::math::tools::eps_tolerance<double>(40),
                                                      iterations);
  return 0.5 * (root.first + root.second);
}

TukeyResult tukey_hsd(const std::vector<std::vector<double>>& groups, double alpha) {
  const AnovaResult anova = one_way_anova(groups);
  const std::size_t k = groups.size();
  TukeyResult r;
  double inv = 0.0;
  for (const auto& g : groups) {
    r.means.push_back(mean_of(g));
    inv += 1.0 / static_cast<double>(g.size());
  }
  r.harmonic_n = static_cast<double>(k) / inv;
  r.q_critical = studentized_range_quantile(alpha, static_cast<int>(k), anova.df_within);
  r.margin = r.q_critical * std::sqrt(anova.ms_within / r.harmonic_n);
  r.significant.assign(k, std::vector<bool>(k, false));
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = i + 1; j < k; ++j) {
      const bool sig = std::fabs(r.means[i] - r.means[j]) > r.margin;
      r.significant[i][j] = r.significant[j][i] = sig;
    }
  }
  return r;
}

}  // namespace morphocad::stats
