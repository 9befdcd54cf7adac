#pragma once

#include <vector>

namespace morphocad::stats {

struct AnovaResult {
  double f = 0.0;
  double p = 1.0;
  int df_between = 0;
  int df_within = 0;
  double ms_within = 0.0;
};

/// One-way ANOVA. Needs >= 2 groups of >= 2 samples; ErrorKind::AnovaUndefined
/// when every group is constant and all means agree.
AnovaResult one_way_anova(const std::vector<std::vector<double>>& groups);

/// P(Q <= q) for the studentized range of k normal means with `df` error
/// degrees of freedom (df <= 0 means infinite).
double studentized_range_cdf(double q, int k, double df);
/// Upper-alpha critical value q such that P(Q > q) = alpha.
double studentized_range_quantile(double alpha, int k, double df);

struct TukeyResult {
  std::vector<double> means;
  double q_critical = 0.0;
  double margin = 0.0;  // honest significant difference
  double harmonic_n = 0.0;
  /// significant[i][j]: means i and j differ at the chosen level.
  std::vector<std::vector<bool>> significant;
};

/// Tukey HSD with the harmonic-mean group size; same preconditions and
/// errors as one_way_anova.
TukeyResult tukey_hsd(const std::vector<std::vector<double>>& groups, double alpha = 0.05);

}  // namespace morphocad::stats
