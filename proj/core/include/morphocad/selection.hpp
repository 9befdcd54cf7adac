#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "morphocad/eval.hpp"
#include "morphocad/model.hpp"
#include "morphocad/stats.hpp"

namespace morphocad::selection {

enum class Mode { Morphological, Combined, BiradsOnly };

std::string_view to_string(Mode mode) noexcept;
/// "morphological", "combined" or "birads-only"; ErrorKind::InvalidParameter
/// otherwise.
Mode parse_mode(std::string_view text);

struct StudyConfig {
  Mode mode = Mode::Morphological;
  model::FitOptions fit;
  int bootstrap = eval::kDefaultBootstrap;
  std::uint64_t seed = 1;
  double alpha = 0.05;
  /// Candidate pool; empty means every morphological feature.
  std::vector<int> candidates;
  /// Called with every subset scored during forward search.
  std::function<void(std::span<const int>)> on_evaluate;
};

struct SelectionStep {
  int chosen = 0;            // 0 for a step that only evaluates forced features
  std::vector<int> subset;   // forced features first, then picks in order
  double auc = 0.0;
  double auc_std = 0.0;
  std::vector<double> replicates;
  std::vector<double> scores;  // LOOCV scores aligned with dataset rows
};

struct SelectionTrace {
  Mode mode = Mode::Morphological;
  std::vector<int> forced;
  std::vector<int> candidates;
  /// Pool members dropped before the search because leaving one lesion out
  /// makes them constant.
  std::vector<int> excluded;
  std::vector<SelectionStep> steps;
  double lambda = 0.0;
  int bootstrap = 0;
  std::uint64_t seed = 0;
};

/// True when some leave-one-out training set has zero variance in `column`.
bool constant_in_some_fold(std::span<const double> column);

/// Greedy forward search over `candidates` (forced features always included).
/// Ties in AUC go to the lower feature id. With an empty pool the trace holds
/// a single forced-only step.
SelectionTrace forward_select(const eval::Dataset& data, std::span<const int> candidates,
                              std::span<const int> forced, const StudyConfig& config);

struct Reduction {
  std::size_t best_step = 0;    // k*, 1-based
  std::size_t chosen_step = 0;  // smallest k not below k*, 1-based
  bool degenerate = false;      // statistics undefined; fell back to k*
  std::string warning;
  std::optional<stats::AnovaResult> anova;
  std::optional<stats::TukeyResult> tukey;  // groups are steps 1..k*
  std::vector<int> subset;
};

/// ANOVA + Tukey over the bootstrap replicate groups of steps 1..k*.
Reduction backward_reduce(const SelectionTrace& trace, double alpha = 0.05);

struct StudyResult {
  SelectionTrace trace;
  Reduction reduction;
  std::vector<double> scores;  // LOOCV scores of the chosen subset
  eval::RocCurve roc;
  double auc_std = 0.0;
  eval::MetricsReport optimal;
  eval::MetricsReport full_sensitivity;
  std::array<int, 8> avoided_biopsies{};
  model::TrainedModel model;  // chosen subset fitted on every lesion
};

StudyResult run_study(const eval::Dataset& data, const StudyConfig& config);

}  // namespace morphocad::selection
