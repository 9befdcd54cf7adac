#include "morphocad/selection.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "morphocad/error.hpp"

namespace morphocad::selection {
namespace {

std::vector<int> all_morphological() {
  std::vector<int> ids(features::kMorphologicalCount);
  std::iota(ids.begin(), ids.end(), 1);
  return ids;
}

void check_ids(std::span<const int> ids, std::string_view what) {
  std::vector<int> sorted(ids.begin(), ids.end());
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw Error(ErrorKind::InvalidParameter, std::string(what) + " contain duplicates");
  }
  for (int id : sorted) {
    if (id < 1 || id > eval::kColumnCount) {
      throw Error(ErrorKind::InvalidParameter, std::string(what) + " contain unknown id " + std::to_string(id));
    }
  }
}

SelectionStep make_step(const eval::Dataset& data, std::vector<int> subset, int chosen,
                        std::vector<double> scores, const StudyConfig& config, std::size_t step_index) {
  SelectionStep step;
  step.chosen = chosen;
  step.subset = std::move(subset);
  step.scores = std::move(scores);
  step.auc = eval::roc_and_auc(step.scores, data.labels).auc;
  auto boot = eval::bootstrap_auc(step.scores, data.labels, config.bootstrap, config.seed + step_index);
  step.replicates = std::move(boot.replicates);
  step.auc_std = boot.std;
  return step;
}

}  // namespace

std::string_view to_string(Mode mode) noexcept {
  switch (mode) {
    case Mode::Morphological: return "morphological";
    case Mode::Combined: return "combined";
    case Mode::BiradsOnly: return "birads-only";
  }
  return "morphological";
}

Mode parse_mode(std::string_view text) {
  if (text == "morphological") return Mode::Morphological;
  if (text == "combined") return Mode::Combined;
  if (text == "birads-only") return Mode::BiradsOnly;
  throw Error(ErrorKind::InvalidParameter, "unknown mode '" + std::string(text) + "'");
}

bool constant_in_some_fold(std::span<const double> column) {
  if (column.size() < 3) return true;
  // Removing one value leaves a constant column iff at most one value differs
  // from the majority value.
  std::vector<double> sorted(column.begin(), column.end());
  std::sort(sorted.begin(), sorted.end());
  const std::size_t n = sorted.size();
  return sorted[0] == sorted[n - 2] || sorted[1] == sorted[n - 1];
}

SelectionTrace forward_select(const eval::Dataset& data, std::span<const int> candidates,
                              std::span<const int> forced, const StudyConfig& config) {
  check_ids(candidates, "candidates");
  check_ids(forced, "forced features");
  for (int id : forced) {
    if (std::find(candidates.begin(), candidates.end(), id) != candidates.end()) {
      throw Error(ErrorKind::InvalidParameter, "feature " + std::to_string(id) + " is both forced and a candidate");
    }
  }
  if (candidates.empty() && forced.empty()) {
    throw Error(ErrorKind::InvalidParameter, "nothing to select from");
  }

  SelectionTrace trace;
  trace.mode = config.mode;
  trace.forced.assign(forced.begin(), forced.end());
  trace.lambda = config.fit.lambda;
  trace.bootstrap = config.bootstrap;
  trace.seed = config.seed;
  std::vector<int> pool;
  for (int id : candidates) {
    const auto col = data.column(id);
    (constant_in_some_fold(col) ? trace.excluded : pool).push_back(id);
  }
  std::sort(pool.begin(), pool.end());
  std::sort(trace.excluded.begin(), trace.excluded.end());
  trace.candidates = pool;

  std::vector<int> current = trace.forced;
  if (pool.empty()) {
    try {
      if (config.on_evaluate) config.on_evaluate(current);
      auto scores = eval::loocv_scores(data, current, config.fit);
      trace.steps.push_back(make_step(data, current, 0, std::move(scores), config, 0));
    } catch (const Error& e) {
      throw e.with_context("step 1");
    }
    return trace;
  }
  while (!pool.empty()) {
    const std::size_t index = trace.steps.size();
    try {
      int best = -1;
      double best_auc = -1.0;
      std::vector<double> best_scores;
      for (int id : pool) {
        std::vector<int> subset = current;
        subset.push_back(id);
        if (config.on_evaluate) config.on_evaluate(subset);
        auto scores = eval::loocv_scores(data, subset, config.fit);
        const double auc = eval::roc_and_auc(scores, data.labels).auc;
        if (auc > best_auc) {
          best_auc = auc;
          best = id;
          best_scores = std::move(scores);
        }
      }
      current.push_back(best);
      pool.erase(std::find(pool.begin(), pool.end(), best));
      trace.steps.push_back(make_step(data, current, best, std::move(best_scores), config, index));
    } catch (const Error& e) {
      throw e.with_context("step " + std::to_string(index + 1));
    }
  }
  return trace;
}

Reduction backward_reduce(const SelectionTrace& trace, double alpha) {
  if (trace.steps.empty()) throw Error(ErrorKind::InvalidParameter, "empty selection trace");
  Reduction r;
  r.best_step = 1;
  for (std::size_t k = 1; k < trace.steps.size(); ++k) {
    if (trace.steps[k].auc > trace.steps[r.best_step - 1].auc) r.best_step = k + 1;
  }
  r.chosen_step = r.best_step;
  if (r.best_step > 1) {
    std::vector<std::vector<double>> groups;
    for (std::size_t k = 0; k < r.best_step; ++k) groups.push_back(trace.steps[k].replicates);
    try {
      r.anova = stats::one_way_anova(groups);
      r.tukey = stats::tukey_hsd(groups, alpha);
      for (std::size_t k = 0; k < r.best_step; ++k) {
        if (!r.tukey->significant[k][r.best_step - 1]) {
          r.chosen_step = k + 1;
          break;
        }
      }
    } catch (const Error& e) {
      r.degenerate = true;
      r.warning = std::string("replicate groups unusable, keeping the best step: ") + e.what();
      r.anova.reset();
      r.tukey.reset();
      r.chosen_step = r.best_step;
    }
  }
  r.subset = trace.steps[r.chosen_step - 1].subset;
  return r;
}

StudyResult run_study(const eval::Dataset& data, const StudyConfig& config) {
  std::vector<int> candidates = config.candidates.empty() ? all_morphological() : config.candidates;
  std::vector<int> forced;
  switch (config.mode) {
    case Mode::Morphological: break;
    case Mode::Combined: forced = {features::kBiradsFeature}; break;
    case Mode::BiradsOnly:
      forced = {features::kBiradsFeature};
      candidates.clear();
      break;
  }
  std::erase(candidates, features::kBiradsFeature);

  StudyResult out;
  out.trace = forward_select(data, candidates, forced, config);
  out.reduction = backward_reduce(out.trace, config.alpha);
  const auto& step = out.trace.steps[out.reduction.chosen_step - 1];
  out.scores = step.scores;
  out.roc = eval::roc_and_auc(out.scores, data.labels);
  out.auc_std = step.auc_std;
  out.optimal = eval::optimal_cutoff(out.roc);
  out.full_sensitivity = eval::full_sensitivity_cutoff(out.scores, data.labels);
  out.avoided_biopsies =
      eval::avoided_biopsies(out.scores, data.labels, data.birads, out.full_sensitivity.cutoff);
  out.model = model::fit(data.columns(out.reduction.subset), data.labels, config.fit, out.reduction.subset);
  return out;
}

}  // namespace morphocad::selection
