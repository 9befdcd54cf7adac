#include "morphocad/numeric.hpp"

#include <cmath>

#include "morphocad/error.hpp"

namespace morphocad {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::InvalidContour: return "invalid-contour";
    case ErrorKind::DegenerateRegion: return "degenerate-region";
    case ErrorKind::OutOfBounds: return "out-of-bounds";
    case ErrorKind::InvalidParameter: return "invalid-parameter";
    case ErrorKind::Topology: return "topology";
    case ErrorKind::NrlUndefined: return "nrl-undefined";
    case ErrorKind::Units: return "units";
    case ErrorKind::Unfittable: return "unfittable";
    case ErrorKind::Schema: return "schema";
    case ErrorKind::UndefinedAuc: return "undefined-auc";
    case ErrorKind::AnovaUndefined: return "anova-undefined";
    case ErrorKind::DuplicateId: return "duplicate-id";
    case ErrorKind::MissingFile: return "missing-file";
    case ErrorKind::Parse: return "parse";
    case ErrorKind::Io: return "io";
    case ErrorKind::MissingBirads: return "missing-birads";
    case ErrorKind::NotFound: return "not-found";
  }
  return "unknown";
}

void ExactSum::add(double x) {
  std::size_t i = 0;
  for (double y : partials_) {
    if (std::fabs(x) < std::fabs(y)) std::swap(x, y);
    const double hi = x + y;
    const double lo = y - (hi - x);
    if (lo != 0.0) partials_[i++] = lo;
    x = hi;
  }
  partials_.resize(i);
  partials_.push_back(x);
}

double ExactSum::value() const {
  std::size_t n = partials_.size();
  if (n == 0) return 0.0;
  double hi = partials_[--n];
  double lo = 0.0;
  while (n > 0) {
    const double x = hi;
    const double y = partials_[--n];
    hi = x + y;
    const double yr = hi - x;
    lo = y - yr;
    if (lo != 0.0) break;
  }
  // Round-half-even correction when the remaining partials push past a tie.
  if (n > 0 && ((lo < 0.0 && partials_[n - 1] < 0.0) ||
                (lo > 0.0 && partials_[n - 1] > 0.0))) {
    const double y = lo * 2.0;
    const double x = hi + y;
    const double yr = x - hi;
    if (y == yr) hi = x;
  }
  return hi;
}

double exact_sum(std::span<const double> values) {
  ExactSum acc;
  for (double v : values) acc.add(v);
  return acc.value();
}

}  // namespace morphocad
