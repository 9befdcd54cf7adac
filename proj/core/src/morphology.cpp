#include <cmath>
#include <limits>

#include "morphocad/error.hpp"
#include "morphocad/geometry.hpp"

namespace morphocad::geometry {
namespace {

constexpr double kFar = 1e20;

// One-dimensional squared distance transform of a sampled function
// (lower envelope of parabolas, Felzenszwalb & Huttenlocher).
void edt_1d(const double* f, double* d, int n, std::vector<int>& v, std::vector<double>& z) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  v.assign(n, 0);
  z.assign(n + 1, 0.0);
  int k = 0;
  z[0] = -inf;
  z[1] = inf;
  auto meet = [&](int q, int p) {
    return ((f[q] + double(q) * q) - (f[p] + double(p) * p)) / (2.0 * (q - p));
  };
  for (int q = 1; q < n; ++q) {
    double s = meet(q, v[k]);
    while (s <= z[k]) {
      --k;
      s = meet(q, v[k]);
    }
    ++k;
    v[k] = q;
    z[k] = s;
    z[k + 1] = inf;
  }
  k = 0;
  for (int q = 0; q < n; ++q) {
    while (z[k + 1] < q) ++k;
    const double diff = q - v[k];
    d[q] = diff * diff + f[v[k]];
  }
}

// Squared Euclidean distance from every pixel to the nearest pixel whose
// value equals `target`. Exact integers for the distances that matter.
std::vector<double> squared_distance(const Grid& g, bool target) {
  const int w = g.width;
  const int h = g.height;
  std::vector<double> out(g.cells.size());
  for (std::size_t i = 0; i < g.cells.size(); ++i) {
    out[i] = (g.cells[i] != 0) == target ? 0.0 : kFar;
  }
  std::vector<int> v;
  std::vector<double> z;
  std::vector<double> f(std::max(w, h)), d(std::max(w, h));
  for (int x = 0; x < w; ++x) {
    for (int y = 0; y < h; ++y) f[y] = out[static_cast<std::size_t>(y) * w + x];
    edt_1d(f.data(), d.data(), h, v, z);
    for (int y = 0; y < h; ++y) out[static_cast<std::size_t>(y) * w + x] = d[y];
  }
  for (int y = 0; y < h; ++y) {
    double* row = out.data() + static_cast<std::size_t>(y) * w;
    std::copy(row, row + w, f.begin());
    edt_1d(f.data(), d.data(), w, v, z);
    std::copy(d.begin(), d.begin() + w, row);
  }
  return out;
}

}  // namespace

BinaryMask morphological_close(const BinaryMask& mask, double radius_px) {
  if (!(radius_px >= 1.0) || !std::isfinite(radius_px)) {
    throw Error(ErrorKind::InvalidParameter, "closing radius must be >= 1 pixel");
  }
  const int pad = 2 * static_cast<int>(std::ceil(radius_px)) + 2;
  const double r2 = radius_px * radius_px;
  Grid padded(mask.width() + 2 * pad, mask.height() + 2 * pad);
  for (int y = 0; y < mask.height(); ++y)
    for (int x = 0; x < mask.width(); ++x)
      if (mask.at(x, y)) padded.set(x + pad, y + pad, true);

  const std::vector<double> to_fg = squared_distance(padded, true);
  Grid dilated(padded.width, padded.height);
  for (std::size_t i = 0; i < to_fg.size(); ++i) dilated.cells[i] = to_fg[i] <= r2 ? 1 : 0;

  const std::vector<double> to_bg = squared_distance(dilated, false);
  Grid closed(mask.width(), mask.height());
  for (int y = 0; y < mask.height(); ++y) {
    for (int x = 0; x < mask.width(); ++x) {
      closed.set(x, y, to_bg[padded.index(x + pad, y + pad)] > r2);
    }
  }
  // Closing stays inside the convex hull, hence inside the original margin.
  return BinaryMask::from_grid(std::move(closed), mask.spacing());
}

}  // namespace morphocad::geometry
