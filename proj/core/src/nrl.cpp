#include <algorithm>
#include <cmath>
#include <numbers>

#include "morphocad/error.hpp"
#include "morphocad/features.hpp"
#include "morphocad/numeric.hpp"

namespace morphocad::features {

using geometry::Point2;

namespace {

constexpr double kLobeProminence = 0.05;
constexpr double kUndulationProminence = 0.01;
constexpr int kSpiculationHarmonic = 8;
constexpr double kSpectralFloor = 1e-4;
constexpr double kTurningAngleDeg = 40.0;
constexpr double kCrossingDeadband = 1e-9;

// Lexicographic comparison of the cyclic (-d, len) sequences starting at a, b.
bool starts_before(const std::vector<double>& d, const std::vector<double>& len, std::size_t a,
                   std::size_t b) {
  const std::size_t m = d.size();
  for (std::size_t k = 0; k < m; ++k) {
    const std::size_t i = (a + k) % m;
    const std::size_t j = (b + k) % m;
    if (d[i] != d[j]) return d[i] > d[j];
    if (len[i] != len[j]) return len[i] < len[j];
  }
  return false;
}

std::size_t lobe_window(std::size_t n) {
  auto w = static_cast<std::size_t>(std::lround(0.05 * static_cast<double>(n)));
  if (w % 2 == 0) ++w;
  return std::max<std::size_t>(w, 3);
}

std::vector<double> negated(const std::vector<double>& v) {
  std::vector<double> out(v.size());
  std::transform(v.begin(), v.end(), out.begin(), [](double x) { return -x; });
  return out;
}

}  // namespace

NrlSequence nrl_sequence(const geometry::Contour& contour, std::size_t n) {
  if (n < 64) throw Error(ErrorKind::InvalidParameter, "NRL needs at least 64 samples");
  const geometry::PolygonFrame f = geometry::make_frame(contour);
  const auto& u = f.centered;
  if (!geometry::point_in_polygon(u, {0.0, 0.0})) {
    throw Error(ErrorKind::NrlUndefined, "centroid lies outside the contour");
  }
  const std::size_t m = u.size();
  std::vector<double> dist(m);
  for (std::size_t i = 0; i < m; ++i) dist[i] = std::sqrt(u[i].x * u[i].x + u[i].y * u[i].y);

  const double far = *std::max_element(dist.begin(), dist.end());
  std::size_t start = m;
  for (std::size_t i = 0; i < m; ++i) {
    if (dist[i] != far) continue;
    if (start == m || starts_before(dist, f.edge_lengths, i, start)) start = i;
  }

  std::vector<double> cum(m + 1, 0.0);
  for (std::size_t j = 0; j < m; ++j) cum[j + 1] = cum[j] + f.edge_lengths[(start + j) % m];
  const double total = cum[m];

  NrlSequence s;
  s.values.resize(n);
  s.samples.resize(n);
  s.sample_edges.resize(n);
  std::size_t j = 0;
  for (std::size_t k = 0; k < n; ++k) {
    const double target = total * static_cast<double>(k) / static_cast<double>(n);
    while (j + 1 < m && cum[j + 1] <= target) ++j;
    const std::size_t e = (start + j) % m;
    const Point2 a = u[e];
    const Point2 b = u[(e + 1) % m];
    const double len = f.edge_lengths[e];
    const double t = len > 0.0 ? std::clamp((target - cum[j]) / len, 0.0, 1.0) : 0.0;
    const Point2 p{a.x + t * (b.x - a.x), a.y + t * (b.y - a.y)};
    s.samples[k] = p;
    s.sample_edges[k] = e;
    s.values[k] = std::sqrt(p.x * p.x + p.y * p.y);
  }
  const double peak = *std::max_element(s.values.begin(), s.values.end());
  if (!(peak > 0.0)) throw Error(ErrorKind::NrlUndefined, "contour collapses onto its centroid");
  for (double& v : s.values) {
    v /= peak;
    if (!(v > 0.0)) throw Error(ErrorKind::NrlUndefined, "contour passes through its centroid");
  }
  s.mean = exact_sum(s.values) / static_cast<double>(n);
  return s;
}

NrlSequence nrl_from_values(std::vector<double> values) {
  if (values.empty()) throw Error(ErrorKind::InvalidParameter, "empty NRL sequence");
  NrlSequence s;
  s.values = std::move(values);
  s.mean = exact_sum(s.values) / static_cast<double>(s.values.size());
  return s;
}

NrlFeatures nrl_features(const NrlSequence& s) {
  const auto& d = s.values;
  const std::size_t n = d.size();
  const double nd = static_cast<double>(n);
  NrlFeatures out;
  out.mean = s.mean;

  ExactSum sq, above, rough;
  for (std::size_t i = 0; i < n; ++i) {
    const double dev = d[i] - s.mean;
    sq.add(dev * dev);
    if (dev > 0.0) above.add(dev);
    rough.add(std::fabs(d[i] - d[(i + 1) % n]));
  }
  out.std = std::sqrt(sq.value() / nd);
  out.area_ratio = above.value() / (nd * s.mean);
  out.roughness = rough.value() / nd;

  std::vector<std::size_t> hist(kEntropyBins, 0);
  for (double v : d) {
    const auto bin = static_cast<std::size_t>(std::clamp(v * kEntropyBins, 0.0, kEntropyBins - 1.0));
    ++hist[bin];
  }
  ExactSum entropy;
  for (std::size_t c : hist) {
    if (c == 0) continue;
    const double p = static_cast<double>(c) / nd;
    entropy.add(-p * std::log(p));
  }
  out.entropy = entropy.value();

  std::vector<int> signs;
  signs.reserve(n);
  for (double v : d) {
    const double dev = v - s.mean;
    if (std::fabs(dev) > kCrossingDeadband) signs.push_back(dev > 0.0 ? 1 : -1);
  }
  int crossings = 0;
  for (std::size_t i = 0; i < signs.size() && signs.size() > 1; ++i) {
    if (signs[i] != signs[(i + 1) % signs.size()]) ++crossings;
  }
  out.zero_crossings = crossings;
  return out;
}

std::vector<double> circular_smooth(const std::vector<double>& values, std::size_t window) {
  if (window % 2 == 0 || window == 0) {
    throw Error(ErrorKind::InvalidParameter, "smoothing window must be odd");
  }
  const std::size_t n = values.size();
  const std::size_t half = window / 2;
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    double sum = 0.0;
    for (std::size_t k = 0; k < window; ++k) sum += values[(i + n * window - half + k) % n];
    out[i] = sum / static_cast<double>(window);
  }
  return out;
}

std::vector<Peak> circular_peaks(const std::vector<double>& values) {
  struct Run {
    std::size_t start;
    double value;
  };
  const std::size_t n = values.size();
  std::vector<Run> runs;
  for (std::size_t i = 0; i < n; ++i) {
    if (runs.empty() || values[i] != runs.back().value) runs.push_back({i, values[i]});
  }
  if (runs.size() > 1 && runs.front().value == runs.back().value) runs.erase(runs.begin());
  const std::size_t m = runs.size();
  std::vector<Peak> peaks;
  if (m < 2) return peaks;

  double lowest = runs[0].value;
  for (const Run& r : runs) lowest = std::min(lowest, r.value);

  for (std::size_t r = 0; r < m; ++r) {
    const double h = runs[r].value;
    if (!(h > runs[(r + m - 1) % m].value && h > runs[(r + 1) % m].value)) continue;
    double left_min = h, right_min = h;
    bool left_found = false, right_found = false;
    for (std::size_t k = 1; k < m; ++k) {
      const double v = runs[(r + m - k) % m].value;
      if (v > h) {
        left_found = true;
        break;
      }
      left_min = std::min(left_min, v);
    }
    for (std::size_t k = 1; k < m; ++k) {
      const double v = runs[(r + k) % m].value;
      if (v > h) {
        right_found = true;
        break;
      }
      right_min = std::min(right_min, v);
    }
    const double base = (left_found || right_found) ? std::max(left_min, right_min) : lowest;
    peaks.push_back({runs[r].start, h - base});
  }
  std::sort(peaks.begin(), peaks.end(),
            [](const Peak& a, const Peak& b) { return a.index < b.index; });
  return peaks;
}

int shape_class(double num_lobulations, double long_short_ratio) noexcept {
  if (num_lobulations < 2.0) return long_short_ratio < 1.2 ? 1 : 2;
  if (num_lobulations <= 4.0) return 3;
  return 4;
}

LobeFeatures lobe_features(const NrlSequence& s) {
  const auto& d = s.values;
  const std::size_t n = d.size();
  LobeFeatures out;
  const std::vector<double> smooth = circular_smooth(d, lobe_window(n));

  std::vector<std::size_t> lobes;
  for (const Peak& p : circular_peaks(smooth)) {
    if (p.prominence >= kLobeProminence) lobes.push_back(p.index);
    if (p.prominence >= kUndulationProminence && p.prominence < kLobeProminence) {
      out.undulation += 1.0;
    }
  }
  for (const Peak& p : circular_peaks(negated(smooth))) {
    if (p.prominence >= kUndulationProminence && p.prominence < kLobeProminence) {
      out.undulation += 1.0;
    }
  }
  out.num_lobulations = static_cast<double>(lobes.size());

  if (lobes.size() >= 2) {
    // Lobe boundaries: deepest smoothed sample between consecutive peaks.
    const std::size_t q = lobes.size();
    std::vector<std::size_t> cuts(q);
    for (std::size_t k = 0; k < q; ++k) {
      const std::size_t from = lobes[k];
      const std::size_t to = lobes[(k + 1) % q] + (k + 1 == q ? n : 0);
      std::size_t best = from % n;
      for (std::size_t i = from; i <= to; ++i) {
        if (smooth[i % n] < smooth[best]) best = i % n;
      }
      cuts[k] = best;
    }
    std::vector<double> areas(q);
    for (std::size_t k = 0; k < q; ++k) {
      const std::size_t from = cuts[(k + q - 1) % q];
      std::size_t span = (cuts[k] + n - from) % n;
      if (span == 0) span = n;
      ExactSum area;
      for (std::size_t i = 0; i < span; ++i) area.add(d[(from + i) % n]);
      areas[k] = area.value();
    }
    const auto [lo, hi] = std::minmax_element(areas.begin(), areas.end());
    const double mean_area = exact_sum(areas) / static_cast<double>(q);
    out.lobulation_index = (*hi - *lo) / mean_area;
  }

  // Spectrum of the centred sequence; power normalized so its AC total is
  // the variance.
  std::vector<double> cosines(n), sines(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double angle = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n);
    cosines[k] = std::cos(angle);
    sines[k] = std::sin(angle);
  }
  double total = 0.0, high = 0.0;
  for (std::size_t h = 1; h < n; ++h) {
    double re = 0.0, im = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      const double v = d[k] - s.mean;
      const std::size_t idx = (h * k) % n;
      re += v * cosines[idx];
      im -= v * sines[idx];
    }
    const double power = (re * re + im * im) / static_cast<double>(n * n);
    total += power;
    if (std::min(h, n - h) > static_cast<std::size_t>(kSpiculationHarmonic)) high += power;
  }
  out.spiculation = std::clamp(high / std::max(total, kSpectralFloor), 0.0, 1.0);

  if (s.samples.size() == n && n >= 5) {
    std::size_t sharp = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const Point2 a = s.samples[(i + n - 2) % n];
      const Point2 b = s.samples[i];
      const Point2 c = s.samples[(i + 2) % n];
      const double ux = b.x - a.x, uy = b.y - a.y;
      const double vx = c.x - b.x, vy = c.y - b.y;
      const double cross = ux * vy - uy * vx;
      const double dot = ux * vx + uy * vy;
      const double turn = std::atan2(std::fabs(cross), dot) * 180.0 / std::numbers::pi;
      if (turn > kTurningAngleDeg) ++sharp;
    }
    out.angular = static_cast<double>(sharp) / static_cast<double>(n);
  }
  return out;
}

}  // namespace morphocad::features
