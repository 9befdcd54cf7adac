#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "morphocad/error.hpp"
#include "morphocad/geometry.hpp"
#include "morphocad/numeric.hpp"

namespace morphocad::geometry {
namespace {

double orient(Point2 a, Point2 b, Point2 c) {
  return (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x);
}

int sign(double v) { return (v > 0.0) - (v < 0.0); }

bool on_segment(Point2 a, Point2 b, Point2 p) {
  return std::min(a.x, b.x) <= p.x && p.x <= std::max(a.x, b.x) &&
         std::min(a.y, b.y) <= p.y && p.y <= std::max(a.y, b.y);
}

bool segments_touch(Point2 a, Point2 b, Point2 c, Point2 d) {
  const int o1 = sign(orient(a, b, c));
  const int o2 = sign(orient(a, b, d));
  const int o3 = sign(orient(c, d, a));
  const int o4 = sign(orient(c, d, b));
  if (o1 * o2 < 0 && o3 * o4 < 0) return true;
  if (o1 == 0 && on_segment(a, b, c)) return true;
  if (o2 == 0 && on_segment(a, b, d)) return true;
  if (o3 == 0 && on_segment(c, d, a)) return true;
  if (o4 == 0 && on_segment(c, d, b)) return true;
  return false;
}

// Consecutive edges a->b->c fold back onto each other.
bool folds_back(Point2 a, Point2 b, Point2 c) {
  if (orient(a, b, c) != 0.0) return false;
  const double dot = (b.x - a.x) * (c.x - b.x) + (b.y - a.y) * (c.y - b.y);
  return dot < 0.0;
}

}  // namespace

double signed_area(std::span<const Point2> ring) {
  ExactSum acc;
  const std::size_t n = ring.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Point2 a = ring[i];
    const Point2 b = ring[(i + 1) % n];
    acc.add(a.x * b.y - b.x * a.y);
  }
  return acc.value() / 2.0;
}

bool is_simple(std::span<const Point2> ring) {
  const std::size_t n = ring.size();
  if (n < 3) return false;
  for (std::size_t i = 0; i < n; ++i) {
    if (folds_back(ring[i], ring[(i + 1) % n], ring[(i + 2) % n])) return false;
  }
  if (n == 3) return true;

  // Bucket edges on a uniform grid; only edges sharing a cell are tested.
  double minx = ring[0].x, maxx = ring[0].x, miny = ring[0].y, maxy = ring[0].y;
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    minx = std::min(minx, ring[i].x);
    maxx = std::max(maxx, ring[i].x);
    miny = std::min(miny, ring[i].y);
    maxy = std::max(maxy, ring[i].y);
    const Point2 b = ring[(i + 1) % n];
    total += std::hypot(b.x - ring[i].x, b.y - ring[i].y);
  }
  const double span = std::max(maxx - minx, maxy - miny);
  double cell = std::max(2.0 * total / static_cast<double>(n), span / 512.0);
  if (!(cell > 0.0)) cell = 1.0;
  const int cols = std::max(1, static_cast<int>((maxx - minx) / cell) + 1);
  const int rows = std::max(1, static_cast<int>((maxy - miny) / cell) + 1);
  std::vector<std::vector<std::uint32_t>> buckets(static_cast<std::size_t>(cols) * rows);
  auto cell_of = [&](double v, double lo, int count) {
    return std::clamp(static_cast<int>((v - lo) / cell), 0, count - 1);
  };
  for (std::size_t i = 0; i < n; ++i) {
    const Point2 a = ring[i];
    const Point2 b = ring[(i + 1) % n];
    const int c0 = cell_of(std::min(a.x, b.x), minx, cols);
    const int c1 = cell_of(std::max(a.x, b.x), minx, cols);
    const int r0 = cell_of(std::min(a.y, b.y), miny, rows);
    const int r1 = cell_of(std::max(a.y, b.y), miny, rows);
    for (int r = r0; r <= r1; ++r)
      for (int c = c0; c <= c1; ++c)
        buckets[static_cast<std::size_t>(r) * cols + c].push_back(static_cast<std::uint32_t>(i));
  }
  for (const auto& bucket : buckets) {
    for (std::size_t u = 0; u < bucket.size(); ++u) {
      for (std::size_t v = u + 1; v < bucket.size(); ++v) {
        const std::size_t i = std::min(bucket[u], bucket[v]);
        const std::size_t j = std::max(bucket[u], bucket[v]);
        if (j == i + 1 || (i == 0 && j == n - 1)) continue;
        if (segments_touch(ring[i], ring[(i + 1) % n], ring[j], ring[(j + 1) % n])) {
          return false;
        }
      }
    }
  }
  return true;
}

Contour::Contour(std::vector<Point2> points, std::optional<double> spacing_mm)
    : spacing_(spacing_mm) {
  if (spacing_ && !(std::isfinite(*spacing_) && *spacing_ > 0.0)) {
    throw Error(ErrorKind::InvalidParameter, "pixel spacing must be positive");
  }
  for (const Point2& p : points) {
    if (!std::isfinite(p.x) || !std::isfinite(p.y)) {
      throw Error(ErrorKind::InvalidContour, "contour has non-finite coordinates");
    }
  }
  points_.reserve(points.size());
  for (const Point2& p : points) {
    if (points_.empty() || !(points_.back() == p)) points_.push_back(p);
  }
  while (points_.size() > 1 && points_.front() == points_.back()) points_.pop_back();
  if (points_.size() < 3) {
    throw Error(ErrorKind::InvalidContour,
                "contour needs at least 3 distinct vertices, got " +
                    std::to_string(points_.size()));
  }
  if (!is_simple(points_)) {
    throw Error(ErrorKind::InvalidContour, "contour self-intersects");
  }
  const double area = signed_area(points_);
  if (area < 0.0) {
    throw Error(ErrorKind::InvalidContour, "contour is clockwise; counter-clockwise required");
  }
  if (!(area > 0.0)) throw Error(ErrorKind::InvalidContour, "contour has zero area");
}

PolygonFrame make_frame(const Contour& contour) {
  const auto& pts = contour.points();
  const std::size_t n = pts.size();
  PolygonFrame f;
  double minx = pts[0].x, maxx = pts[0].x, miny = pts[0].y, maxy = pts[0].y;
  for (const Point2& p : pts) {
    minx = std::min(minx, p.x);
    maxx = std::max(maxx, p.x);
    miny = std::min(miny, p.y);
    maxy = std::max(maxy, p.y);
  }
  f.origin = {(minx + maxx) / 2.0, (miny + maxy) / 2.0};
  f.width = maxx - minx;
  f.height = maxy - miny;

  f.local.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    f.local[i] = {pts[i].x - f.origin.x, pts[i].y - f.origin.y};
  }

  ExactSum twice_area, sx, sy;
  for (std::size_t i = 0; i < n; ++i) {
    const Point2 a = f.local[i];
    const Point2 b = f.local[(i + 1) % n];
    const double cross = a.x * b.y - b.x * a.y;
    twice_area.add(cross);
    sx.add((a.x + b.x) * cross);
    sy.add((a.y + b.y) * cross);
  }
  const double a2 = twice_area.value();
  f.area = a2 / 2.0;
  f.centroid = {sx.value() / (3.0 * a2), sy.value() / (3.0 * a2)};

  f.centered.resize(n);
  f.edge_lengths.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    f.centered[i] = {f.local[i].x - f.centroid.x, f.local[i].y - f.centroid.y};
    const Point2 a = f.local[i];
    const Point2 b = f.local[(i + 1) % n];
    const double dx = b.x - a.x;
    const double dy = b.y - a.y;
    f.edge_lengths[i] = std::sqrt(dx * dx + dy * dy);
  }
  f.perimeter = exact_sum(f.edge_lengths);
  return f;
}

PolygonMetrics polygon_metrics(const Contour& contour) {
  const PolygonFrame f = make_frame(contour);
  return {f.area, f.perimeter,
          {f.origin.x + f.centroid.x, f.origin.y + f.centroid.y}};
}

std::vector<std::size_t> convex_hull_indices(std::span<const Point2> points) {
  const std::size_t n = points.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (points[a].x != points[b].x) return points[a].x < points[b].x;
    if (points[a].y != points[b].y) return points[a].y < points[b].y;
    return a < b;
  });
  std::vector<std::size_t> hull(2 * n);
  std::size_t k = 0;
  for (std::size_t i = 0; i < n; ++i) {
    while (k >= 2 &&
           orient(points[hull[k - 2]], points[hull[k - 1]], points[order[i]]) <= 0.0)
      --k;
    hull[k++] = order[i];
  }
  for (std::size_t i = n - 1, lower = k + 1; i-- > 0;) {
    while (k >= lower &&
           orient(points[hull[k - 2]], points[hull[k - 1]], points[order[i]]) <= 0.0)
      --k;
    hull[k++] = order[i];
  }
  hull.resize(k > 1 ? k - 1 : k);
  const auto first = std::min_element(hull.begin(), hull.end());
  std::rotate(hull.begin(), first, hull.end());
  return hull;
}

Contour convex_hull(const Contour& contour) {
  const PolygonFrame f = make_frame(contour);
  std::vector<Point2> hull;
  for (std::size_t i : convex_hull_indices(f.local)) hull.push_back(contour.points()[i]);
  return Contour(std::move(hull), contour.spacing());
}

bool point_in_polygon(std::span<const Point2> ring, Point2 p) {
  bool inside = false;
  const std::size_t n = ring.size();
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const Point2 a = ring[i];
    const Point2 b = ring[j];
    if ((a.y > p.y) != (b.y > p.y)) {
      const double x = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
      if (p.x < x) inside = !inside;
    }
  }
  return inside;
}

Contour translated(const Contour& contour, Point2 offset) {
  std::vector<Point2> pts = contour.points();
  for (Point2& p : pts) {
    p.x += offset.x;
    p.y += offset.y;
  }
  return Contour(std::move(pts), contour.spacing());
}

Contour scaled(const Contour& contour, double factor) {
  if (!(factor > 0.0)) throw Error(ErrorKind::InvalidParameter, "scale factor must be positive");
  std::vector<Point2> pts = contour.points();
  for (Point2& p : pts) {
    p.x *= factor;
    p.y *= factor;
  }
  return Contour(std::move(pts), contour.spacing());
}

}  // namespace morphocad::geometry
