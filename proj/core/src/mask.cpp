#include <algorithm>
#include <cmath>
#include <string>

#include "morphocad/error.hpp"
#include "morphocad/geometry.hpp"

namespace morphocad::geometry {
namespace {

constexpr int kDx4[4] = {1, 0, -1, 0};
constexpr int kDy4[4] = {0, 1, 0, -1};

// Labels 4-connected foreground components; returns the component count.
int label_components(const Grid& g, std::vector<int>& labels, std::vector<std::size_t>& sizes) {
  labels.assign(g.cells.size(), -1);
  sizes.clear();
  std::vector<std::size_t> stack;
  int next = 0;
  for (std::size_t start = 0; start < g.cells.size(); ++start) {
    if (!g.cells[start] || labels[start] >= 0) continue;
    std::size_t size = 0;
    labels[start] = next;
    stack.push_back(start);
    while (!stack.empty()) {
      const std::size_t idx = stack.back();
      stack.pop_back();
      ++size;
      const int x = static_cast<int>(idx % g.width);
      const int y = static_cast<int>(idx / g.width);
      for (int k = 0; k < 4; ++k) {
        const int nx = x + kDx4[k];
        const int ny = y + kDy4[k];
        if (!g.inside(nx, ny)) continue;
        const std::size_t nidx = g.index(nx, ny);
        if (g.cells[nidx] && labels[nidx] < 0) {
          labels[nidx] = next;
          stack.push_back(nidx);
        }
      }
    }
    sizes.push_back(size);
    ++next;
  }
  return next;
}

// Background is 8-connected (dual of the 4-connected foreground); any
// background pixel not reachable from the border is a hole.
void fill_holes(Grid& g) {
  std::vector<std::uint8_t> outside(g.cells.size(), 0);
  std::vector<std::size_t> stack;
  auto seed = [&](int x, int y) {
    const std::size_t idx = g.index(x, y);
    if (!g.cells[idx] && !outside[idx]) {
      outside[idx] = 1;
      stack.push_back(idx);
    }
  };
  for (int x = 0; x < g.width; ++x) {
    seed(x, 0);
    seed(x, g.height - 1);
  }
  for (int y = 0; y < g.height; ++y) {
    seed(0, y);
    seed(g.width - 1, y);
  }
  while (!stack.empty()) {
    const std::size_t idx = stack.back();
    stack.pop_back();
    const int x = static_cast<int>(idx % g.width);
    const int y = static_cast<int>(idx / g.width);
    for (int dy = -1; dy <= 1; ++dy) {
      for (int dx = -1; dx <= 1; ++dx) {
        const int nx = x + dx;
        const int ny = y + dy;
        if (g.inside(nx, ny)) seed(nx, ny);
      }
    }
  }
  for (std::size_t i = 0; i < g.cells.size(); ++i) {
    if (!outside[i]) g.cells[i] = 1;
  }
}

void require_margin(const Grid& g) {
  for (int x = 0; x < g.width; ++x) {
    if (g.at(x, 0) || g.at(x, g.height - 1)) {
      throw Error(ErrorKind::OutOfBounds, "mask foreground touches the grid border");
    }
  }
  for (int y = 0; y < g.height; ++y) {
    if (g.at(0, y) || g.at(g.width - 1, y)) {
      throw Error(ErrorKind::OutOfBounds, "mask foreground touches the grid border");
    }
  }
}

void require_shape(const Grid& g) {
  if (g.width <= 0 || g.height <= 0 ||
      g.cells.size() != static_cast<std::size_t>(g.width) * g.height) {
    throw Error(ErrorKind::InvalidParameter, "grid dimensions do not match cell count");
  }
}

}  // namespace

std::size_t Grid::count() const {
  return static_cast<std::size_t>(std::count_if(cells.begin(), cells.end(),
                                                [](std::uint8_t c) { return c != 0; }));
}

BinaryMask BinaryMask::from_grid(Grid grid, std::optional<double> spacing_mm) {
  require_shape(grid);
  if (spacing_mm && !(*spacing_mm > 0.0)) {
    throw Error(ErrorKind::InvalidParameter, "pixel spacing must be positive");
  }
  for (auto& c : grid.cells) c = c ? 1 : 0;
  fill_holes(grid);
  std::vector<int> labels;
  std::vector<std::size_t> sizes;
  const int components = label_components(grid, labels, sizes);
  if (components == 0) throw Error(ErrorKind::DegenerateRegion, "mask has no foreground");
  if (components > 1) {
    throw Error(ErrorKind::Topology, "mask has " + std::to_string(components) +
                                         " 4-connected foreground components");
  }
  require_margin(grid);
  const std::size_t count = sizes[0];
  return BinaryMask(std::move(grid), count, spacing_mm);
}

BinaryMask BinaryMask::largest_component(const Grid& grid, std::optional<double> spacing_mm) {
  require_shape(grid);
  std::vector<int> labels;
  std::vector<std::size_t> sizes;
  const int components = label_components(grid, labels, sizes);
  if (components == 0) throw Error(ErrorKind::DegenerateRegion, "mask has no foreground");
  const int keep = static_cast<int>(std::max_element(sizes.begin(), sizes.end()) - sizes.begin());
  Grid out(grid.width, grid.height);
  for (std::size_t i = 0; i < labels.size(); ++i) out.cells[i] = labels[i] == keep ? 1 : 0;
  return from_grid(std::move(out), spacing_mm);
}

BinaryMask rasterize(const Contour& contour, int width, int height) {
  if (width < 3 || height < 3) throw Error(ErrorKind::InvalidParameter, "grid too small");
  const auto& pts = contour.points();
  for (const Point2& p : pts) {
    if (p.x < 0.5 || p.y < 0.5 || p.x > width - 1.5 || p.y > height - 1.5) {
      throw Error(ErrorKind::OutOfBounds, "contour exceeds the raster grid (with margin)");
    }
  }
  Grid grid(width, height);
  const std::size_t n = pts.size();
  std::vector<double> xs;
  for (int y = 1; y < height - 1; ++y) {
    const double yc = y;
    xs.clear();
    for (std::size_t i = 0; i < n; ++i) {
      const Point2 a = pts[i];
      const Point2 b = pts[(i + 1) % n];
      if ((a.y <= yc && yc < b.y) || (b.y <= yc && yc < a.y)) {
        xs.push_back(a.x + (yc - a.y) * (b.x - a.x) / (b.y - a.y));
      }
    }
    std::sort(xs.begin(), xs.end());
    for (std::size_t k = 0; k + 1 < xs.size(); k += 2) {
      const int x0 = static_cast<int>(std::ceil(xs[k]));
      const int x1 = static_cast<int>(std::ceil(xs[k + 1]));
      for (int x = std::max(x0, 0); x < std::min(x1, width); ++x) grid.set(x, y, true);
    }
  }
  if (grid.count() == 0) {
    throw Error(ErrorKind::DegenerateRegion, "contour covers no pixel centre");
  }
  return BinaryMask::largest_component(grid, contour.spacing());
}

LocalRaster rasterize_local(const Contour& contour, int margin) {
  if (margin < 1) throw Error(ErrorKind::InvalidParameter, "raster margin must be >= 1");
  const auto& pts = contour.points();
  double minx = pts[0].x, maxx = pts[0].x, miny = pts[0].y, maxy = pts[0].y;
  for (const Point2& p : pts) {
    minx = std::min(minx, p.x);
    maxx = std::max(maxx, p.x);
    miny = std::min(miny, p.y);
    maxy = std::max(maxy, p.y);
  }
  const int ox = static_cast<int>(std::floor(minx)) - margin;
  const int oy = static_cast<int>(std::floor(miny)) - margin;
  const int width = static_cast<int>(std::ceil(maxx)) - ox + margin + 1;
  const int height = static_cast<int>(std::ceil(maxy)) - oy + margin + 1;
  std::vector<Point2> shifted = pts;
  for (Point2& p : shifted) {
    p.x -= ox;
    p.y -= oy;
  }
  Contour local(std::move(shifted), contour.spacing());
  return {rasterize(local, width, height), ox, oy};
}

Contour trace_boundary(const BinaryMask& mask) {
  const Grid& g = mask.grid();
  int minx = g.width, maxx = -1, miny = g.height, maxy = -1;
  int sx = -1, sy = -1;
  for (int y = 0; y < g.height; ++y) {
    for (int x = 0; x < g.width; ++x) {
      if (!g.at(x, y)) continue;
      if (sx < 0) {
        sx = x;
        sy = y;
      }
      minx = std::min(minx, x);
      maxx = std::max(maxx, x);
      miny = std::min(miny, y);
      maxy = std::max(maxy, y);
    }
  }
  if (sx < 0 || maxx == minx || maxy == miny) {
    throw Error(ErrorKind::DegenerateRegion,
                "mask foreground spans a single row or column; boundary is degenerate");
  }

  // Crack following: p is foreground, p + d is background, travel along t.
  auto fg = [&](int x, int y) { return g.inside(x, y) && g.at(x, y); };
  int px = sx, py = sy, dx = 0, dy = -1;
  const int px0 = px, py0 = py, dx0 = dx, dy0 = dy;
  std::vector<Point2> ring;
  do {
    ring.push_back({px + dx / 2.0, py + dy / 2.0});
    const int tx = -dy;
    const int ty = dx;
    const bool ahead_fg = fg(px + tx, py + ty);
    const bool ahead_bg_side_fg = fg(px + dx + tx, py + dy + ty);
    if (!ahead_fg) {
      // Turn around p. Diagonal foreground stays disconnected here.
      dx = tx;
      dy = ty;
    } else if (!ahead_bg_side_fg) {
      px += tx;
      py += ty;
    } else {
      px = px + dx + tx;
      py = py + dy + ty;
      const int ndx = -tx;
      const int ndy = -ty;
      dx = ndx;
      dy = ndy;
    }
  } while (!(px == px0 && py == py0 && dx == dx0 && dy == dy0));

  if (signed_area(ring) < 0.0) std::reverse(ring.begin(), ring.end());

  std::vector<Point2> smooth = ring;
  const std::size_t n = smooth.size();
  std::vector<Point2> next(n);
  for (int pass = 0; pass < 3; ++pass) {
    for (std::size_t i = 0; i < n; ++i) {
      const Point2 a = smooth[(i + n - 1) % n];
      const Point2 b = smooth[i];
      const Point2 c = smooth[(i + 1) % n];
      next[i] = {(a.x + 2.0 * b.x + c.x) / 4.0, (a.y + 2.0 * b.y + c.y) / 4.0};
    }
    smooth.swap(next);
  }
  try {
    return Contour(std::move(smooth), mask.spacing());
  } catch (const Error&) {
    // Smoothing can pinch one-pixel necks; the raw crack polygon is simple.
    return Contour(std::move(ring), mask.spacing());
  }
}

Grid rotate90(const Grid& grid) {
  Grid out(grid.height, grid.width);
  for (int y = 0; y < grid.height; ++y) {
    for (int x = 0; x < grid.width; ++x) {
      out.set(grid.height - 1 - y, x, grid.at(x, y));
    }
  }
  return out;
}

BinaryMask rotate90(const BinaryMask& mask) {
  return BinaryMask::from_grid(rotate90(mask.grid()), mask.spacing());
}

}  // namespace morphocad::geometry
