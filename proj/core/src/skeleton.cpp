#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

#include "morphocad/error.hpp"
#include "morphocad/geometry.hpp"

namespace morphocad::geometry {
namespace {

// Zhang-Suen neighbour order P2..P9: N, NE, E, SE, S, SW, W, NW.
constexpr std::array<int, 8> kNx = {0, 1, 1, 1, 0, -1, -1, -1};
constexpr std::array<int, 8> kNy = {-1, -1, 0, 1, 1, 1, 0, -1};

std::array<bool, 8> ring_of(const Grid& g, int x, int y) {
  std::array<bool, 8> r{};
  for (int k = 0; k < 8; ++k) {
    const int nx = x + kNx[k];
    const int ny = y + kNy[k];
    r[k] = g.inside(nx, ny) && g.at(nx, ny);
  }
  return r;
}

int neighbour_count(const std::array<bool, 8>& r) {
  return static_cast<int>(std::count(r.begin(), r.end(), true));
}

// Number of 0 -> 1 transitions walking once around the neighbourhood.
int crossing_number(const std::array<bool, 8>& r) {
  int t = 0;
  for (int k = 0; k < 8; ++k) t += (!r[k] && r[(k + 1) % 8]) ? 1 : 0;
  return t;
}

Grid crop(const Grid& g, int x0, int y0, int x1, int y1, int margin) {
  Grid out(x1 - x0 + 1 + 2 * margin, y1 - y0 + 1 + 2 * margin);
  for (int y = y0; y <= y1; ++y)
    for (int x = x0; x <= x1; ++x)
      if (g.at(x, y)) out.set(x - x0 + margin, y - y0 + margin, true);
  return out;
}

bool grid_less(const Grid& a, const Grid& b) {
  if (a.width != b.width) return a.width < b.width;
  if (a.height != b.height) return a.height < b.height;
  return a.cells < b.cells;
}

void zhang_suen(Grid& g) {
  std::vector<std::size_t> candidates;
  std::vector<std::uint8_t> queued(g.cells.size(), 0);
  for (int y = 0; y < g.height; ++y) {
    for (int x = 0; x < g.width; ++x) {
      if (!g.at(x, y)) continue;
      const auto r = ring_of(g, x, y);
      if (neighbour_count(r) < 8) {
        candidates.push_back(g.index(x, y));
        queued[g.index(x, y)] = 1;
      }
    }
  }
  std::size_t remaining = g.count();
  std::vector<std::size_t> doomed;
  bool changed = true;
  while (changed) {
    changed = false;
    for (int pass = 0; pass < 2; ++pass) {
      doomed.clear();
      for (std::size_t idx : candidates) {
        if (!g.cells[idx]) continue;
        const int x = static_cast<int>(idx % g.width);
        const int y = static_cast<int>(idx / g.width);
        const auto r = ring_of(g, x, y);
        const int b = neighbour_count(r);
        if (b < 2 || b > 6 || crossing_number(r) != 1) continue;
        // r[0]=P2 N, r[2]=P4 E, r[4]=P6 S, r[6]=P8 W
        const bool ok = pass == 0 ? (!(r[0] && r[2] && r[4]) && !(r[2] && r[4] && r[6]))
                                  : (!(r[0] && r[2] && r[6]) && !(r[0] && r[4] && r[6]));
        if (ok) doomed.push_back(idx);
      }
      if (doomed.empty()) continue;
      std::sort(doomed.begin(), doomed.end());
      // A 2x2 block would vanish entirely; keep one pixel of the last blob.
      if (doomed.size() == remaining) doomed.erase(doomed.begin());
      if (doomed.empty()) continue;
      for (std::size_t idx : doomed) g.cells[idx] = 0;
      remaining -= doomed.size();
      changed = true;

      std::vector<std::size_t> next;
      next.reserve(candidates.size() + doomed.size() * 2);
      std::fill(queued.begin(), queued.end(), 0);
      auto push = [&](std::size_t idx) {
        if (g.cells[idx] && !queued[idx]) {
          queued[idx] = 1;
          next.push_back(idx);
        }
      };
      for (std::size_t idx : candidates) push(idx);
      for (std::size_t idx : doomed) {
        const int x = static_cast<int>(idx % g.width);
        const int y = static_cast<int>(idx / g.width);
        for (int k = 0; k < 8; ++k) {
          const int nx = x + kNx[k];
          const int ny = y + kNy[k];
          if (g.inside(nx, ny)) push(g.index(nx, ny));
        }
      }
      candidates.swap(next);
    }
  }
}

bool is_branch(const Grid& g, int x, int y) { return crossing_number(ring_of(g, x, y)) >= 3; }

// Walks from each end point towards the first junction; walks that reach a
// junction within `prune_length` pixels are spurs and get erased.
void prune_spurs(Grid& g, double prune_length) {
  if (prune_length <= 0.0) return;
  std::vector<std::size_t> doomed;
  std::vector<std::size_t> path;
  std::vector<std::uint8_t> on_path(g.cells.size(), 0);
  for (int y = 0; y < g.height; ++y) {
    for (int x = 0; x < g.width; ++x) {
      if (!g.at(x, y) || crossing_number(ring_of(g, x, y)) != 1) continue;
      path.clear();
      path.push_back(g.index(x, y));
      on_path[g.index(x, y)] = 1;
      int cx = x, cy = y;
      bool spur = false;
      while (static_cast<double>(path.size()) < prune_length) {
        int nx = -1, ny = -1;
        bool junction = false;
        bool next_orthogonal = false;
        std::size_t added = 0;
        for (int k = 0; k < 8; ++k) {
          const int tx = cx + kNx[k];
          const int ty = cy + kNy[k];
          if (!g.inside(tx, ty) || !g.at(tx, ty) || on_path[g.index(tx, ty)]) continue;
          if (is_branch(g, tx, ty)) junction = true;
          // Prefer the 4-adjacent continuation; corner pixels ride along.
          const bool orthogonal = k % 2 == 0;
          if (nx < 0 || (orthogonal && !next_orthogonal)) {
            nx = tx;
            ny = ty;
            next_orthogonal = orthogonal;
          }
          ++added;
        }
        if (junction) {
          spur = true;
          break;
        }
        if (added == 0) break;  // reached the other end of a plain arc
        for (int k = 0; k < 8; ++k) {
          const int tx = cx + kNx[k];
          const int ty = cy + kNy[k];
          if (g.inside(tx, ty) && g.at(tx, ty) && !on_path[g.index(tx, ty)]) {
            on_path[g.index(tx, ty)] = 1;
            path.push_back(g.index(tx, ty));
          }
        }
        cx = nx;
        cy = ny;
      }
      for (std::size_t idx : path) on_path[idx] = 0;
      if (spur) doomed.insert(doomed.end(), path.begin(), path.end());
    }
  }
  for (std::size_t idx : doomed) g.cells[idx] = 0;
}

Skeleton summarize(Grid pixels) {
  Skeleton s;
  s.pixel_count = pixels.count();
  std::vector<std::uint8_t> branch(pixels.cells.size(), 0);
  for (int y = 0; y < pixels.height; ++y) {
    for (int x = 0; x < pixels.width; ++x) {
      if (!pixels.at(x, y)) continue;
      const auto r = ring_of(pixels, x, y);
      const int cn = crossing_number(r);
      if (cn == 1) ++s.end_points;
      if (cn >= 3) branch[pixels.index(x, y)] = 1;
    }
  }
  // Adjacent junction pixels form one branch point.
  std::vector<std::size_t> stack;
  for (std::size_t i = 0; i < branch.size(); ++i) {
    if (branch[i] != 1) continue;
    ++s.branch_points;
    branch[i] = 2;
    stack.push_back(i);
    while (!stack.empty()) {
      const std::size_t idx = stack.back();
      stack.pop_back();
      const int x = static_cast<int>(idx % pixels.width);
      const int y = static_cast<int>(idx / pixels.width);
      for (int dy = -2; dy <= 2; ++dy) {
        for (int dx = -2; dx <= 2; ++dx) {
          const int nx = x + dx;
          const int ny = y + dy;
          if (!pixels.inside(nx, ny)) continue;
          const std::size_t n = pixels.index(nx, ny);
          if (branch[n] == 1) {
            branch[n] = 2;
            stack.push_back(n);
          }
        }
      }
    }
  }
  s.pixels = std::move(pixels);
  return s;
}

}  // namespace

Skeleton skeletonize(const BinaryMask& mask, double prune_length) {
  const Grid& g = mask.grid();
  int x0 = g.width, x1 = -1, y0 = g.height, y1 = -1;
  for (int y = 0; y < g.height; ++y) {
    for (int x = 0; x < g.width; ++x) {
      if (!g.at(x, y)) continue;
      x0 = std::min(x0, x);
      x1 = std::max(x1, x);
      y0 = std::min(y0, y);
      y1 = std::max(y1, y);
    }
  }
  // Thin the lexicographically smallest of the four 90-degree rotations.
  std::array<Grid, 4> turns;
  turns[0] = crop(g, x0, y0, x1, y1, 1);
  for (int k = 1; k < 4; ++k) turns[k] = rotate90(turns[k - 1]);
  int best = 0;
  for (int k = 1; k < 4; ++k)
    if (grid_less(turns[k], turns[best])) best = k;

  Grid thin = turns[best];
  zhang_suen(thin);
  prune_spurs(thin, prune_length);
  for (int k = best; k % 4 != 0; ++k) thin = rotate90(thin);

  Grid full(g.width, g.height);
  for (int y = 0; y < thin.height; ++y)
    for (int x = 0; x < thin.width; ++x)
      if (thin.at(x, y)) full.set(x + x0 - 1, y + y0 - 1, true);
  return summarize(std::move(full));
}

Skeleton skeletonize(const BinaryMask& mask) {
  const double diameter = 2.0 * std::sqrt(static_cast<double>(mask.count()) / std::numbers::pi);
  return skeletonize(mask, 0.05 * diameter);
}

}  // namespace morphocad::geometry
