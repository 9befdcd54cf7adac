#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace morphocad::geometry {

struct Point2 {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point2&, const Point2&) = default;
};

/// Closed simple polygon in pixel units, counter-clockwise (positive shoelace
/// area in the x-right/y-down image frame), closure implicit.
///
/// Construction removes consecutive duplicate vertices and then rejects
/// non-finite coordinates, fewer than 3 distinct vertices, self-intersection
/// and clockwise orientation with ErrorKind::InvalidContour.
class Contour {
 public:
  explicit Contour(std::vector<Point2> points,
                   std::optional<double> spacing_mm = std::nullopt);

  const std::vector<Point2>& points() const noexcept { return points_; }
  std::size_t size() const noexcept { return points_.size(); }
  /// Physical size of one pixel in mm (isotropic). Absent for synthetic
  /// geometry that never needs physical units.
  std::optional<double> spacing() const noexcept { return spacing_; }

 private:
  std::vector<Point2> points_;
  std::optional<double> spacing_;
};

/// True when no two non-adjacent edges touch and no adjacent edges fold back.
bool is_simple(std::span<const Point2> ring);
double signed_area(std::span<const Point2> ring);

struct PolygonMetrics {
  double area = 0.0;
  double perimeter = 0.0;
  Point2 centroid;
};

PolygonMetrics polygon_metrics(const Contour& contour);

/// Working frame shared by the feature extractors.
///
/// Coordinates are taken relative to the bounding-box centre and every
/// accumulation is correctly rounded, so translating a contour by an exactly
/// representable offset, or rotating a traced mask by 90 degrees, maps every
/// derived quantity exactly (up to the sign/swap the rotation implies).
struct PolygonFrame {
  Point2 origin;                     // bbox centre, contour coordinates
  double width = 0.0;                // bbox extent along x
  double height = 0.0;               // bbox extent along y
  std::vector<Point2> local;         // vertices minus origin
  std::vector<Point2> centered;      // vertices minus centroid
  std::vector<double> edge_lengths;  // edge i joins vertex i and i+1
  double area = 0.0;
  double perimeter = 0.0;
  Point2 centroid;                   // relative to origin
};

PolygonFrame make_frame(const Contour& contour);

/// Indices of the strictly convex hull vertices, counter-clockwise, starting
/// from the lowest-index hull vertex so that indices increase cyclically in
/// ring order for simple counter-clockwise input.
std::vector<std::size_t> convex_hull_indices(std::span<const Point2> points);
Contour convex_hull(const Contour& contour);

bool point_in_polygon(std::span<const Point2> ring, Point2 p);

/// Ellipse with the same area and second central moments as a region.
struct FittedEllipse {
  Point2 center;
  double semi_major = 0.0;       // pixels
  double semi_minor = 0.0;       // pixels
  double orientation_deg = 0.0;  // major axis angle from +x toward +y, [0, 180)
  double area = 0.0;             // equals the region area
  /// Central second moments per unit area: {xx, xy, yy}.
  std::array<double, 3> covariance{};
};

class BinaryMask;

FittedEllipse fit_equivalent_ellipse(const Contour& contour);
FittedEllipse fit_equivalent_ellipse(const BinaryMask& mask);

/// Circumference of an ellipse with semi-axes a >= b via the complete
/// elliptic integral of the second kind.
double ellipse_perimeter(double a, double b);

/// Plain row-major raster, x = column, y = row, pixel centres at integers.
struct Grid {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> cells;

  Grid() = default;
  Grid(int w, int h) : width(w), height(h), cells(static_cast<std::size_t>(w) * h, 0) {}

  bool at(int x, int y) const { return cells[index(x, y)] != 0; }
  void set(int x, int y, bool v) { cells[index(x, y)] = v ? 1 : 0; }
  bool inside(int x, int y) const { return x >= 0 && y >= 0 && x < width && y < height; }
  std::size_t index(int x, int y) const {
    return static_cast<std::size_t>(y) * width + x;
  }
  std::size_t count() const;

  friend bool operator==(const Grid&, const Grid&) = default;
};

/// Lesion region raster. Invariants: exactly one 4-connected foreground
/// component, no holes (background is 8-connected to the border), and a
/// background margin of at least one pixel on every side.
class BinaryMask {
 public:
  /// Fills holes, then validates. Multiple components raise
  /// ErrorKind::Topology; foreground on the border raises OutOfBounds.
  static BinaryMask from_grid(Grid grid, std::optional<double> spacing_mm = std::nullopt);
  /// Keeps the largest 4-connected component (ties: first in raster order),
  /// fills holes, validates the margin.
  static BinaryMask largest_component(const Grid& grid,
                                      std::optional<double> spacing_mm = std::nullopt);

  int width() const noexcept { return grid_.width; }
  int height() const noexcept { return grid_.height; }
  bool at(int x, int y) const { return grid_.at(x, y); }
  std::size_t count() const noexcept { return count_; }
  const Grid& grid() const noexcept { return grid_; }
  std::optional<double> spacing() const noexcept { return spacing_; }

  friend bool operator==(const BinaryMask& a, const BinaryMask& b) {
    return a.grid_ == b.grid_;
  }

 private:
  BinaryMask(Grid grid, std::size_t count, std::optional<double> spacing)
      : grid_(std::move(grid)), count_(count), spacing_(spacing) {}

  Grid grid_;
  std::size_t count_ = 0;
  std::optional<double> spacing_;
};

/// Pixel (x, y) is foreground when its centre lies inside the polygon
/// (half-open scanline rule). The contour must keep half a pixel clear of
/// the outer pixel ring, otherwise ErrorKind::OutOfBounds. Slivers cut off
/// by digitization are dropped (largest 4-connected component is kept).
BinaryMask rasterize(const Contour& contour, int width, int height);

struct LocalRaster {
  BinaryMask mask;
  int offset_x = 0;  // contour x = mask x + offset_x
  int offset_y = 0;
};

/// Rasterizes on the smallest integer-aligned grid holding the contour plus
/// `margin` background pixels. Integer translations of the contour only
/// change the offsets.
LocalRaster rasterize_local(const Contour& contour, int margin = 2);

/// Outer boundary of the mask as a polygon through the midpoints of the
/// foreground/background pixel cracks, smoothed with three [1 2 1]/4 passes.
/// Masks whose foreground spans a single row or column raise
/// ErrorKind::DegenerateRegion.
Contour trace_boundary(const BinaryMask& mask);

/// Closing with the digital Euclidean disk {v : |v| <= radius}.
BinaryMask morphological_close(const BinaryMask& mask, double radius_px);

struct Skeleton {
  Grid pixels;
  int branch_points = 0;
  int end_points = 0;
  std::size_t pixel_count = 0;
};

/// Zhang-Suen thinning followed by removal of end spurs shorter than
/// `prune_length` pixels. Thinning runs on the canonical 90-degree
/// orientation of the mask so the counts are rotation invariant.
Skeleton skeletonize(const BinaryMask& mask, double prune_length);
/// Prune length defaults to 5% of the equivalent diameter.
Skeleton skeletonize(const BinaryMask& mask);

/// Rotates the raster by 90 degrees: (x, y) -> (height - 1 - y, x).
Grid rotate90(const Grid& grid);
BinaryMask rotate90(const BinaryMask& mask);

Contour translated(const Contour& contour, Point2 offset);
Contour scaled(const Contour& contour, double factor);

}  // namespace morphocad::geometry
