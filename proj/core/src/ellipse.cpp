#include <boost/math/special_functions/ellint_2.hpp>
#include <cmath>
#include <numbers>

#include "morphocad/error.hpp"
#include "morphocad/geometry.hpp"
#include "morphocad/numeric.hpp"

namespace morphocad::geometry {
namespace {

// Half the angle of (cxx - cyy, 2 cxy), assembled from its first-quadrant
// reference angle so that swapping the axes lands exactly 90 degrees away
// up to one rounding.
double orientation(double cxx, double cxy, double cyy) {
  const double c = 2.0 * cxy;
  const double d = cxx - cyy;
  const double h = std::atan2(std::fabs(c), std::fabs(d)) * (90.0 / std::numbers::pi);
  double theta;
  if (c >= 0.0) {
    theta = d >= 0.0 ? h : 90.0 - h;
  } else {
    theta = d < 0.0 ? 90.0 + h : 180.0 - h;
  }
  return theta >= 180.0 ? theta - 180.0 : theta;
}

// Builds the area-matched ellipse from central moments per unit area.
FittedEllipse from_moments(Point2 center, double area, double cxx, double cxy, double cyy) {
  const double half_trace = (cxx + cyy) / 2.0;
  const double half_diff = (cxx - cyy) / 2.0;
  const double disc = std::sqrt(half_diff * half_diff + cxy * cxy);
  const double major = half_trace + disc;
  const double minor = half_trace - disc;
  if (!(major > 0.0) || !(minor > 1e-12 * major)) {
    throw Error(ErrorKind::DegenerateRegion, "region has vanishing second moments");
  }
  // A uniform ellipse with semi-axes a, b has variances a^2/4 and b^2/4.
  const double a0 = 2.0 * std::sqrt(major);
  const double b0 = 2.0 * std::sqrt(minor);
  const double rescale = std::sqrt(area / (std::numbers::pi * a0 * b0));

  FittedEllipse e;
  e.center = center;
  e.semi_major = rescale * a0;
  e.semi_minor = rescale * b0;
  e.area = area;
  e.covariance = {cxx, cxy, cyy};
  e.orientation_deg = orientation(cxx, cxy, cyy);
  return e;
}

}  // namespace

FittedEllipse fit_equivalent_ellipse(const Contour& contour) {
  const PolygonFrame f = make_frame(contour);
  const auto& c = f.centered;
  const std::size_t n = c.size();
  ExactSum sxx, sxy, syy;
  for (std::size_t i = 0; i < n; ++i) {
    const Point2 a = c[i];
    const Point2 b = c[(i + 1) % n];
    const double cross = a.x * b.y - b.x * a.y;
    sxx.add((a.x * a.x + a.x * b.x + b.x * b.x) * cross);
    syy.add((a.y * a.y + a.y * b.y + b.y * b.y) * cross);
    // Grouped so a 90-degree turn maps every term to its exact negation.
    const double mixed = a.x * b.y + b.x * a.y;
    const double same = a.x * a.y + b.x * b.y;
    sxy.add((mixed + 2.0 * same) * cross);
  }
  const double area = f.area;
  const double cxx = sxx.value() / 12.0 / area;
  const double cyy = syy.value() / 12.0 / area;
  const double cxy = sxy.value() / 24.0 / area;
  const Point2 center{f.origin.x + f.centroid.x, f.origin.y + f.centroid.y};
  return from_moments(center, area, cxx, cxy, cyy);
}

FittedEllipse fit_equivalent_ellipse(const BinaryMask& mask) {
  const double n = static_cast<double>(mask.count());
  if (n < 1.0) throw Error(ErrorKind::DegenerateRegion, "empty region");
  ExactSum sx, sy;
  for (int y = 0; y < mask.height(); ++y)
    for (int x = 0; x < mask.width(); ++x)
      if (mask.at(x, y)) {
        sx.add(x);
        sy.add(y);
      }
  const double mx = sx.value() / n;
  const double my = sy.value() / n;
  ExactSum sxx, sxy, syy;
  for (int y = 0; y < mask.height(); ++y)
    for (int x = 0; x < mask.width(); ++x)
      if (mask.at(x, y)) {
        const double dx = x - mx;
        const double dy = y - my;
        sxx.add(dx * dx);
        sxy.add(dx * dy);
        syy.add(dy * dy);
      }
  return from_moments({mx, my}, n, sxx.value() / n, sxy.value() / n, syy.value() / n);
}

double ellipse_perimeter(double a, double b) {
  if (!(a > 0.0) || !(b > 0.0)) {
    throw Error(ErrorKind::InvalidParameter, "ellipse semi-axes must be positive");
  }
  if (b > a) std::swap(a, b);
  const double e = std::sqrt(1.0 - (b * b) / (a * a));
  return 4.0 * a * boost::math::ellint_2(e);
}

}  // namespace morphocad::geometry
