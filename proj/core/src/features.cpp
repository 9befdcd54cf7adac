#include <algorithm>
#include <cctype>
#include <cmath>
#include <numbers>
#include <string>

#include "morphocad/error.hpp"
#include "morphocad/features.hpp"
#include "morphocad/numeric.hpp"

namespace morphocad::features {

using geometry::BinaryMask;
using geometry::Contour;
using geometry::Point2;

namespace {

constexpr std::array<std::string_view, 31> kNames = {
    "angular_characteristics",
    "area_ratio",
    "aspect_ratio",
    "branch_pattern",
    "circularity",
    "contour_roughness",
    "convexity",
    "dwr",
    "ellipsoidal_shape",
    "elliptic_normalized_circumference",
    "elliptic_normalized_skeleton",
    "extent",
    "lesion_size",
    "lobulation_index",
    "long_short_axis_ratio",
    "morphological_closing_ratio",
    "normalized_residual_value",
    "nrl_entropy",
    "nrl_mean",
    "nrl_std",
    "nrl_zero_crossing",
    "number_of_lobulations",
    "nspd",
    "orientation",
    "overlap_ratio",
    "roundness",
    "shape_class",
    "solidity",
    "spiculation",
    "undulation_characteristics",
    "birads_code",
};

constexpr std::array<std::string_view, 8> kBirads = {"1", "2", "3", "4a", "4b", "4c", "5", "6"};

constexpr double kPocketFraction = 0.01;
constexpr double kProtrusionProminence = 0.05;
constexpr double kSkeletonDiameter = 160.0;

double ring_cross_sum(const std::vector<Point2>& pts, const std::vector<std::size_t>& idx) {
  ExactSum acc;
  for (std::size_t k = 0; k < idx.size(); ++k) {
    const Point2 a = pts[idx[k]];
    const Point2 b = pts[idx[(k + 1) % idx.size()]];
    acc.add(a.x * b.y - b.x * a.y);
  }
  return acc.value();
}

// Extent of the chord through the origin along +y (vertical) or +x.
double chord(const std::vector<Point2>& u, bool vertical) {
  double lo = 0.0, hi = 0.0;
  bool any = false;
  auto take = [&](double v) {
    if (!any) {
      lo = hi = v;
      any = true;
    } else {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  };
  const std::size_t n = u.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Point2 a = u[i];
    const Point2 b = u[(i + 1) % n];
    const double ac = vertical ? a.x : a.y;
    const double bc = vertical ? b.x : b.y;
    const double aw = vertical ? a.y : a.x;
    const double bw = vertical ? b.y : b.x;
    if (!((ac <= 0.0 && 0.0 <= bc) || (bc <= 0.0 && 0.0 <= ac))) continue;
    if (ac == bc) {
      take(aw);
      take(bw);
    } else {
      take(aw + (-ac) * (bw - aw) / (bc - ac));
    }
  }
  return hi - lo;
}

PlaneSource with_spacing(const PlaneSource& source, double spacing) {
  if (const auto* c = std::get_if<Contour>(&source)) {
    if (c->spacing()) return source;
    return Contour(c->points(), spacing);
  }
  const auto& m = std::get<BinaryMask>(source);
  if (m.spacing()) return source;
  return BinaryMask::from_grid(m.grid(), spacing);
}

}  // namespace

std::string_view feature_name(int id) {
  if (id < 1 || id > 31) {
    throw Error(ErrorKind::Schema, "unknown feature id " + std::to_string(id));
  }
  return kNames[static_cast<std::size_t>(id - 1)];
}

int feature_id(std::string_view name) {
  for (std::size_t i = 0; i < kNames.size(); ++i) {
    if (kNames[i] == name) return static_cast<int>(i) + 1;
  }
  throw Error(ErrorKind::Schema, "unknown feature name '" + std::string(name) + "'");
}

int encode_birads(BiradsCategory category) noexcept { return static_cast<int>(category) + 1; }

BiradsCategory decode_birads(int code) {
  if (code < 1 || code > 8) {
    throw Error(ErrorKind::Schema, "coded BI-RADS must be in 1..8, got " + std::to_string(code));
  }
  return static_cast<BiradsCategory>(code - 1);
}

BiradsCategory parse_birads(std::string_view text) {
  std::string lower(text);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
  for (std::size_t i = 0; i < kBirads.size(); ++i) {
    if (kBirads[i] == lower) return static_cast<BiradsCategory>(i);
  }
  throw Error(ErrorKind::Parse, "unknown BI-RADS category '" + std::string(text) + "'");
}

std::string_view to_string(BiradsCategory category) noexcept {
  return kBirads[static_cast<std::size_t>(category)];
}

HullFeatures hull_features(const Contour& contour) {
  const geometry::PolygonFrame f = geometry::make_frame(contour);
  const auto& pts = f.local;
  const std::size_t n = pts.size();
  const std::vector<std::size_t> hull = geometry::convex_hull_indices(pts);

  const double hull_area = ring_cross_sum(pts, hull) / 2.0;
  std::vector<double> hull_edges(hull.size());
  for (std::size_t k = 0; k < hull.size(); ++k) {
    const Point2 a = pts[hull[k]];
    const Point2 b = pts[hull[(k + 1) % hull.size()]];
    const double dx = b.x - a.x;
    const double dy = b.y - a.y;
    hull_edges[k] = std::sqrt(dx * dx + dy * dy);
  }
  const double hull_perimeter = exact_sum(hull_edges);

  HullFeatures out;
  out.convexity = hull_perimeter / f.perimeter;
  out.solidity = f.area / hull_area;
  out.overlap_ratio = hull_area / f.area;
  out.nrv = (hull_area - f.area) / hull_perimeter;

  // Pockets: contour runs that leave the hull between consecutive hull vertices.
  std::vector<std::uint8_t> in_pocket(n, 0);
  int pockets = 0;
  for (std::size_t k = 0; k < hull.size(); ++k) {
    const std::size_t a = hull[k];
    const std::size_t b = hull[(k + 1) % hull.size()];
    const std::size_t gap = (b + n - a) % n;
    if (gap <= 1) continue;
    std::vector<std::size_t> ring;
    for (std::size_t i = 0; i <= gap; ++i) ring.push_back((a + i) % n);
    const double area = std::fabs(ring_cross_sum(pts, ring)) / 2.0;
    if (area < kPocketFraction * f.area) continue;
    ++pockets;
    for (std::size_t i = 0; i < gap; ++i) in_pocket[(a + i) % n] = 1;
  }
  out.nspd = pockets;
  if (pockets > 0) {
    // Protrusions: prominent NRL maxima on the contour runs between pockets.
    const NrlSequence s = nrl_sequence(contour);
    for (const Peak& p : circular_peaks(s.values)) {
      if (p.prominence >= kProtrusionProminence && !in_pocket[s.sample_edges[p.index]]) {
        out.nspd += 1.0;
      }
    }
  }
  return out;
}

BboxFeatures bbox_features(const Contour& contour) {
  const geometry::PolygonFrame f = geometry::make_frame(contour);
  BboxFeatures out;
  out.dwr = f.height / f.width;
  out.extent = f.area / (f.width * f.height);
  out.aspect_ratio = chord(f.centered, true) / chord(f.centered, false);
  return out;
}

Plane plane_from_contour(const Contour& contour) {
  geometry::LocalRaster raster = geometry::rasterize_local(contour);
  return {contour, std::move(raster.mask), raster.offset_x, raster.offset_y};
}

Plane plane_from_mask(const BinaryMask& mask) { return {geometry::trace_boundary(mask), mask, 0, 0}; }

EllipseFeatures ellipse_features(const Plane& plane) {
  const geometry::PolygonFrame f = geometry::make_frame(plane.contour);
  const geometry::FittedEllipse e = geometry::fit_equivalent_ellipse(plane.contour);
  EllipseFeatures out;
  out.long_short_ratio = e.semi_major / e.semi_minor;
  out.roundness = 4.0 * f.area / (std::numbers::pi * (2.0 * e.semi_major) * (2.0 * e.semi_major));
  out.orientation = e.orientation_deg;
  out.enc = f.perimeter / geometry::ellipse_perimeter(e.semi_major, e.semi_minor);

  // Lattice points inside the ellipse: v' adj(C) v <= area * sqrt(det C) / pi.
  const double cxx = e.covariance[0], cxy = e.covariance[1], cyy = e.covariance[2];
  const double det = cxx * cyy - cxy * cxy;
  const double bound = f.area * std::sqrt(det) / std::numbers::pi;
  const double reach = f.area / (std::numbers::pi * std::sqrt(det));
  auto inside = [&](int x, int y) {
    const double dx = (static_cast<double>(x + plane.offset_x) - f.origin.x) - f.centroid.x;
    const double dy = (static_cast<double>(y + plane.offset_y) - f.origin.y) - f.centroid.y;
    const double q = (cyy * (dx * dx) + cxx * (dy * dy)) + (-2.0 * cxy) * (dx * dy);
    return q <= bound;
  };
  const double cx = e.center.x - plane.offset_x;
  const double cy = e.center.y - plane.offset_y;
  const double ex = std::sqrt(reach * cxx) + 2.0;
  const double ey = std::sqrt(reach * cyy) + 2.0;
  std::size_t ellipse_count = 0, both = 0;
  for (int y = static_cast<int>(std::floor(cy - ey)); y <= static_cast<int>(std::ceil(cy + ey)); ++y) {
    for (int x = static_cast<int>(std::floor(cx - ex)); x <= static_cast<int>(std::ceil(cx + ex));
         ++x) {
      if (!inside(x, y)) continue;
      ++ellipse_count;
      if (plane.mask.grid().inside(x, y) && plane.mask.at(x, y)) ++both;
    }
  }
  const std::size_t uni = plane.mask.count() + ellipse_count - both;
  out.ellipsoidal_shape = static_cast<double>(both) / static_cast<double>(uni);
  return out;
}

SkeletonFeatures skeleton_features(const Plane& plane) {
  const geometry::PolygonFrame f = geometry::make_frame(plane.contour);
  const geometry::FittedEllipse e = geometry::fit_equivalent_ellipse(plane.contour);
  // Thin on a raster resampled to a fixed equivalent diameter; the pixel
  // pitch of that raster, in original pixels, is diameter / kSkeletonDiameter.
  const double diameter = 2.0 * std::sqrt(f.area / std::numbers::pi);
  const double zoom = kSkeletonDiameter / diameter;
  std::vector<Point2> resampled(f.local.size());
  for (std::size_t i = 0; i < resampled.size(); ++i) {
    resampled[i] = {f.local[i].x * zoom, f.local[i].y * zoom};
  }
  const auto raster = geometry::rasterize_local(Contour(std::move(resampled)));
  const geometry::Skeleton sk = geometry::skeletonize(raster.mask, 0.05 * kSkeletonDiameter);
  const double pitch = diameter / kSkeletonDiameter;
  return {static_cast<double>(sk.pixel_count) * pitch /
              geometry::ellipse_perimeter(e.semi_major, e.semi_minor),
          static_cast<double>(sk.branch_points)};
}

ScalarFeatures scalar_features(const Plane& plane) {
  const auto spacing = plane.contour.spacing();
  if (!spacing) throw Error(ErrorKind::Units, "lesion size needs the pixel spacing (mm/pixel)");
  const geometry::PolygonFrame f = geometry::make_frame(plane.contour);
  ScalarFeatures out;
  out.circularity = f.perimeter * f.perimeter / f.area;
  out.lesion_size = 2.0 * std::sqrt(f.area / std::numbers::pi) * *spacing;

  const double count = static_cast<double>(plane.mask.count());
  const double radius = std::max(1.0, 0.2 * std::sqrt(count / std::numbers::pi));
  const BinaryMask closed = geometry::morphological_close(plane.mask, radius);
  const double closed_count = static_cast<double>(closed.count());
  out.closing_ratio = (closed_count - count) / closed_count;
  return out;
}

double FeatureVector::at(int id) const {
  if (id == kBiradsFeature) {
    if (!birads_code) throw Error(ErrorKind::Schema, "feature vector has no coded BI-RADS value");
    return *birads_code;
  }
  if (id < 1 || id > kMorphologicalCount) {
    throw Error(ErrorKind::Schema, "unknown feature id " + std::to_string(id));
  }
  return values[static_cast<std::size_t>(id - 1)];
}

void FeatureVector::validate() const {
  for (int id = 1; id <= kMorphologicalCount; ++id) {
    if (!std::isfinite(at(id))) {
      throw Error(ErrorKind::Schema, std::string(feature_name(id)) + " is not finite");
    }
  }
  auto require = [&](FeatureId id, bool ok, const char* range) {
    if (!ok) {
      throw Error(ErrorKind::Schema, std::string(feature_name(id)) + " = " +
                                         std::to_string((*this)[id]) + " outside " + range);
    }
  };
  const auto& v = *this;
  require(FeatureId::Solidity, v[FeatureId::Solidity] > 0.0 && v[FeatureId::Solidity] <= 1.0, "(0, 1]");
  require(FeatureId::Convexity, v[FeatureId::Convexity] > 0.0 && v[FeatureId::Convexity] <= 1.0,
          "(0, 1]");
  require(FeatureId::OverlapRatio, v[FeatureId::OverlapRatio] >= 1.0, "[1, inf)");
  require(FeatureId::Extent, v[FeatureId::Extent] > 0.0 && v[FeatureId::Extent] <= 1.0, "(0, 1]");
  require(FeatureId::NrlMean, v[FeatureId::NrlMean] > 0.0 && v[FeatureId::NrlMean] <= 1.0, "(0, 1]");
  require(FeatureId::NrlStd, v[FeatureId::NrlStd] >= 0.0, "[0, inf)");
  require(FeatureId::NrlEntropy, v[FeatureId::NrlEntropy] >= 0.0, "[0, inf)");
  require(FeatureId::Dwr, v[FeatureId::Dwr] > 0.0, "(0, inf)");
  require(FeatureId::Roundness, v[FeatureId::Roundness] > 0.0 && v[FeatureId::Roundness] <= 1.0,
          "(0, 1]");
  const double sc = v[FeatureId::ShapeClass];
  require(FeatureId::ShapeClass, sc == 1.0 || sc == 2.0 || sc == 3.0 || sc == 4.0, "{1, 2, 3, 4}");
  if (birads_code && (*birads_code < 1 || *birads_code > 8)) {
    throw Error(ErrorKind::Schema, "coded BI-RADS outside 1..8");
  }
}

FeatureVector extract_plane(const Plane& plane) {
  const NrlSequence s = nrl_sequence(plane.contour);
  const NrlFeatures nrl = nrl_features(s);
  const LobeFeatures lobe = lobe_features(s);
  const HullFeatures hull = hull_features(plane.contour);
  const BboxFeatures box = bbox_features(plane.contour);
  const EllipseFeatures ell = ellipse_features(plane);
  const SkeletonFeatures skel = skeleton_features(plane);
  const ScalarFeatures scalar = scalar_features(plane);

  FeatureVector v;
  v[FeatureId::AngularCharacteristics] = lobe.angular;
  v[FeatureId::AreaRatio] = nrl.area_ratio;
  v[FeatureId::AspectRatio] = box.aspect_ratio;
  v[FeatureId::BranchPattern] = skel.branch_pattern;
  v[FeatureId::Circularity] = scalar.circularity;
  v[FeatureId::ContourRoughness] = nrl.roughness;
  v[FeatureId::Convexity] = hull.convexity;
  v[FeatureId::Dwr] = box.dwr;
  v[FeatureId::EllipsoidalShape] = ell.ellipsoidal_shape;
  v[FeatureId::EllipticNormalizedCircumference] = ell.enc;
  v[FeatureId::EllipticNormalizedSkeleton] = skel.ens;
  v[FeatureId::Extent] = box.extent;
  v[FeatureId::LesionSize] = scalar.lesion_size;
  v[FeatureId::LobulationIndex] = lobe.lobulation_index;
  v[FeatureId::LongShortAxisRatio] = ell.long_short_ratio;
  v[FeatureId::MorphologicalClosingRatio] = scalar.closing_ratio;
  v[FeatureId::NormalizedResidualValue] = hull.nrv;
  v[FeatureId::NrlEntropy] = nrl.entropy;
  v[FeatureId::NrlMean] = nrl.mean;
  v[FeatureId::NrlStd] = nrl.std;
  v[FeatureId::NrlZeroCrossing] = nrl.zero_crossings;
  v[FeatureId::NumberOfLobulations] = lobe.num_lobulations;
  v[FeatureId::Nspd] = hull.nspd;
  v[FeatureId::Orientation] = ell.orientation;
  v[FeatureId::OverlapRatio] = hull.overlap_ratio;
  v[FeatureId::Roundness] = ell.roundness;
  v[FeatureId::ShapeClass] = shape_class(lobe.num_lobulations, ell.long_short_ratio);
  v[FeatureId::Solidity] = hull.solidity;
  v[FeatureId::Spiculation] = lobe.spiculation;
  v[FeatureId::UndulationCharacteristics] = lobe.undulation;
  return v;
}

FeatureVector extract_plane(const PlaneSource& source) {
  if (const auto* c = std::get_if<Contour>(&source)) return extract_plane(plane_from_contour(*c));
  return extract_plane(plane_from_mask(std::get<BinaryMask>(source)));
}

FeatureVector extract_all(const LesionRecord& record, bool with_birads) {
  auto one = [&](const PlaneSource& source, const char* name) {
    try {
      return extract_plane(with_spacing(source, record.spacing_mm));
    } catch (const Error& e) {
      throw e.with_context(record.id + " plane " + name);
    }
  };
  const FeatureVector a = one(record.plane_a, "A");
  const FeatureVector b = one(record.plane_b, "B");
  FeatureVector v;
  for (std::size_t i = 0; i < v.values.size(); ++i) v.values[i] = (a.values[i] + b.values[i]) / 2.0;
  // Shape class stays categorical: re-derived from the averaged inputs.
  v[FeatureId::ShapeClass] =
      shape_class(v[FeatureId::NumberOfLobulations], v[FeatureId::LongShortAxisRatio]);
  if (with_birads) v.birads_code = encode_birads(record.birads);
  return v;
}

}  // namespace morphocad::features
