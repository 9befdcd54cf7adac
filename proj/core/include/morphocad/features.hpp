#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "morphocad/geometry.hpp"

namespace morphocad::features {

/// Morphological feature ids 1..30 in canonical column order; 31 is the
/// coded BI-RADS category used in combined mode.
enum class FeatureId : int {
  AngularCharacteristics = 1,
  AreaRatio,
  AspectRatio,
  BranchPattern,
  Circularity,
  ContourRoughness,
  Convexity,
  Dwr,
  EllipsoidalShape,
  EllipticNormalizedCircumference,
  EllipticNormalizedSkeleton,
  Extent,
  LesionSize,
  LobulationIndex,
  LongShortAxisRatio,
  MorphologicalClosingRatio,
  NormalizedResidualValue,
  NrlEntropy,
  NrlMean,
  NrlStd,
  NrlZeroCrossing,
  NumberOfLobulations,
  Nspd,
  Orientation,
  OverlapRatio,
  Roundness,
  ShapeClass,
  Solidity,
  Spiculation,
  UndulationCharacteristics,
  BiradsCode,
};

inline constexpr int kMorphologicalCount = 30;
inline constexpr int kBiradsFeature = 31;

std::string_view feature_name(int id);
inline std::string_view feature_name(FeatureId id) { return feature_name(static_cast<int>(id)); }
/// Inverse of feature_name; ErrorKind::Schema for unknown names.
int feature_id(std::string_view name);

enum class BiradsCategory { C1, C2, C3, C4a, C4b, C4c, C5, C6 };

/// 1, 2, 3, 4a, 4b, 4c, 5, 6 -> 1..8.
int encode_birads(BiradsCategory category) noexcept;
BiradsCategory decode_birads(int code);
/// Accepts "1", "2", "3", "4a", "4b", "4c", "5", "6" (case-insensitive).
BiradsCategory parse_birads(std::string_view text);
std::string_view to_string(BiradsCategory category) noexcept;

struct NrlSequence {
  std::vector<double> values;                 // d_n, max exactly 1
  std::vector<geometry::Point2> samples;      // boundary stations, centroid-relative
  std::vector<std::size_t> sample_edges;      // contour edge holding each station
  double mean = 0.0;

  std::size_t size() const noexcept { return values.size(); }
};

inline constexpr std::size_t kNrlSamples = 256;
inline constexpr int kEntropyBins = 100;

/// Samples the centroid distance at `n` equal arc-length stations starting at
/// the vertex farthest from the centroid, normalized by the sample maximum.
NrlSequence nrl_sequence(const geometry::Contour& contour, std::size_t n = kNrlSamples);
/// Wraps arbitrary values (tests, spectra); samples are left empty.
NrlSequence nrl_from_values(std::vector<double> values);

struct NrlFeatures {
  double mean = 0.0;
  double std = 0.0;
  double entropy = 0.0;
  double zero_crossings = 0.0;
  double area_ratio = 0.0;
  double roughness = 0.0;
};

NrlFeatures nrl_features(const NrlSequence& s);

/// Circular topographic prominence of every local maximum (plateaus count
/// once, at their first index). Constant input has no maxima.
struct Peak {
  std::size_t index = 0;
  double prominence = 0.0;
};
std::vector<Peak> circular_peaks(const std::vector<double>& values);
/// Circular moving average with an odd window.
std::vector<double> circular_smooth(const std::vector<double>& values, std::size_t window);

struct LobeFeatures {
  double num_lobulations = 0.0;
  double lobulation_index = 0.0;
  double spiculation = 0.0;
  double undulation = 0.0;
  double angular = 0.0;
};

LobeFeatures lobe_features(const NrlSequence& s);
int shape_class(double num_lobulations, double long_short_ratio) noexcept;

struct HullFeatures {
  double convexity = 0.0;
  double solidity = 0.0;
  double overlap_ratio = 0.0;
  double nrv = 0.0;
  double nspd = 0.0;
};

HullFeatures hull_features(const geometry::Contour& contour);

struct BboxFeatures {
  double dwr = 0.0;
  double aspect_ratio = 0.0;
  double extent = 0.0;
};

BboxFeatures bbox_features(const geometry::Contour& contour);

/// Vector contour together with its raster twin. Contour coordinates equal
/// mask coordinates plus the offset.
struct Plane {
  geometry::Contour contour;
  geometry::BinaryMask mask;
  int offset_x = 0;
  int offset_y = 0;
};

Plane plane_from_contour(const geometry::Contour& contour);
Plane plane_from_mask(const geometry::BinaryMask& mask);

struct EllipseFeatures {
  double long_short_ratio = 0.0;
  double roundness = 0.0;
  double orientation = 0.0;
  double enc = 0.0;
  double ellipsoidal_shape = 0.0;
};

EllipseFeatures ellipse_features(const Plane& plane);

struct SkeletonFeatures {
  double ens = 0.0;
  double branch_pattern = 0.0;
};

/// Thinning runs on the contour re-rasterized at a fixed equivalent diameter,
/// so skeleton length and branch count do not depend on the image scale.
SkeletonFeatures skeleton_features(const Plane& plane);

struct ScalarFeatures {
  double circularity = 0.0;
  double lesion_size = 0.0;
  double closing_ratio = 0.0;
};

/// ErrorKind::Units when the plane carries no pixel spacing.
ScalarFeatures scalar_features(const Plane& plane);

struct FeatureVector {
  std::array<double, kMorphologicalCount> values{};
  std::optional<int> birads_code;

  double operator[](FeatureId id) const { return at(static_cast<int>(id)); }
  double& operator[](FeatureId id) { return values[static_cast<int>(id) - 1]; }
  /// Feature 1..30, or 31 when the coded BI-RADS value is present.
  double at(int id) const;
  /// Finiteness and per-feature range checks; ErrorKind::Schema on failure.
  void validate() const;
};

FeatureVector extract_plane(const Plane& plane);

using PlaneSource = std::variant<geometry::Contour, geometry::BinaryMask>;

FeatureVector extract_plane(const PlaneSource& source);

enum class Label { Benign = 0, Malignant = 1 };

struct LesionRecord {
  std::string id;
  Label label = Label::Benign;
  BiradsCategory birads = BiradsCategory::C3;
  double spacing_mm = 1.0;
  PlaneSource plane_a;
  PlaneSource plane_b;
};

/// Mean of the two per-plane vectors; the coded BI-RADS value is appended,
/// not averaged, when requested.
FeatureVector extract_all(const LesionRecord& record, bool with_birads = false);

}  // namespace morphocad::features
