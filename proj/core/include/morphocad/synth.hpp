#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "morphocad/features.hpp"
#include "morphocad/geometry.hpp"
#include "morphocad/io.hpp"

namespace morphocad::synth {

enum class ShapeKind { Ellipse, Rose, Spiculated };

/// Star-shaped lesion outline:
///   r(phi) = ellipse(a, b, theta)(phi) * (1 + epsilon cos(k (phi - phase)))
///            * (1 + noise(phi)) + spikes(phi)
/// Roses use a = b = r0. Spikes are narrow triangular bumps of height
/// spicule_amplitude * r0, evenly spaced with a random
/// offset and jitter.
struct ShapeSpec {
  ShapeKind kind = ShapeKind::Ellipse;
  double a = 60.0;
  double b = 40.0;
  double theta_deg = 0.0;
  double r0 = 50.0;
  double epsilon = 0.0;
  int lobes = 2;
  double phase = 0.0;
  int spicules = 0;
  double spicule_amplitude = 0.0;
  double noise = 0.0;  // relative amplitude of smooth radial noise
  double center_x = 0.0;
  double center_y = 0.0;
  int samples = 720;
  std::uint64_t seed = 0;
};

/// ErrorKind::InvalidParameter unless a >= b > 0, r0 > 0, 0 <= epsilon < 1,
/// lobes >= 2, noise in [0, 0.5), spicule_amplitude >= 0 and samples >= 16.
void validate(const ShapeSpec& spec);

/// Deterministic for a fixed spec (noise and spike angles come from `seed`).
geometry::Contour make_shape(const ShapeSpec& spec, std::optional<double> spacing_mm = std::nullopt);

struct DatasetOptions {
  /// 0: both classes draw irregularity from the same range; 1: ranges separated
  /// by a gap.
  double separation = 0.3;
  double spacing_mm = 0.1;
  /// Category probabilities per class in code order 1..8.
  std::array<double, 8> benign_birads{0, 0, 41, 19, 14, 0, 1, 0};
  std::array<double, 8> malignant_birads{0, 0, 0, 1, 5, 6, 20, 0};
};

struct SyntheticLesion {
  std::string id;
  features::Label label = features::Label::Benign;
  features::BiradsCategory birads = features::BiradsCategory::C3;
  double irregularity = 0.0;
  ShapeSpec plane_a;
  ShapeSpec plane_b;
};

struct SyntheticDataset {
  std::vector<SyntheticLesion> lesions;
  /// Plane A as a vertex list, plane B as its rasterized mask.
  std::vector<features::LesionRecord> records;
  io::Manifest manifest;
};

/// Benign lesions are smooth ellipses or roses, malignant ones spiculated
/// outlines; each lesion draws from its own stream keyed by (seed, index).
/// Requires at least two lesions per class.
SyntheticDataset make_dataset(int benign, int malignant, std::uint64_t seed,
                              const DatasetOptions& options = {});

/// Writes manifest.json plus one contour file and one PNG per lesion.
void write_dataset(const SyntheticDataset& dataset, const std::filesystem::path& dir);

}  // namespace morphocad::synth
