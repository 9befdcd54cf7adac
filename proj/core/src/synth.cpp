#include "morphocad/synth.hpp"

#include <boost/random/discrete_distribution.hpp>
#include <boost/random/mersenne_twister.hpp>
#include <boost/random/normal_distribution.hpp>
#include <boost/random/uniform_int_distribution.hpp>
#include <boost/random/uniform_real_distribution.hpp>
#include <cmath>
#include <cstdio>
#include <numbers>

#include "morphocad/error.hpp"
#include "morphocad/numeric.hpp"

namespace morphocad::synth {
namespace {

using Rng = boost::random::mt19937_64;
constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kSpikeHalfWidth = 0.07;  // radians
constexpr double kSpikeJitter = 0.2;  // fraction of the spike pitch
constexpr int kNoiseHarmonics = 6;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

double uniform(Rng& rng, double lo, double hi) {
  return boost::random::uniform_real_distribution<double>(lo, hi)(rng);
}

int uniform_int(Rng& rng, int lo, int hi) { return boost::random::uniform_int_distribution<int>(lo, hi)(rng); }

double ellipse_radius(double a, double b, double angle) {
  const double c = std::cos(angle), s = std::sin(angle);
  return a * b / std::sqrt(b * b * c * c + a * a * s * s);
}

double angular_gap(double x, double y) {
  const double d = std::fmod(std::fabs(x - y), kTwoPi);
  return std::min(d, kTwoPi - d);
}

void set_axes(ShapeSpec& s, double a, double b) {
  if (a >= b) {
    s.a = a;
    s.b = b;
  } else {
    s.a = b;
    s.b = a;
    s.theta_deg = std::fmod(s.theta_deg + 90.0, 180.0);
  }
}

}  // namespace

void validate(const ShapeSpec& s) {
  auto fail = [](const char* msg) { throw Error(ErrorKind::InvalidParameter, msg); };
  if (!(s.b > 0.0) || !(s.a >= s.b) || !std::isfinite(s.a)) fail("shape needs a >= b > 0");
  if (!(s.r0 > 0.0) || !std::isfinite(s.r0)) fail("shape needs r0 > 0");
  if (!(s.epsilon >= 0.0 && s.epsilon < 1.0)) fail("modulation depth must lie in [0, 1)");
  if (s.lobes < 2) fail("lobe count must be at least 2");
  if (!(s.noise >= 0.0 && s.noise < 0.5)) fail("noise must lie in [0, 0.5)");
  if (!(s.spicule_amplitude >= 0.0) || s.spicules < 0) fail("spicule parameters must be non-negative");
  if (s.samples < 16) fail("at least 16 samples required");
}

geometry::Contour make_shape(const ShapeSpec& spec, std::optional<double> spacing_mm) {
  validate(spec);
  Rng rng(splitmix64(spec.seed));
  boost::random::normal_distribution<double> gauss(0.0, 1.0);
  std::array<double, kNoiseHarmonics> amp{}, phase{};
  double total = 0.0;
  for (int h = 0; h < kNoiseHarmonics; ++h) {
    amp[h] = gauss(rng) / (h + 3);
    phase[h] = uniform(rng, 0.0, kTwoPi);
    total += std::fabs(amp[h]);
  }
  const double noise_scale = total > 0.0 ? spec.noise / total : 0.0;
  std::vector<double> spikes(static_cast<std::size_t>(spec.spicules));
  const double offset = uniform(rng, 0.0, kTwoPi);
  const double pitch = spec.spicules > 0 ? kTwoPi / spec.spicules : 0.0;
  for (std::size_t j = 0; j < spikes.size(); ++j) {
    spikes[j] = offset + pitch * (static_cast<double>(j) + uniform(rng, -kSpikeJitter, kSpikeJitter));
  }

  const bool rose = spec.kind == ShapeKind::Rose;
  const double a = rose ? spec.r0 : spec.a;
  const double b = rose ? spec.r0 : spec.b;
  const double theta = spec.theta_deg * std::numbers::pi / 180.0;
  std::vector<geometry::Point2> pts;
  pts.reserve(static_cast<std::size_t>(spec.samples));
  for (int i = 0; i < spec.samples; ++i) {
    const double phi = kTwoPi * i / spec.samples;
    double r = ellipse_radius(a, b, phi - theta) * (1.0 + spec.epsilon * std::cos(spec.lobes * (phi - spec.phase)));
    double n = 0.0;
    for (int h = 0; h < kNoiseHarmonics; ++h) n += amp[h] * std::cos((h + 3) * phi + phase[h]);
    r *= 1.0 + noise_scale * n;
    for (double s : spikes) {
      r += spec.r0 * spec.spicule_amplitude * std::max(0.0, 1.0 - angular_gap(phi, s) / kSpikeHalfWidth);
    }
    pts.push_back({spec.center_x + r * std::cos(phi), spec.center_y + r * std::sin(phi)});
  }
  return geometry::Contour(std::move(pts), spacing_mm);
}

SyntheticDataset make_dataset(int benign, int malignant, std::uint64_t seed, const DatasetOptions& options) {
  if (benign < 2 || malignant < 2) {
    throw Error(ErrorKind::InvalidParameter, "synthetic dataset needs at least two lesions per class");
  }
  if (!(options.separation >= 0.0 && options.separation <= 1.0)) {
    throw Error(ErrorKind::InvalidParameter, "separation must lie in [0, 1]");
  }
  if (!(options.spacing_mm > 0.0)) throw Error(ErrorKind::InvalidParameter, "spacing must be positive");
  for (const auto* probs : {&options.benign_birads, &options.malignant_birads}) {
    double sum = 0.0;
    for (double p : *probs) {
      if (!(p >= 0.0)) throw Error(ErrorKind::InvalidParameter, "category weights must be non-negative");
      sum += p;
    }
    if (!(sum > 0.0)) throw Error(ErrorKind::InvalidParameter, "category weights must not all be zero");
  }

  const int n = benign + malignant;
  SyntheticDataset out;
  out.lesions.resize(static_cast<std::size_t>(n));
  const std::uint64_t base = splitmix64(seed);
  for (int i = 0; i < n; ++i) {
    Rng rng(splitmix64(base + static_cast<std::uint64_t>(i)));
    SyntheticLesion& l = out.lesions[static_cast<std::size_t>(i)];
    char id[16];
    std::snprintf(id, sizeof id, "SYN%04d", i + 1);
    l.id = id;
    const bool mal = i >= benign;
    l.label = mal ? features::Label::Malignant : features::Label::Benign;
    const auto& probs = mal ? options.malignant_birads : options.benign_birads;
    boost::random::discrete_distribution<int> category(probs.begin(), probs.end());
    l.birads = features::decode_birads(category(rng) + 1);
    const double lo = mal ? 0.7 * options.separation : 0.0;
    l.irregularity = uniform(rng, lo, lo + 0.5);
    const double u = l.irregularity;

    ShapeSpec s;
    s.r0 = uniform(rng, 40.0, 70.0);
    const double aspect = uniform(rng, 1.0, 1.15);
    s.theta_deg = uniform(rng, 0.0, 180.0);
    s.phase = uniform(rng, 0.0, kTwoPi);
    s.lobes = uniform_int(rng, 3, 6);
    s.epsilon = uniform(rng, 0.0, 0.05);
    s.spicules = uniform_int(rng, 10, 16);
    s.spicule_amplitude = 0.5 * u * u;
    s.noise = 0.01 + 0.02 * u;
    if (mal) {
      s.kind = ShapeKind::Spiculated;
    } else {
      s.kind = uniform_int(rng, 0, 1) == 0 ? ShapeKind::Ellipse : ShapeKind::Rose;
    }
    set_axes(s, s.r0 * std::sqrt(aspect), s.r0 / std::sqrt(aspect));
    if (s.kind == ShapeKind::Rose) set_axes(s, s.r0, s.r0);
    s.center_x = 100.0;
    s.center_y = 100.0;
    s.seed = rng();
    l.plane_a = s;
    ShapeSpec t = s;
    t.seed = rng();
    const double perturb = uniform(rng, 0.9, 1.1);
    if (t.kind == ShapeKind::Rose) t.kind = ShapeKind::Ellipse;
    set_axes(t, s.a, s.b * perturb);
    l.plane_b = t;
  }

  std::vector<std::optional<features::LesionRecord>> records(static_cast<std::size_t>(n));
  parallel_for(static_cast<std::size_t>(n), [&](std::size_t i) {
    const auto& l = out.lesions[i];
    auto a = make_shape(l.plane_a, options.spacing_mm);
    auto b = geometry::rasterize_local(make_shape(l.plane_b, options.spacing_mm)).mask;
    records[i] = features::LesionRecord{l.id, l.label, l.birads, options.spacing_mm, std::move(a), std::move(b)};
  });
  for (auto& r : records) out.records.push_back(std::move(*r));
  for (const auto& l : out.lesions) {
    io::ManifestEntry e;
    e.id = l.id;
    e.label = l.label;
    e.birads = l.birads;
    e.spacing_mm = options.spacing_mm;
    e.plane_a = {io::PlaneRef::Kind::Contour, "planes/" + l.id + "_a.txt"};
    e.plane_b = {io::PlaneRef::Kind::Mask, "planes/" + l.id + "_b.png"};
    out.manifest.entries.push_back(std::move(e));
  }
  return out;
}

void write_dataset(const SyntheticDataset& dataset, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir / "planes");
  for (std::size_t i = 0; i < dataset.records.size(); ++i) {
    const auto& r = dataset.records[i];
    const auto& e = dataset.manifest.entries[i];
    io::write_contour_text(dir / e.plane_a.path, std::get<geometry::Contour>(r.plane_a));
    io::write_mask_png(dir / e.plane_b.path, std::get<geometry::BinaryMask>(r.plane_b).grid());
  }
  io::write_manifest(dir / "manifest.json", dataset.manifest);
}

}  // namespace morphocad::synth
