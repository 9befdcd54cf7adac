#pragma once

#include <filesystem>
#include <nlohmann/json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "morphocad/eval.hpp"
#include "morphocad/features.hpp"
#include "morphocad/geometry.hpp"
#include "morphocad/model.hpp"
#include "morphocad/selection.hpp"

namespace morphocad::io {

inline constexpr int kSchemaVersion = 1;
/// Vertex minimum for contours read from a dataset.
inline constexpr std::size_t kMinManifestVertices = 16;

// Contour files: one "x y" pair per line, '#' starts a comment.
geometry::Contour read_contour_text(const std::filesystem::path& path,
                                    std::optional<double> spacing_mm = std::nullopt);
geometry::Contour parse_contour_text(const std::string& text,
                                     std::optional<double> spacing_mm = std::nullopt);
void write_contour_text(const std::filesystem::path& path, const geometry::Contour& contour);

// Masks: 8-bit or 16-bit grayscale/RGB PNG, any nonzero first channel is
// foreground. Holes are filled; more than one component is a Topology error.
geometry::BinaryMask read_mask_png(const std::filesystem::path& path,
                                   std::optional<double> spacing_mm = std::nullopt);
void write_mask_png(const std::filesystem::path& path, const geometry::Grid& grid);

struct PlaneRef {
  enum class Kind { Contour, Mask } kind = Kind::Contour;
  std::string path;  // relative to the manifest directory
};

struct ManifestEntry {
  std::string id;
  features::Label label = features::Label::Benign;
  features::BiradsCategory birads = features::BiradsCategory::C3;
  double spacing_mm = 1.0;
  PlaneRef plane_a;
  PlaneRef plane_b;
};

struct Manifest {
  int schema_version = kSchemaVersion;
  std::vector<ManifestEntry> entries;
};

Manifest parse_manifest(const nlohmann::json& doc);
nlohmann::json to_json(const Manifest& manifest);
void write_manifest(const std::filesystem::path& path, const Manifest& manifest);

struct ManifestSummary {
  int records = 0;
  int benign = 0;
  int malignant = 0;
};

/// Reads the manifest and every referenced plane. Errors (MissingFile,
/// DuplicateId, Topology, Parse, Schema, InvalidContour) name the record.
std::vector<features::LesionRecord> load_manifest(const std::filesystem::path& path,
                                                  ManifestSummary* summary = nullptr);

/// Runs extract_all on every record, in manifest order.
eval::Dataset extract_dataset(const std::vector<features::LesionRecord>& records);

// Feature table: id, label, birads, then the 30 features in id order.
void write_features_csv(std::ostream& out, const eval::Dataset& data);
void write_features_csv(const std::filesystem::path& path, const eval::Dataset& data);
eval::Dataset read_features_csv(std::istream& in);
eval::Dataset read_features_csv(const std::filesystem::path& path);

/// Coded BI-RADS table: per-category benign and malignant counts.
eval::Dataset load_birads_fixture(const std::filesystem::path& path);
eval::Dataset parse_birads_fixture(const nlohmann::json& doc);

struct Cutoffs {
  double optimal = 0.0;
  double full_sensitivity = 0.0;
};

struct SavedModel {
  std::string id;
  selection::Mode mode = selection::Mode::Morphological;
  model::TrainedModel model;
  Cutoffs cutoffs;

  bool needs_birads() const;
};

nlohmann::json to_json(const SavedModel& saved);
SavedModel saved_model_from_json(const nlohmann::json& doc);
void write_model(const std::filesystem::path& path, const SavedModel& saved);
SavedModel read_model(const std::filesystem::path& path);

nlohmann::json to_json(const eval::MetricsReport& report);
eval::MetricsReport metrics_from_json(const nlohmann::json& doc);

nlohmann::json to_json(const selection::SelectionTrace& trace);
selection::SelectionTrace trace_from_json(const nlohmann::json& doc);

/// Chosen subset, cutoff metrics, biopsy counts and the AUC series.
nlohmann::json study_report(const selection::StudyResult& study);

/// ROC points as "threshold,fpr,tpr"; the first threshold is "inf".
void write_roc_csv(std::ostream& out, const eval::RocCurve& roc);
void write_roc_csv(const std::filesystem::path& path, const eval::RocCurve& roc);
/// Points only; counts and scores are not part of the table.
std::vector<eval::RocPoint> read_roc_csv(std::istream& in);

/// Points (the infinite threshold as null), AUC and class counts.
nlohmann::json to_json(const eval::RocCurve& roc);
eval::RocCurve roc_from_json(const nlohmann::json& doc);

std::string read_text(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, const std::string& text);
nlohmann::json read_json(const std::filesystem::path& path);
/// Two-space indented with a trailing newline.
void write_json(const std::filesystem::path& path, const nlohmann::json& doc);

std::string_view to_string(features::Label label) noexcept;
features::Label parse_label(std::string_view text);

}  // namespace morphocad::io
