#pragma once

#include <filesystem>
#include <nlohmann/json.hpp>
#include <optional>
#include <string>

#include "morphocad/eval.hpp"
#include "morphocad/features.hpp"
#include "morphocad/io.hpp"
#include "morphocad/selection.hpp"

// Operations shared by the command-line tool and the HTTP service, so both
// produce the same numbers for the same input.
namespace morphocad::pipeline {

struct LesionInput {
  features::PlaneSource plane_a;
  std::optional<features::PlaneSource> plane_b;  // plane A is reused when absent
  std::optional<features::BiradsCategory> birads;
  double spacing_mm = 1.0;
};

/// Request body:
///   {"contour": [[x, y], ...]} or {"mask": "lesion.png"},
///   optional "planeB" holding one of the same two keys,
///   optional "birads" ("3", "4a", ...), mandatory "spacingMm".
/// Mask paths resolve against `base_dir` (see resolve_under).
LesionInput parse_lesion_input(const nlohmann::json& body, const std::filesystem::path& base_dir);

/// `base / relative`; ErrorKind::Schema for absolute paths or any ".." part.
std::filesystem::path resolve_under(const std::filesystem::path& base, const std::string& relative);

/// Mean of the two planes; the coded BI-RADS value is attached when given.
features::FeatureVector extract_lesion(const LesionInput& input);

struct ScoreResult {
  std::string model_id;
  double probability = 0.0;
  features::FeatureVector features;
  io::Cutoffs cutoffs;
};

/// ErrorKind::MissingBirads when the model uses BI-RADS and none is given.
ScoreResult score_lesion(const io::SavedModel& model, const LesionInput& input);

/// Feature name -> value, plus "birads_code" when present.
nlohmann::json features_json(const features::FeatureVector& v);
/// {probability, featureVector, modelId, cutoffs: {optimal, fullSensitivity},
///  aboveOptimal, aboveFullSensitivity}
nlohmann::json score_json(const ScoreResult& result);
/// Id, mode, features with raw and standardized coefficients, cutoffs.
nlohmann::json model_summary_json(const io::SavedModel& model);

/// Deployable model for a finished study: the chosen subset fitted on every
/// lesion, with cutoffs taken from the LOOCV operating points.
io::SavedModel saved_model_from_study(const std::string& id, const selection::StudyResult& study);

/// Scores every lesion with the saved model (no refitting) and reports AUC
/// plus metrics at the model's two stored cutoffs.
nlohmann::json evaluate_model(const io::SavedModel& model, const eval::Dataset& data);

/// Writes trace.json, report.json, metrics.json, roc.csv, roc.json and
/// model.json into `dir`.
void write_study(const std::filesystem::path& dir, const io::SavedModel& model,
                 const selection::StudyResult& study);

struct DataSource {
  enum class Kind { Manifest, Features, Fixture } kind = Kind::Manifest;
  std::filesystem::path path;
};

/// Manifest (features extracted on load), feature CSV or BI-RADS fixture.
eval::Dataset load_dataset(const DataSource& source);

struct StoredModel {
  io::SavedModel model;
  std::optional<eval::RocCurve> roc;
};

/// Every `<name>/model.json` (with its roc.json when present) and every
/// top-level `*.json` model file, sorted by model id. Duplicate ids raise
/// ErrorKind::DuplicateId.
std::vector<StoredModel> load_model_directory(const std::filesystem::path& dir);

/// `<dir>/<id>/model.json` or `<dir>/<id>.json`; ErrorKind::NotFound otherwise.
io::SavedModel find_model(const std::filesystem::path& dir, const std::string& id);

/// Environment variable naming the default model directory.
inline constexpr const char* kModelDirEnv = "MORPHOCAD_MODEL_DIR";
std::optional<std::filesystem::path> default_model_dir();

}  // namespace morphocad::pipeline
