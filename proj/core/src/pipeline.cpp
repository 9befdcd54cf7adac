#include "morphocad/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>

#include "morphocad/error.hpp"

namespace morphocad::pipeline {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

features::PlaneSource parse_plane(const json& obj, const fs::path& base_dir, double spacing) {
  const bool contour = obj.contains("contour");
  const bool mask = obj.contains("mask");
  if (contour == mask) throw Error(ErrorKind::Schema, "a plane needs exactly one of 'contour' or 'mask'");
  if (mask) {
    if (!obj.at("mask").is_string()) throw Error(ErrorKind::Schema, "'mask' must be a file name");
    return io::read_mask_png(resolve_under(base_dir, obj.at("mask").get<std::string>()), spacing);
  }
  const auto& pts = obj.at("contour");
  if (!pts.is_array()) throw Error(ErrorKind::Schema, "'contour' must be an array of [x, y] pairs");
  std::vector<geometry::Point2> points;
  points.reserve(pts.size());
  for (const auto& p : pts) {
    if (!p.is_array() || p.size() != 2 || !p[0].is_number() || !p[1].is_number()) {
      throw Error(ErrorKind::Schema, "'contour' must be an array of [x, y] pairs");
    }
    points.push_back({p[0].get<double>(), p[1].get<double>()});
  }
  return geometry::Contour(std::move(points), spacing);
}

}  // namespace

fs::path resolve_under(const fs::path& base, const std::string& relative) {
  const fs::path rel(relative);
  if (relative.empty() || rel.is_absolute() || rel.has_root_name()) {
    throw Error(ErrorKind::Schema, "path '" + relative + "' must be relative");
  }
  for (const auto& part : rel) {
    if (part == "..") throw Error(ErrorKind::Schema, "path '" + relative + "' leaves the data directory");
  }
  return base / rel;
}

LesionInput parse_lesion_input(const json& body, const fs::path& base_dir) {
  if (!body.is_object()) throw Error(ErrorKind::Schema, "request body must be a JSON object");
  if (!body.contains("spacingMm") || !body.at("spacingMm").is_number()) {
    throw Error(ErrorKind::Schema, "missing numeric field 'spacingMm'");
  }
  const double spacing = body.at("spacingMm").get<double>();
  if (!(spacing > 0.0) || !std::isfinite(spacing)) throw Error(ErrorKind::Units, "spacingMm must be positive");
  std::optional<features::BiradsCategory> birads;
  if (body.contains("birads") && !body.at("birads").is_null()) {
    if (!body.at("birads").is_string()) throw Error(ErrorKind::Schema, "'birads' must be a string");
    birads = features::parse_birads(body.at("birads").get<std::string>());
  }
  auto plane = [&](const json& obj, const char* name) {
    try {
      return parse_plane(obj, base_dir, spacing);
    } catch (const Error& e) {
      throw e.with_context(name);
    }
  };
  auto a = plane(body, "plane A");
  std::optional<features::PlaneSource> b;
  if (body.contains("planeB") && !body.at("planeB").is_null()) b = plane(body.at("planeB"), "plane B");
  return LesionInput{std::move(a), std::move(b), birads, spacing};
}

features::FeatureVector extract_lesion(const LesionInput& input) {
  features::LesionRecord r{"lesion", features::Label::Benign, input.birads.value_or(features::BiradsCategory::C3),
                           input.spacing_mm, input.plane_a, input.plane_b.value_or(input.plane_a)};
  return features::extract_all(r, input.birads.has_value());
}

ScoreResult score_lesion(const io::SavedModel& model, const LesionInput& input) {
  if (model.needs_birads() && !input.birads) {
    throw Error(ErrorKind::MissingBirads, "model '" + model.id + "' needs a BI-RADS category");
  }
  ScoreResult out;
  out.model_id = model.id;
  out.cutoffs = model.cutoffs;
  out.features = extract_lesion(input);
  std::vector<double> row;
  row.reserve(model.model.feature_ids.size());
  for (int id : model.model.feature_ids) row.push_back(out.features.at(id));
  out.probability = model.model.predict_proba(row);
  return out;
}

json features_json(const features::FeatureVector& v) {
  json out = json::object();
  for (int id = 1; id <= features::kMorphologicalCount; ++id) {
    out[std::string(features::feature_name(id))] = v.at(id);
  }
  if (v.birads_code) out[std::string(features::feature_name(features::kBiradsFeature))] = *v.birads_code;
  return out;
}

json score_json(const ScoreResult& r) {
  return {{"modelId", r.model_id},
          {"probability", r.probability},
          {"featureVector", features_json(r.features)},
          {"cutoffs", {{"optimal", r.cutoffs.optimal}, {"fullSensitivity", r.cutoffs.full_sensitivity}}},
          {"aboveOptimal", r.probability >= r.cutoffs.optimal},
          {"aboveFullSensitivity", r.probability >= r.cutoffs.full_sensitivity}};
}

json model_summary_json(const io::SavedModel& saved) {
  const auto& m = saved.model;
  const auto raw = m.raw();
  json feats = json::array();
  for (std::size_t j = 0; j < m.feature_ids.size(); ++j) {
    const auto k = static_cast<Eigen::Index>(j);
    feats.push_back({{"id", m.feature_ids[j]},
                     {"name", features::feature_name(m.feature_ids[j])},
                     {"coefficient", m.coefficients[k]},
                     {"rawCoefficient", raw.weights[k]}});
  }
  return {{"id", saved.id},
          {"mode", selection::to_string(saved.mode)},
          {"needsBirads", saved.needs_birads()},
          {"intercept", m.intercept},
          {"rawIntercept", raw.intercept},
          {"features", feats},
          {"cutoffs", {{"optimal", saved.cutoffs.optimal}, {"fullSensitivity", saved.cutoffs.full_sensitivity}}}};
}

io::SavedModel saved_model_from_study(const std::string& id, const selection::StudyResult& study) {
  io::SavedModel s;
  s.id = id;
  s.mode = study.trace.mode;
  s.model = study.model;
  s.cutoffs.optimal = study.optimal.cutoff;
  s.cutoffs.full_sensitivity = study.full_sensitivity.cutoff;
  return s;
}

json evaluate_model(const io::SavedModel& saved, const eval::Dataset& data) {
  const auto x = data.columns(saved.model.feature_ids);
  std::vector<double> scores(data.size());
  std::vector<double> row(saved.model.feature_ids.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    for (std::size_t j = 0; j < row.size(); ++j) {
      row[j] = x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    }
    scores[i] = saved.model.predict_proba(row);
  }
  const auto roc = eval::roc_and_auc(scores, data.labels);
  const auto optimal = eval::metrics_at(scores, data.labels, saved.cutoffs.optimal, "optimal");
  const auto full = eval::metrics_at(scores, data.labels, saved.cutoffs.full_sensitivity, "full-sensitivity");
  const auto avoided = eval::avoided_biopsies(scores, data.labels, data.birads, saved.cutoffs.full_sensitivity);
  int total = 0;
  for (int n : avoided) total += n;
  return {{"modelId", saved.id},
          {"lesions", data.size()},
          {"auc", roc.auc},
          {"metrics", json::array({io::to_json(optimal), io::to_json(full)})},
          {"avoidedBiopsies", total}};
}

void write_study(const fs::path& dir, const io::SavedModel& model, const selection::StudyResult& study) {
  fs::create_directories(dir);
  io::write_json(dir / "trace.json", io::to_json(study.trace));
  io::write_json(dir / "report.json", io::study_report(study));
  io::write_json(dir / "metrics.json",
                 json::array({io::to_json(study.optimal), io::to_json(study.full_sensitivity)}));
  io::write_roc_csv(dir / "roc.csv", study.roc);
  io::write_json(dir / "roc.json", io::to_json(study.roc));
  io::write_model(dir / "model.json", model);
}

eval::Dataset load_dataset(const DataSource& source) {
  switch (source.kind) {
    case DataSource::Kind::Manifest: return io::extract_dataset(io::load_manifest(source.path));
    case DataSource::Kind::Features: return io::read_features_csv(source.path);
    case DataSource::Kind::Fixture: return io::load_birads_fixture(source.path);
  }
  throw Error(ErrorKind::InvalidParameter, "unknown data source");
}

std::vector<StoredModel> load_model_directory(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw Error(ErrorKind::MissingFile, "model directory not found: " + dir.string());
  std::vector<fs::path> entries;
  for (const auto& e : fs::directory_iterator(dir)) entries.push_back(e.path());
  std::sort(entries.begin(), entries.end());
  std::vector<StoredModel> out;
  for (const auto& path : entries) {
    if (fs::is_directory(path)) {
      if (!fs::exists(path / "model.json")) continue;
      StoredModel m{io::read_model(path / "model.json"), std::nullopt};
      if (fs::exists(path / "roc.json")) m.roc = io::roc_from_json(io::read_json(path / "roc.json"));
      out.push_back(std::move(m));
    } else if (path.extension() == ".json") {
      out.push_back({io::read_model(path), std::nullopt});
    }
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.model.id < b.model.id; });
  for (std::size_t i = 1; i < out.size(); ++i) {
    if (out[i].model.id == out[i - 1].model.id) {
      throw Error(ErrorKind::DuplicateId, "model id '" + out[i].model.id + "' appears twice in " + dir.string());
    }
  }
  return out;
}

io::SavedModel find_model(const fs::path& dir, const std::string& id) {
  for (const auto& path : {dir / id / "model.json", dir / (id + ".json")}) {
    if (fs::exists(path)) return io::read_model(path);
  }
  throw Error(ErrorKind::NotFound, "no model '" + id + "' in " + dir.string());
}

std::optional<fs::path> default_model_dir() {
  const char* value = std::getenv(kModelDirEnv);
  if (value == nullptr || *value == '\0') return std::nullopt;
  return fs::path(value);
}

}  // namespace morphocad::pipeline
