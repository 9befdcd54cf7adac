#include "morphocad/io.hpp"

#include <png.h>

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "morphocad/error.hpp"
#include "morphocad/numeric.hpp"

namespace morphocad::io {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double parse_double(std::string_view text, std::string_view what) {
  const std::string s(text);
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size() || errno == ERANGE) {
    throw Error(ErrorKind::Parse, "cannot read " + std::string(what) + " from '" + s + "'");
  }
  return v;
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, sep)) out.push_back(cell);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

std::string trim(std::string s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return {};
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

template <typename T>
T field(const json& obj, const char* key, std::string_view where) {
  if (!obj.is_object() || !obj.contains(key)) {
    throw Error(ErrorKind::Schema, std::string(where) + ": missing field '" + key + "'");
  }
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw Error(ErrorKind::Schema, std::string(where) + ": field '" + key + "' has the wrong type");
  }
}

PlaneRef parse_plane(const json& obj, std::string_view where) {
  if (!obj.is_object()) throw Error(ErrorKind::Schema, std::string(where) + " must be an object");
  const bool contour = obj.contains("contour"), mask = obj.contains("mask");
  if (contour == mask) {
    throw Error(ErrorKind::Schema, std::string(where) + " needs exactly one of 'contour' or 'mask'");
  }
  PlaneRef p;
  p.kind = contour ? PlaneRef::Kind::Contour : PlaneRef::Kind::Mask;
  p.path = field<std::string>(obj, contour ? "contour" : "mask", where);
  return p;
}

json plane_json(const PlaneRef& p) {
  return json{{p.kind == PlaneRef::Kind::Contour ? "contour" : "mask", p.path}};
}

features::PlaneSource load_plane(const fs::path& base, const PlaneRef& ref, double spacing) {
  const fs::path path = base / ref.path;
  if (!fs::exists(path)) throw Error(ErrorKind::MissingFile, "file not found: " + path.string());
  if (ref.kind == PlaneRef::Kind::Mask) return read_mask_png(path, spacing);
  auto contour = read_contour_text(path, spacing);
  if (contour.size() < kMinManifestVertices) {
    throw Error(ErrorKind::InvalidContour, "contour has " + std::to_string(contour.size()) +
                                               " vertices, at least " +
                                               std::to_string(kMinManifestVertices) + " required");
  }
  return contour;
}

void check_version(const json& doc) {
  const int v = field<int>(doc, "schema_version", "document");
  if (v != kSchemaVersion) {
    throw Error(ErrorKind::Schema, "unsupported schema_version " + std::to_string(v));
  }
}

json vector_json(const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

Eigen::VectorXd vector_from(const json& j, std::string_view what) {
  std::vector<double> v;
  try {
    v = j.get<std::vector<double>>();
  } catch (const json::exception&) {
    throw Error(ErrorKind::Schema, std::string(what) + " must be a number array");
  }
  return Eigen::Map<Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

std::vector<std::string> names_of(const std::vector<int>& ids) {
  std::vector<std::string> out;
  for (int id : ids) out.emplace_back(features::feature_name(id));
  return out;
}

}  // namespace

std::string_view to_string(features::Label label) noexcept {
  return label == features::Label::Malignant ? "malignant" : "benign";
}

features::Label parse_label(std::string_view text) {
  if (text == "benign" || text == "0") return features::Label::Benign;
  if (text == "malignant" || text == "1") return features::Label::Malignant;
  throw Error(ErrorKind::Parse, "unknown label '" + std::string(text) + "'");
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(fs::exists(path) ? ErrorKind::Io : ErrorKind::MissingFile,
                "cannot open " + path.string());
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::Io, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(ErrorKind::Io, "write failed for " + path.string());
}

json read_json(const fs::path& path) {
  const std::string text = read_text(path);
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::Parse, path.string() + ": " + e.what());
  }
}

void write_json(const fs::path& path, const json& doc) { write_text(path, doc.dump(2) + "\n"); }

geometry::Contour parse_contour_text(const std::string& text, std::optional<double> spacing_mm) {
  std::vector<geometry::Point2> pts;
  std::istringstream in(text);
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    std::istringstream fields(line);
    std::string xs, ys, extra;
    if (!(fields >> xs)) continue;
    if (!(fields >> ys) || (fields >> extra)) {
      throw Error(ErrorKind::Parse, "line " + std::to_string(number) + ": expected 'x y'");
    }
    try {
      pts.push_back({parse_double(xs, "x"), parse_double(ys, "y")});
    } catch (const Error& e) {
      throw e.with_context("line " + std::to_string(number));
    }
  }
  return geometry::Contour(std::move(pts), spacing_mm);
}

geometry::Contour read_contour_text(const fs::path& path, std::optional<double> spacing_mm) {
  try {
    return parse_contour_text(read_text(path), spacing_mm);
  } catch (const Error& e) {
    throw e.with_context(path.filename().string());
  }
}

void write_contour_text(const fs::path& path, const geometry::Contour& contour) {
  std::string text;
  for (const auto& p : contour.points()) text += format_double(p.x) + " " + format_double(p.y) + "\n";
  write_text(path, text);
}

geometry::BinaryMask read_mask_png(const fs::path& path, std::optional<double> spacing_mm) {
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&image, path.string().c_str())) {
    throw Error(fs::exists(path) ? ErrorKind::Parse : ErrorKind::MissingFile,
                path.string() + ": " + image.message);
  }
  image.format = PNG_FORMAT_GRAY;
  std::vector<png_byte> buffer(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, buffer.data(), 0, nullptr)) {
    const std::string message = image.message;
    png_image_free(&image);
    throw Error(ErrorKind::Parse, path.string() + ": " + message);
  }
  geometry::Grid grid(static_cast<int>(image.width), static_cast<int>(image.height));
  for (std::size_t i = 0; i < buffer.size(); ++i) grid.cells[i] = buffer[i] != 0 ? 1 : 0;
  return geometry::BinaryMask::from_grid(std::move(grid), spacing_mm);
}

void write_mask_png(const fs::path& path, const geometry::Grid& grid) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(grid.width);
  image.height = static_cast<png_uint_32>(grid.height);
  image.format = PNG_FORMAT_GRAY;
  std::vector<png_byte> buffer(grid.cells.size());
  for (std::size_t i = 0; i < buffer.size(); ++i) buffer[i] = grid.cells[i] ? 255 : 0;
  if (!png_image_write_to_file(&image, path.string().c_str(), 0, buffer.data(), 0, nullptr)) {
    throw Error(ErrorKind::Io, path.string() + ": " + image.message);
  }
}

Manifest parse_manifest(const json& doc) {
  check_version(doc);
  Manifest m;
  const auto& records = doc.contains("records") ? doc.at("records") : json();
  if (!records.is_array()) throw Error(ErrorKind::Schema, "manifest needs a 'records' array");
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    const std::string where = "record " + std::to_string(i);
    ManifestEntry e;
    e.id = field<std::string>(r, "id", where);
    if (e.id.empty()) throw Error(ErrorKind::Schema, where + ": empty id");
    const std::string ctx = "record '" + e.id + "'";
    try {
      e.label = parse_label(field<std::string>(r, "label", ctx));
      e.birads = features::parse_birads(field<std::string>(r, "birads", ctx));
      e.spacing_mm = field<double>(r, "spacing_mm", ctx);
      if (!(e.spacing_mm > 0.0) || !std::isfinite(e.spacing_mm)) {
        throw Error(ErrorKind::Units, "spacing_mm must be positive");
      }
      e.plane_a = parse_plane(r.contains("plane_a") ? r.at("plane_a") : json(), "plane_a");
      e.plane_b = parse_plane(r.contains("plane_b") ? r.at("plane_b") : json(), "plane_b");
    } catch (const Error& err) {
      throw err.with_context(ctx);
    }
    m.entries.push_back(std::move(e));
  }
  return m;
}

json to_json(const Manifest& manifest) {
  json records = json::array();
  for (const auto& e : manifest.entries) {
    records.push_back({{"id", e.id},
                       {"label", to_string(e.label)},
                       {"birads", features::to_string(e.birads)},
                       {"spacing_mm", e.spacing_mm},
                       {"plane_a", plane_json(e.plane_a)},
                       {"plane_b", plane_json(e.plane_b)}});
  }
  return {{"schema_version", manifest.schema_version}, {"records", records}};
}

void write_manifest(const fs::path& path, const Manifest& manifest) { write_json(path, to_json(manifest)); }

std::vector<features::LesionRecord> load_manifest(const fs::path& path, ManifestSummary* summary) {
  const Manifest m = parse_manifest(read_json(path));
  const fs::path base = path.has_parent_path() ? path.parent_path() : fs::path(".");
  std::set<std::string> seen;
  std::vector<features::LesionRecord> out;
  ManifestSummary s;
  for (const auto& e : m.entries) {
    if (!seen.insert(e.id).second) {
      throw Error(ErrorKind::DuplicateId, "duplicate lesion id '" + e.id + "'");
    }
    const std::string ctx = "record '" + e.id + "'";
    auto load = [&](const PlaneRef& ref, const char* plane) {
      try {
        return load_plane(base, ref, e.spacing_mm);
      } catch (const Error& err) {
        throw err.with_context(ctx + plane);
      }
    };
    auto a = load(e.plane_a, " plane A");
    auto b = load(e.plane_b, " plane B");
    out.push_back(features::LesionRecord{e.id, e.label, e.birads, e.spacing_mm, std::move(a), std::move(b)});
    ++s.records;
    ++(e.label == features::Label::Malignant ? s.malignant : s.benign);
  }
  if (summary) *summary = s;
  return out;
}

eval::Dataset extract_dataset(const std::vector<features::LesionRecord>& records) {
  std::vector<features::FeatureVector> vectors(records.size());
  parallel_for(records.size(), [&](std::size_t i) { vectors[i] = features::extract_all(records[i]); });
  eval::Dataset d;
  for (std::size_t i = 0; i < records.size(); ++i) {
    d.add(records[i].id, records[i].label, records[i].birads, vectors[i]);
  }
  return d;
}

void write_features_csv(std::ostream& out, const eval::Dataset& data) {
  out << "id,label,birads";
  for (int id = 1; id <= features::kMorphologicalCount; ++id) out << ',' << features::feature_name(id);
  out << '\n';
  for (std::size_t i = 0; i < data.size(); ++i) {
    out << data.ids[i] << ',' << to_string(static_cast<features::Label>(data.labels[i])) << ','
        << features::to_string(data.birads[i]);
    for (int j = 0; j < features::kMorphologicalCount; ++j) out << ',' << format_double(data.rows[i][j]);
    out << '\n';
  }
}

void write_features_csv(const fs::path& path, const eval::Dataset& data) {
  std::ostringstream out;
  write_features_csv(out, data);
  write_text(path, out.str());
}

eval::Dataset read_features_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorKind::Parse, "empty feature table");
  const auto header = split(trim(line), ',');
  if (header.size() != 3 + features::kMorphologicalCount || header[0] != "id" || header[1] != "label" ||
      header[2] != "birads") {
    throw Error(ErrorKind::Schema, "feature table header must be id,label,birads and the 30 feature names");
  }
  for (int id = 1; id <= features::kMorphologicalCount; ++id) {
    if (header[static_cast<std::size_t>(id) + 2] != features::feature_name(id)) {
      throw Error(ErrorKind::Schema, "column " + std::to_string(id + 3) + " must be " +
                                         std::string(features::feature_name(id)));
    }
  }
  eval::Dataset d;
  int number = 1;
  while (std::getline(in, line)) {
    ++number;
    line = trim(line);
    if (line.empty()) continue;
    const auto cells = split(line, ',');
    const std::string where = "line " + std::to_string(number);
    if (cells.size() != header.size()) throw Error(ErrorKind::Parse, where + ": wrong column count");
    try {
      features::FeatureVector v;
      for (int j = 0; j < features::kMorphologicalCount; ++j) {
        v.values[static_cast<std::size_t>(j)] =
            parse_double(cells[static_cast<std::size_t>(j) + 3], features::feature_name(j + 1));
      }
      d.add(cells[0], parse_label(cells[1]), features::parse_birads(cells[2]), v);
    } catch (const Error& e) {
      throw e.with_context(where);
    }
  }
  return d;
}

eval::Dataset read_features_csv(const fs::path& path) {
  std::istringstream in(read_text(path));
  try {
    return read_features_csv(in);
  } catch (const Error& e) {
    throw e.with_context(path.filename().string());
  }
}

eval::Dataset parse_birads_fixture(const json& doc) {
  check_version(doc);
  const auto cats = field<std::vector<std::string>>(doc, "categories", "fixture");
  const auto benign = field<std::vector<int>>(doc, "benign", "fixture");
  const auto malignant = field<std::vector<int>>(doc, "malignant", "fixture");
  if (benign.size() != cats.size() || malignant.size() != cats.size()) {
    throw Error(ErrorKind::Schema, "fixture count rows must match the category list");
  }
  eval::Dataset d;
  int n = 0;
  for (std::size_t c = 0; c < cats.size(); ++c) {
    const auto category = features::parse_birads(cats[c]);
    if (benign[c] < 0 || malignant[c] < 0) throw Error(ErrorKind::Schema, "negative fixture count");
    for (int k = 0; k < benign[c] + malignant[c]; ++k) {
      char id[16];
      std::snprintf(id, sizeof id, "T%03d", ++n);
      d.add(id, k < benign[c] ? features::Label::Benign : features::Label::Malignant, category);
    }
  }
  return d;
}

eval::Dataset load_birads_fixture(const fs::path& path) { return parse_birads_fixture(read_json(path)); }

bool SavedModel::needs_birads() const {
  const auto& ids = model.feature_ids;
  return std::find(ids.begin(), ids.end(), features::kBiradsFeature) != ids.end();
}

json to_json(const SavedModel& saved) {
  const auto& m = saved.model;
  return {{"schema_version", kSchemaVersion},
          {"id", saved.id},
          {"mode", selection::to_string(saved.mode)},
          {"feature_ids", m.feature_ids},
          {"feature_names", names_of(m.feature_ids)},
          {"coefficients", vector_json(m.coefficients)},
          {"intercept", m.intercept},
          {"standardizer", {{"mean", vector_json(m.standardizer.mean)}, {"scale", vector_json(m.standardizer.scale)}}},
          {"lambda", m.lambda},
          {"converged", m.converged},
          {"iterations", m.iterations},
          {"cutoffs", {{"optimal", saved.cutoffs.optimal}, {"full_sensitivity", saved.cutoffs.full_sensitivity}}}};
}

SavedModel saved_model_from_json(const json& doc) {
  check_version(doc);
  SavedModel s;
  s.id = field<std::string>(doc, "id", "model");
  s.mode = selection::parse_mode(field<std::string>(doc, "mode", "model"));
  auto& m = s.model;
  m.feature_ids = field<std::vector<int>>(doc, "feature_ids", "model");
  for (int id : m.feature_ids) features::feature_name(id);
  m.coefficients = vector_from(doc.at("coefficients"), "coefficients");
  m.intercept = field<double>(doc, "intercept", "model");
  const auto& st = doc.contains("standardizer") ? doc.at("standardizer") : json();
  m.standardizer.mean = vector_from(st.contains("mean") ? st.at("mean") : json(), "standardizer mean");
  m.standardizer.scale = vector_from(st.contains("scale") ? st.at("scale") : json(), "standardizer scale");
  m.lambda = field<double>(doc, "lambda", "model");
  m.converged = doc.value("converged", true);
  m.iterations = doc.value("iterations", 0);
  const auto n = static_cast<Eigen::Index>(m.feature_ids.size());
  if (m.coefficients.size() != n || m.standardizer.mean.size() != n || m.standardizer.scale.size() != n) {
    throw Error(ErrorKind::Schema, "model arrays must match the feature list");
  }
  if (!m.coefficients.allFinite() || !std::isfinite(m.intercept) || !(m.standardizer.scale.array() > 0).all()) {
    throw Error(ErrorKind::Schema, "model parameters must be finite with positive scales");
  }
  const auto& c = doc.contains("cutoffs") ? doc.at("cutoffs") : json();
  s.cutoffs.optimal = field<double>(c, "optimal", "cutoffs");
  s.cutoffs.full_sensitivity = field<double>(c, "full_sensitivity", "cutoffs");
  return s;
}

void write_model(const fs::path& path, const SavedModel& saved) { write_json(path, to_json(saved)); }

SavedModel read_model(const fs::path& path) {
  try {
    return saved_model_from_json(read_json(path));
  } catch (const Error& e) {
    throw e.with_context(path.filename().string());
  }
}

json to_json(const eval::MetricsReport& r) {
  return {{"policy", r.policy},
          {"cutoff", r.cutoff},
          {"counts", {{"tp", r.counts.tp}, {"fn", r.counts.fn}, {"tn", r.counts.tn}, {"fp", r.counts.fp}}},
          {"sensitivity", eval::round1(r.sensitivity)},
          {"specificity", eval::round1(r.specificity)},
          {"accuracy", eval::round1(r.accuracy)}};
}

eval::MetricsReport metrics_from_json(const json& doc) {
  eval::MetricsReport r;
  r.policy = field<std::string>(doc, "policy", "metrics");
  r.cutoff = field<double>(doc, "cutoff", "metrics");
  const auto& c = doc.contains("counts") ? doc.at("counts") : json();
  r.counts.tp = field<int>(c, "tp", "counts");
  r.counts.fn = field<int>(c, "fn", "counts");
  r.counts.tn = field<int>(c, "tn", "counts");
  r.counts.fp = field<int>(c, "fp", "counts");
  r.sensitivity = field<double>(doc, "sensitivity", "metrics");
  r.specificity = field<double>(doc, "specificity", "metrics");
  r.accuracy = field<double>(doc, "accuracy", "metrics");
  return r;
}

json to_json(const selection::SelectionTrace& t) {
  json steps = json::array();
  for (std::size_t k = 0; k < t.steps.size(); ++k) {
    const auto& s = t.steps[k];
    steps.push_back({{"step", k + 1},
                     {"chosen", s.chosen},
                     {"feature", s.chosen == 0 ? std::string() : std::string(features::feature_name(s.chosen))},
                     {"subset", s.subset},
                     {"auc", s.auc},
                     {"auc_std", s.auc_std},
                     {"replicates", s.replicates},
                     {"scores", s.scores}});
  }
  return {{"schema_version", kSchemaVersion},
          {"mode", selection::to_string(t.mode)},
          {"forced", t.forced},
          {"candidates", t.candidates},
          {"excluded", t.excluded},
          {"lambda", t.lambda},
          {"bootstrap", t.bootstrap},
          {"seed", t.seed},
          {"steps", steps}};
}

selection::SelectionTrace trace_from_json(const json& doc) {
  check_version(doc);
  selection::SelectionTrace t;
  t.mode = selection::parse_mode(field<std::string>(doc, "mode", "trace"));
  t.forced = field<std::vector<int>>(doc, "forced", "trace");
  t.candidates = field<std::vector<int>>(doc, "candidates", "trace");
  t.excluded = field<std::vector<int>>(doc, "excluded", "trace");
  t.lambda = field<double>(doc, "lambda", "trace");
  t.bootstrap = field<int>(doc, "bootstrap", "trace");
  t.seed = field<std::uint64_t>(doc, "seed", "trace");
  const auto& steps = doc.contains("steps") ? doc.at("steps") : json();
  if (!steps.is_array()) throw Error(ErrorKind::Schema, "trace needs a 'steps' array");
  for (const auto& s : steps) {
    selection::SelectionStep step;
    step.chosen = field<int>(s, "chosen", "step");
    step.subset = field<std::vector<int>>(s, "subset", "step");
    step.auc = field<double>(s, "auc", "step");
    step.auc_std = field<double>(s, "auc_std", "step");
    step.replicates = field<std::vector<double>>(s, "replicates", "step");
    step.scores = field<std::vector<double>>(s, "scores", "step");
    t.steps.push_back(std::move(step));
  }
  return t;
}

json study_report(const selection::StudyResult& study) {
  const auto& t = study.trace;
  const auto& r = study.reduction;
  json series = json::array();
  for (std::size_t k = 0; k < t.steps.size(); ++k) {
    const auto& s = t.steps[k];
    series.push_back({{"size", s.subset.size()},
                      {"added", s.chosen == 0 ? std::string() : std::string(features::feature_name(s.chosen))},
                      {"auc", s.auc},
                      {"auc_std", s.auc_std}});
  }
  json reduction = {{"best_step", r.best_step}, {"chosen_step", r.chosen_step}, {"degenerate", r.degenerate}};
  if (!r.warning.empty()) reduction["warning"] = r.warning;
  if (r.anova) reduction["anova"] = {{"f", r.anova->f}, {"p", r.anova->p}};
  if (r.tukey) {
    json versus_best = json::array();
    for (std::size_t k = 0; k < r.best_step; ++k) versus_best.push_back(r.tukey->significant[k][r.best_step - 1]);
    reduction["tukey"] = {{"q_critical", r.tukey->q_critical},
                          {"margin", r.tukey->margin},
                          {"significant_vs_best", versus_best}};
  }
  json avoided = json::object();
  for (int code = 1; code <= 8; ++code) {
    const int n = study.avoided_biopsies[static_cast<std::size_t>(code - 1)];
    if (n > 0) avoided[std::string(features::to_string(features::decode_birads(code)))] = n;
  }
  int total = 0;
  for (int n : study.avoided_biopsies) total += n;
  const std::size_t forced = t.forced.size();
  return {{"schema_version", kSchemaVersion},
          {"mode", selection::to_string(t.mode)},
          {"lambda", t.lambda},
          {"bootstrap", t.bootstrap},
          {"seed", t.seed},
          {"excluded", names_of(t.excluded)},
          {"chosen_subset", {{"ids", r.subset},
                             {"names", names_of(r.subset)},
                             {"size_with_forced", r.subset.size()},
                             {"size_without_forced", r.subset.size() - forced}}},
          {"auc", study.roc.auc},
          {"auc_std", study.auc_std},
          {"reduction", reduction},
          {"metrics", json::array({to_json(study.optimal), to_json(study.full_sensitivity)})},
          {"avoided_biopsies", {{"by_birads", avoided}, {"total", total}}},
          {"series", series}};
}

void write_roc_csv(std::ostream& out, const eval::RocCurve& roc) {
  out << "threshold,fpr,tpr\n";
  for (const auto& p : roc.points) {
    out << format_double(p.threshold) << ',' << format_double(p.fpr) << ',' << format_double(p.tpr) << '\n';
  }
}

void write_roc_csv(const fs::path& path, const eval::RocCurve& roc) {
  std::ostringstream out;
  write_roc_csv(out, roc);
  write_text(path, out.str());
}

std::vector<eval::RocPoint> read_roc_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != "threshold,fpr,tpr") {
    throw Error(ErrorKind::Schema, "ROC table header must be threshold,fpr,tpr");
  }
  std::vector<eval::RocPoint> points;
  int number = 1;
  while (std::getline(in, line)) {
    ++number;
    if (line.empty()) continue;
    const auto cells = split(line, ',');
    const std::string where = "line " + std::to_string(number);
    if (cells.size() != 3) throw Error(ErrorKind::Parse, where + ": expected three columns");
    try {
      eval::RocPoint p;
      p.threshold = cells[0] == "inf" ? std::numeric_limits<double>::infinity() : parse_double(cells[0], "threshold");
      p.fpr = parse_double(cells[1], "fpr");
      p.tpr = parse_double(cells[2], "tpr");
      points.push_back(p);
    } catch (const Error& e) {
      throw e.with_context(where);
    }
  }
  return points;
}

json to_json(const eval::RocCurve& roc) {
  json points = json::array();
  for (const auto& p : roc.points) {
    points.push_back({{"threshold", std::isinf(p.threshold) ? json() : json(p.threshold)},
                      {"fpr", p.fpr},
                      {"tpr", p.tpr},
                      {"tp", p.tp},
                      {"fp", p.fp}});
  }
  return {{"auc", roc.auc}, {"positives", roc.positives}, {"negatives", roc.negatives}, {"points", points}};
}

eval::RocCurve roc_from_json(const json& doc) {
  eval::RocCurve roc;
  roc.auc = field<double>(doc, "auc", "roc");
  roc.positives = field<int>(doc, "positives", "roc");
  roc.negatives = field<int>(doc, "negatives", "roc");
  const auto& points = doc.contains("points") ? doc.at("points") : json();
  if (!points.is_array()) throw Error(ErrorKind::Schema, "roc needs a 'points' array");
  for (const auto& p : points) {
    eval::RocPoint r;
    const auto& t = p.contains("threshold") ? p.at("threshold") : json();
    r.threshold = t.is_null() ? std::numeric_limits<double>::infinity() : field<double>(p, "threshold", "roc point");
    r.fpr = field<double>(p, "fpr", "roc point");
    r.tpr = field<double>(p, "tpr", "roc point");
    r.tp = field<int>(p, "tp", "roc point");
    r.fp = field<int>(p, "fp", "roc point");
    roc.points.push_back(r);
  }
  return roc;
}

}  // namespace morphocad::io
