#pragma once

#include <filesystem>
#include <memory>
#include <nlohmann/json.hpp>
#include <optional>
#include <string>

#include "morphocad/error.hpp"
#include "morphocad/eval.hpp"
#include "morphocad/io.hpp"

namespace morphocad::service {

struct Options {
  /// Models (and their ROC curves) loaded at start; finished studies are
  /// also written here. Empty: start with no models, keep studies in memory.
  std::filesystem::path model_dir;
  /// Base directory for mask references and study input files.
  std::filesystem::path data_root = ".";
};

/// HTTP JSON API:
///   POST /extract          lesion body -> {featureVector}
///   POST /score            lesion body + modelId -> score
///   GET  /models           -> {models: [...]}
///   GET  /roc/{studyId}    -> ROC points and AUC of a finished study
///   POST /studies          start a background study (one at a time)
///   GET  /studies/{id}     -> {studyId, status, error?, report?}
///   GET  /health
class Service {
 public:
  explicit Service(Options options);
  ~Service();
  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  /// Returns the bound port.
  int bind(const std::string& host, int port = 0);
  /// Blocks until stop().
  void serve();
  void stop();
  void wait_until_ready();

  void add_model(io::SavedModel model, std::optional<eval::RocCurve> roc = std::nullopt);
  std::size_t model_count() const;
  /// Blocks until no study is queued or running.
  void wait_for_studies();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

int http_status(ErrorKind kind) noexcept;
/// {"error": {"kind": ..., "message": ...}}
nlohmann::json error_json(std::string_view kind, std::string_view message);

}  // namespace morphocad::service
