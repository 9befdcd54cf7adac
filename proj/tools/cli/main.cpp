#include <CLI11.hpp>
#include <csignal>
#include <cstdio>
#include <iostream>
#include <thread>

#include "morphocad/error.hpp"
#include "morphocad/io.hpp"
#include "morphocad/pipeline.hpp"
#include "morphocad/selection.hpp"
#include "morphocad/synth.hpp"
#include "service.hpp"

namespace fs = std::filesystem;
using namespace morphocad;
using nlohmann::json;

namespace {

struct DataFlags {
  std::string manifest;
  std::string features;
  std::string fixture;

  void add_to(CLI::App* cmd) {
    auto* group = cmd->add_option_group("data", "lesion data (exactly one)");
    group->add_option("--manifest", manifest, "dataset manifest (JSON)");
    group->add_option("--features", features, "feature table written by 'extract'");
    group->add_option("--fixture", fixture, "BI-RADS count fixture (JSON)");
    group->require_option(1);
  }

  pipeline::DataSource source() const {
    if (!manifest.empty()) return {pipeline::DataSource::Kind::Manifest, manifest};
    if (!features.empty()) return {pipeline::DataSource::Kind::Features, features};
    return {pipeline::DataSource::Kind::Fixture, fixture};
  }
};

struct ModelFlags {
  std::string path;
  std::string id;
  std::string dir;

  void add_to(CLI::App* cmd) {
    auto* group = cmd->add_option_group("model", "saved model (exactly one)");
    group->add_option("--model", path, "model file written by 'select'");
    group->add_option("--model-id", id, "model id looked up in the model directory");
    group->require_option(1);
    cmd->add_option("--models", dir, std::string("model directory (default: $") + pipeline::kModelDirEnv + ")");
  }

  io::SavedModel load() const {
    if (!path.empty()) return io::read_model(path);
    fs::path d = dir;
    if (d.empty()) {
      const auto env = pipeline::default_model_dir();
      if (!env) {
        throw Error(ErrorKind::InvalidParameter,
                    std::string("--model-id needs --models or $") + pipeline::kModelDirEnv);
      }
      d = *env;
    }
    return pipeline::find_model(d, id);
  }
};

void print(const json& doc) { std::cout << doc.dump(2) << std::endl; }

void emit(const json& doc, const std::string& out) {
  if (out.empty()) {
    print(doc);
  } else {
    io::write_json(out, doc);
    print({{"out", out}});
  }
}

int fail(std::string_view kind, std::string_view message, int code) {
  std::cerr << json{{"error", {{"kind", kind}, {"message", message}}}}.dump() << std::endl;
  return code;
}

features::PlaneSource read_plane(const std::string& contour, const std::string& mask, double spacing) {
  if (!contour.empty()) return io::read_contour_text(contour, spacing);
  return io::read_mask_png(mask, spacing);
}

int serve(service::Options options, const std::string& host, int port) {
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  service::Service svc(std::move(options));
  const int bound = svc.bind(host, port);
  std::thread waiter([&] {
    int sig = 0;
    sigwait(&signals, &sig);
    svc.stop();
  });
  std::thread announce([&] {
    svc.wait_until_ready();
    print({{"listening", {{"host", host}, {"port", bound}}}, {"models", svc.model_count()}});
  });
  svc.serve();
  announce.join();
  pthread_kill(waiter.native_handle(), SIGTERM);
  waiter.join();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Morphological breast lesion classification"};
  app.require_subcommand(1);

  // extract
  auto* extract = app.add_subcommand("extract", "extract the 30 contour features of every lesion");
  std::string extract_manifest, extract_out;
  extract->add_option("--manifest", extract_manifest, "dataset manifest (JSON)")->required();
  extract->add_option("--out", extract_out, "feature table (CSV)")->required();

  // select
  auto* select = app.add_subcommand("select", "forward selection, backward reduction and LOOCV report");
  DataFlags select_data;
  select_data.add_to(select);
  std::string mode = "morphological", select_out, study_id;
  selection::StudyConfig config;
  select->add_option("--mode", mode, "morphological | combined | birads-only")
      ->check(CLI::IsMember({"morphological", "combined", "birads-only"}));
  select->add_option("--seed", config.seed, "bootstrap seed")->capture_default_str();
  select->add_option("--bootstrap", config.bootstrap, "bootstrap replicates")
      ->check(CLI::Range(2, 1000000))
      ->capture_default_str();
  select->add_option("--lambda", config.fit.lambda, "ridge penalty")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  select->add_option("--out", select_out, "study output directory")->required();
  select->add_option("--id", study_id, "model id (default: output directory name)");

  // evaluate
  auto* evaluate = app.add_subcommand("evaluate", "metrics of a saved model on a dataset");
  DataFlags eval_data;
  eval_data.add_to(evaluate);
  ModelFlags eval_model;
  eval_model.add_to(evaluate);
  std::string eval_out;
  evaluate->add_option("--out", eval_out, "metrics file (JSON; default stdout)");

  // score
  auto* score = app.add_subcommand("score", "malignancy probability of one lesion");
  ModelFlags score_model;
  score_model.add_to(score);
  std::string contour_a, mask_a, contour_b, mask_b, birads, score_out;
  double spacing = 0.0;
  auto* plane_a = score->add_option_group("plane A", "first plane (exactly one)");
  plane_a->add_option("--contour", contour_a, "vertex list (text)");
  plane_a->add_option("--mask", mask_a, "binary mask (PNG)");
  plane_a->require_option(1);
  auto* plane_b = score->add_option_group("plane B", "second plane (optional)");
  plane_b->add_option("--plane-b-contour", contour_b, "vertex list (text)");
  plane_b->add_option("--plane-b-mask", mask_b, "binary mask (PNG)");
  plane_b->require_option(0, 1);
  score->add_option("--birads", birads, "BI-RADS category (3, 4a, 4b, 4c, 5, ...)");
  score->add_option("--spacing", spacing, "pixel spacing in mm")->required()->check(CLI::PositiveNumber);
  score->add_option("--out", score_out, "score file (JSON; default stdout)");

  // synth
  auto* synth_cmd = app.add_subcommand("synth", "write a synthetic dataset");
  int benign = 75, malignant = 32;
  std::uint64_t synth_seed = 1;
  synth::DatasetOptions synth_options;
  std::string synth_out;
  synth_cmd->add_option("--benign", benign, "benign lesions")->capture_default_str();
  synth_cmd->add_option("--malignant", malignant, "malignant lesions")->capture_default_str();
  synth_cmd->add_option("--seed", synth_seed, "generator seed")->capture_default_str();
  synth_cmd->add_option("--separation", synth_options.separation, "class separation in [0, 1]")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  synth_cmd->add_option("--spacing", synth_options.spacing_mm, "pixel spacing in mm")->capture_default_str();
  synth_cmd->add_option("--out", synth_out, "output directory")->required();

  // serve
  auto* serve_cmd = app.add_subcommand("serve", "HTTP scoring service");
  service::Options svc_options;
  std::string host = "127.0.0.1", models_dir, data_root = ".";
  int port = 8080;
  serve_cmd->add_option("--port", port, "TCP port (0: any free port)")->check(CLI::Range(0, 65535))->capture_default_str();
  serve_cmd->add_option("--host", host, "listen address")->capture_default_str();
  serve_cmd->add_option("--models", models_dir, std::string("model directory (default: $") + pipeline::kModelDirEnv + ")");
  serve_cmd->add_option("--data-root", data_root, "base directory for mask and study paths")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail("usage", e.what(), 2);
  }

  try {
    if (*extract) {
      io::ManifestSummary summary;
      const auto records = io::load_manifest(extract_manifest, &summary);
      io::write_features_csv(extract_out, io::extract_dataset(records));
      print({{"records", summary.records}, {"benign", summary.benign}, {"malignant", summary.malignant},
             {"out", extract_out}});
    } else if (*select) {
      config.mode = selection::parse_mode(mode);
      const auto data = pipeline::load_dataset(select_data.source());
      const auto study = selection::run_study(data, config);
      const fs::path dir = select_out;
      const std::string id = study_id.empty() ? fs::absolute(dir).lexically_normal().filename().string() : study_id;
      const auto saved = pipeline::saved_model_from_study(id, study);
      pipeline::write_study(dir, saved, study);
      const auto report = io::study_report(study);
      print({{"modelId", id}, {"out", select_out}, {"chosen_subset", report["chosen_subset"]},
             {"auc", report["auc"]}, {"metrics", report["metrics"]}});
    } else if (*evaluate) {
      emit(pipeline::evaluate_model(eval_model.load(), pipeline::load_dataset(eval_data.source())), eval_out);
    } else if (*score) {
      pipeline::LesionInput input{read_plane(contour_a, mask_a, spacing), std::nullopt, std::nullopt, spacing};
      if (!contour_b.empty() || !mask_b.empty()) input.plane_b = read_plane(contour_b, mask_b, spacing);
      if (!birads.empty()) input.birads = features::parse_birads(birads);
      emit(pipeline::score_json(pipeline::score_lesion(score_model.load(), input)), score_out);
    } else if (*synth_cmd) {
      const auto dataset = synth::make_dataset(benign, malignant, synth_seed, synth_options);
      synth::write_dataset(dataset, synth_out);
      print({{"records", dataset.records.size()}, {"out", synth_out},
             {"manifest", (fs::path(synth_out) / "manifest.json").string()}});
    } else if (*serve_cmd) {
      if (models_dir.empty()) {
        if (const auto env = pipeline::default_model_dir()) models_dir = env->string();
      }
      svc_options.model_dir = models_dir;
      svc_options.data_root = data_root;
      return serve(std::move(svc_options), host, port);
    }
  } catch (const Error& e) {
    return fail(to_string(e.kind()), e.what(), 1);
  } catch (const std::exception& e) {
    return fail("internal", e.what(), 1);
  }
  return 0;
}
