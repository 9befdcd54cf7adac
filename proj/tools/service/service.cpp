#include "service.hpp"

#include <httplib.h>

#include <atomic>
#include <condition_variable>
#include <cstdio>
#include <map>
#include <mutex>
#include <shared_mutex>
#include <thread>

#include "morphocad/pipeline.hpp"
#include "morphocad/selection.hpp"

namespace morphocad::service {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct Entry {
  std::shared_ptr<const io::SavedModel> model;
  std::optional<eval::RocCurve> roc;
};

struct Study {
  std::string status = "queued";
  json error;
  json report;
};

void reply(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

json parse_body(const httplib::Request& req) {
  try {
    return json::parse(req.body);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::Parse, std::string("request body is not JSON: ") + e.what());
  }
}

bool valid_id(const std::string& id) {
  if (id.empty() || id.size() > 64) return false;
  for (char c : id) {
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_')) return false;
  }
  return true;
}

}  // namespace

int http_status(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::NotFound: return 404;
    case ErrorKind::MissingBirads:
    case ErrorKind::Unfittable:
    case ErrorKind::UndefinedAuc:
    case ErrorKind::AnovaUndefined: return 422;
    case ErrorKind::Io: return 500;
    default: return 400;
  }
}

json error_json(std::string_view kind, std::string_view message) {
  return {{"error", {{"kind", kind}, {"message", message}}}};
}

struct Service::Impl {
  Options options;
  httplib::Server server;

  mutable std::shared_mutex models_mutex;
  std::map<std::string, Entry> models;

  std::mutex studies_mutex;
  std::condition_variable studies_idle;
  std::map<std::string, Study> studies;
  bool study_active = false;
  int study_counter = 0;
  std::thread worker;
  std::atomic<bool> cancel{false};

  explicit Impl(Options o) : options(std::move(o)) {
    if (!options.model_dir.empty() && fs::exists(options.model_dir)) {
      for (auto& m : pipeline::load_model_directory(options.model_dir)) {
        const std::string id = m.model.id;
        models[id] = {std::make_shared<const io::SavedModel>(std::move(m.model)), std::move(m.roc)};
      }
    }
    routes();
  }

  ~Impl() {
    cancel = true;
    server.stop();
    if (worker.joinable()) worker.join();
  }

  template <typename F>
  httplib::Server::Handler guarded(F f) {
    return [this, f](const httplib::Request& req, httplib::Response& res) {
      try {
        (this->*f)(req, res);
      } catch (const Error& e) {
        reply(res, http_status(e.kind()), error_json(to_string(e.kind()), e.what()));
      } catch (const json::exception& e) {
        reply(res, 400, error_json("schema", e.what()));
      } catch (const std::exception& e) {
        reply(res, 500, error_json("internal", e.what()));
      }
    };
  }

  void routes() {
    server.Get("/health", guarded(&Impl::health));
    server.Post("/extract", guarded(&Impl::extract));
    server.Post("/score", guarded(&Impl::score));
    server.Get("/models", guarded(&Impl::list_models));
    server.Get(R"(/roc/([^/]+))", guarded(&Impl::roc));
    server.Post("/studies", guarded(&Impl::start_study));
    server.Get(R"(/studies/([^/]+))", guarded(&Impl::study_status));
  }

  std::shared_ptr<const io::SavedModel> model_for(const json& body) {
    std::shared_lock lock(models_mutex);
    if (body.contains("modelId")) {
      if (!body.at("modelId").is_string()) throw Error(ErrorKind::Schema, "'modelId' must be a string");
      const auto id = body.at("modelId").get<std::string>();
      const auto it = models.find(id);
      if (it == models.end()) throw Error(ErrorKind::NotFound, "unknown model '" + id + "'");
      return it->second.model;
    }
    if (models.size() == 1) return models.begin()->second.model;
    throw Error(ErrorKind::Schema, "missing field 'modelId'");
  }

  void health(const httplib::Request&, httplib::Response& res) {
    std::shared_lock lock(models_mutex);
    reply(res, 200, {{"status", "ok"}, {"models", models.size()}});
  }

  void extract(const httplib::Request& req, httplib::Response& res) {
    const auto input = pipeline::parse_lesion_input(parse_body(req), options.data_root);
    reply(res, 200, {{"featureVector", pipeline::features_json(pipeline::extract_lesion(input))}});
  }

  void score(const httplib::Request& req, httplib::Response& res) {
    const json body = parse_body(req);
    const auto model = model_for(body);
    const auto input = pipeline::parse_lesion_input(body, options.data_root);
    reply(res, 200, pipeline::score_json(pipeline::score_lesion(*model, input)));
  }

  void list_models(const httplib::Request&, httplib::Response& res) {
    std::shared_lock lock(models_mutex);
    json list = json::array();
    for (const auto& [id, e] : models) {
      json summary = pipeline::model_summary_json(*e.model);
      summary["hasRoc"] = e.roc.has_value();
      list.push_back(std::move(summary));
    }
    reply(res, 200, {{"models", list}});
  }

  void roc(const httplib::Request& req, httplib::Response& res) {
    const std::string id = req.matches[1];
    std::shared_lock lock(models_mutex);
    const auto it = models.find(id);
    if (it == models.end() || !it->second.roc) throw Error(ErrorKind::NotFound, "no ROC curve for study '" + id + "'");
    json body = io::to_json(*it->second.roc);
    body["studyId"] = id;
    reply(res, 200, body);
  }

  void start_study(const httplib::Request& req, httplib::Response& res) {
    const json body = parse_body(req);
    if (!body.is_object()) throw Error(ErrorKind::Schema, "request body must be a JSON object");
    pipeline::DataSource source;
    int given = 0;
    for (const auto& [key, kind] : {std::pair{"manifest", pipeline::DataSource::Kind::Manifest},
                                    std::pair{"features", pipeline::DataSource::Kind::Features},
                                    std::pair{"fixture", pipeline::DataSource::Kind::Fixture}}) {
      if (body.contains(key)) {
        ++given;
        source = {kind, pipeline::resolve_under(options.data_root, body.at(key).get<std::string>())};
      }
    }
    if (given != 1) throw Error(ErrorKind::Schema, "give exactly one of 'manifest', 'features' or 'fixture'");
    selection::StudyConfig config;
    config.mode = selection::parse_mode(body.value("mode", std::string("morphological")));
    config.seed = body.value("seed", config.seed);
    config.bootstrap = body.value("bootstrap", config.bootstrap);
    config.fit.lambda = body.value("lambda", config.fit.lambda);
    if (config.bootstrap < 2) throw Error(ErrorKind::InvalidParameter, "bootstrap must be at least 2");
    if (!(config.fit.lambda >= 0.0)) throw Error(ErrorKind::InvalidParameter, "lambda must be non-negative");
    config.on_evaluate = [this](std::span<const int>) {
      if (cancel) throw Error(ErrorKind::Io, "service shutting down");
    };

    std::string id;
    {
      std::lock_guard lock(studies_mutex);
      if (study_active) {
        reply(res, 409, error_json("busy", "a study is already running"));
        return;
      }
      if (body.contains("id")) {
        id = body.at("id").get<std::string>();
        if (!valid_id(id)) throw Error(ErrorKind::Schema, "study id must be 1-64 letters, digits, '-' or '_'");
      } else {
        char buf[32];
        do {
          std::snprintf(buf, sizeof buf, "study-%03d", ++study_counter);
        } while (studies.count(buf) != 0);
        id = buf;
      }
      {
        std::shared_lock models_lock(models_mutex);
        if (studies.count(id) != 0 || models.count(id) != 0) {
          reply(res, 409, error_json("duplicate-id", "study id '" + id + "' is taken"));
          return;
        }
      }
      studies[id] = Study{};
      study_active = true;
      if (worker.joinable()) worker.join();
      worker = std::thread([this, id, source, config] { run(id, source, config); });
    }
    reply(res, 202, {{"studyId", id}, {"status", "queued"}});
  }

  void run(const std::string& id, const pipeline::DataSource& source, const selection::StudyConfig& config) {
    set_status(id, "running");
    try {
      const auto data = pipeline::load_dataset(source);
      const auto study = selection::run_study(data, config);
      auto saved = pipeline::saved_model_from_study(id, study);
      if (!options.model_dir.empty()) pipeline::write_study(options.model_dir / id, saved, study);
      {
        std::unique_lock lock(models_mutex);
        models[id] = {std::make_shared<const io::SavedModel>(std::move(saved)), study.roc};
      }
      std::lock_guard lock(studies_mutex);
      auto& s = studies[id];
      s.status = "done";
      s.report = io::study_report(study);
    } catch (const Error& e) {
      finish_failed(id, error_json(to_string(e.kind()), e.what()));
    } catch (const std::exception& e) {
      finish_failed(id, error_json("internal", e.what()));
    }
    std::lock_guard lock(studies_mutex);
    study_active = false;
    studies_idle.notify_all();
  }

  void set_status(const std::string& id, const char* status) {
    std::lock_guard lock(studies_mutex);
    studies[id].status = status;
  }

  void finish_failed(const std::string& id, json error) {
    std::lock_guard lock(studies_mutex);
    auto& s = studies[id];
    s.status = "failed";
    s.error = std::move(error["error"]);
  }

  void study_status(const httplib::Request& req, httplib::Response& res) {
    const std::string id = req.matches[1];
    std::lock_guard lock(studies_mutex);
    const auto it = studies.find(id);
    if (it == studies.end()) throw Error(ErrorKind::NotFound, "unknown study '" + id + "'");
    json body = {{"studyId", id}, {"status", it->second.status}};
    if (!it->second.error.is_null()) body["error"] = it->second.error;
    if (!it->second.report.is_null()) body["report"] = it->second.report;
    reply(res, 200, body);
  }
};

Service::Service(Options options) : impl_(std::make_unique<Impl>(std::move(options))) {}
Service::~Service() = default;

int Service::bind(const std::string& host, int port) {
  if (port == 0) {
    const int bound = impl_->server.bind_to_any_port(host);
    if (bound < 0) throw Error(ErrorKind::Io, "cannot bind " + host);
    return bound;
  }
  if (!impl_->server.bind_to_port(host, port)) {
    throw Error(ErrorKind::Io, "cannot bind " + host + ":" + std::to_string(port));
  }
  return port;
}

void Service::serve() { impl_->server.listen_after_bind(); }
void Service::stop() { impl_->server.stop(); }
void Service::wait_until_ready() { impl_->server.wait_until_ready(); }

void Service::add_model(io::SavedModel model, std::optional<eval::RocCurve> roc) {
  std::unique_lock lock(impl_->models_mutex);
  const std::string id = model.id;
  impl_->models[id] = {std::make_shared<const io::SavedModel>(std::move(model)), std::move(roc)};
}

std::size_t Service::model_count() const {
  std::shared_lock lock(impl_->models_mutex);
  return impl_->models.size();
}

void Service::wait_for_studies() {
  std::unique_lock lock(impl_->studies_mutex);
  impl_->studies_idle.wait(lock, [this] { return !impl_->study_active; });
}

}  // namespace morphocad::service
