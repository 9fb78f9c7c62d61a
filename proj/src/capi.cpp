#include "cropsight/cropsight.h"

#include <filesystem>
#include <new>

#include "cropsight/classifier.hpp"
#include "cropsight/error.hpp"
#include "cropsight/http_service.hpp"
#include "cropsight/pipeline.hpp"
#include "cropsight/synth.hpp"

using namespace cropsight;

struct cs_config {
  pipeline::PipelineConfig cfg;
};
struct cs_model {
  classifier::MlpModel model;
};
struct cs_diagnosis {
  pipeline::PipelineResult result;
  std::string json;
};
struct cs_report {
  classifier::AccuracyReport report;
  std::string text;
  std::string csv;
};
struct cs_server {
  std::unique_ptr<service::Gateway> gateway;
};

namespace {

thread_local std::string g_last_error;

template <class F>
cs_status guard(F&& f) noexcept {
  try {
    f();
    g_last_error.clear();
    return CS_OK;
  } catch (const Error& e) {
    g_last_error = e.what();
    return static_cast<cs_status>(e.code());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return CS_INTERNAL;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return CS_INTERNAL;
  }
}

void require(const void* p, const char* what) {
  if (!p) throw Error(ErrorCode::InvalidParams, std::string(what) + " must not be NULL");
}

const pipeline::PipelineConfig& config_or_default(const cs_config* cfg) {
  static const pipeline::PipelineConfig defaults;
  return cfg ? cfg->cfg : defaults;
}

}  // namespace

extern "C" {

const char* cs_version(void) { return service::kVersion; }

const char* cs_last_error(void) { return g_last_error.c_str(); }

const char* cs_status_name(cs_status status) {
  return error_code_name(static_cast<ErrorCode>(status)).data();
}

void cs_train_options_default(cs_train_options* out) {
  if (!out) return;
  classifier::TrainingConfig t;
  *out = {t.learning_rate, t.epochs, t.batch_size, t.h1, t.h2, t.l2, t.seed};
}

cs_status cs_config_new(cs_config** out) {
  return guard([&] {
    require(out, "out");
    *out = new cs_config{};
  });
}

cs_status cs_config_load(const char* path, cs_config** out) {
  return guard([&] {
    require(path, "path");
    require(out, "out");
    *out = new cs_config{pipeline::load_config(path)};
  });
}

cs_status cs_config_set(cs_config* cfg, const char* key, const char* value) {
  return guard([&] {
    require(cfg, "cfg");
    require(key, "key");
    require(value, "value");
    pipeline::set_config_value(cfg->cfg, key, value, std::filesystem::current_path().string());
  });
}

void cs_config_free(cs_config* cfg) { delete cfg; }

cs_status cs_corpus_generate(int train_per_class, int test_per_class, uint64_t seed, const char* out_dir,
                             size_t* files_written) {
  return guard([&] {
    require(out_dir, "out_dir");
    auto manifest = synth::generate_corpus(train_per_class, test_per_class, seed, out_dir);
    if (files_written) *files_written = manifest.entries.size();
  });
}

cs_status cs_model_train(const char* corpus_dir, const cs_config* cfg, const cs_train_options* opts,
                         cs_model** out) {
  return guard([&] {
    require(corpus_dir, "corpus_dir");
    require(out, "out");
    classifier::TrainingConfig t;
    if (opts) {
      t.learning_rate = opts->learning_rate;
      t.epochs = opts->epochs;
      t.batch_size = opts->batch_size;
      t.h1 = opts->hidden1;
      t.h2 = opts->hidden2;
      t.l2 = opts->l2;
      t.seed = opts->seed;
    }
    auto result = pipeline::train_on_corpus(corpus_dir, config_or_default(cfg), t);
    *out = new cs_model{std::move(result.model)};
  });
}

cs_status cs_model_load(const char* path, cs_model** out) {
  return guard([&] {
    require(path, "path");
    require(out, "out");
    *out = new cs_model{pipeline::load_model_file(path)};
  });
}

cs_status cs_model_save(const cs_model* model, const char* path) {
  return guard([&] {
    require(model, "model");
    require(path, "path");
    pipeline::save_model_file(model->model, path);
  });
}

void cs_model_free(cs_model* model) { delete model; }

cs_status cs_diagnose_file(const cs_model* model, const cs_config* cfg, const char* path, cs_diagnosis** out) {
  return guard([&] {
    require(model, "model");
    require(path, "path");
    require(out, "out");
    auto img = imaging::load_image_file(path);
    auto result = pipeline::run_pipeline(img, config_or_default(cfg), model->model, path);
    auto json = pipeline::diagnosis_json(result);
    *out = new cs_diagnosis{std::move(result), std::move(json)};
  });
}

cs_status cs_diagnose_bytes(const cs_model* model, const cs_config* cfg, const uint8_t* data, size_t len,
                            const char* image_id, cs_diagnosis** out) {
  return guard([&] {
    require(model, "model");
    require(out, "out");
    if (len) require(data, "data");
    auto result = pipeline::run_pipeline(std::span(data, len), config_or_default(cfg), model->model,
                                         image_id ? image_id : "");
    auto json = pipeline::diagnosis_json(result);
    *out = new cs_diagnosis{std::move(result), std::move(json)};
  });
}

cs_class cs_diagnosis_class(const cs_diagnosis* d) {
  return d ? static_cast<cs_class>(d->result.diagnosis.final_class) : CS_LEAF_BLAST;
}

const char* cs_diagnosis_class_name(const cs_diagnosis* d) {
  return d ? classifier::class_name(d->result.diagnosis.final_class).data() : "";
}

double cs_diagnosis_confidence(const cs_diagnosis* d) { return d ? d->result.diagnosis.confidence : 0.0; }

size_t cs_diagnosis_spot_count(const cs_diagnosis* d) {
  return d ? d->result.diagnosis.spot_predictions.size() : 0;
}

const char* cs_diagnosis_json(const cs_diagnosis* d) { return d ? d->json.c_str() : ""; }

void cs_diagnosis_free(cs_diagnosis* d) { delete d; }

cs_status cs_evaluate(const cs_model* model, const char* corpus_dir, const cs_config* cfg, cs_report** out) {
  return guard([&] {
    require(model, "model");
    require(corpus_dir, "corpus_dir");
    require(out, "out");
    auto report = pipeline::evaluate_on_corpus(model->model, corpus_dir, config_or_default(cfg));
    auto text = report.to_text();
    auto csv = report.to_csv();
    *out = new cs_report{report, std::move(text), std::move(csv)};
  });
}

double cs_report_image_accuracy(const cs_report* r) { return r ? r->report.image_accuracy() : 0.0; }

double cs_report_spot_accuracy(const cs_report* r) { return r ? r->report.spot_accuracy() : 0.0; }

const char* cs_report_text(const cs_report* r) { return r ? r->text.c_str() : ""; }

const char* cs_report_csv(const cs_report* r) { return r ? r->csv.c_str() : ""; }

void cs_report_free(cs_report* r) { delete r; }

cs_status cs_server_create(const cs_config* cfg, cs_server** out) {
  return guard([&] {
    require(cfg, "cfg");
    require(out, "out");
    *out = new cs_server{std::make_unique<service::Gateway>(cfg->cfg)};
  });
}

cs_status cs_server_bind(cs_server* s, int* port) {
  return guard([&] {
    require(s, "server");
    int p = s->gateway->bind();
    if (port) *port = p;
  });
}

cs_status cs_server_run(cs_server* s) {
  return guard([&] {
    require(s, "server");
    s->gateway->serve();
  });
}

void cs_server_stop(cs_server* s) {
  if (s) s->gateway->stop();
}

void cs_server_free(cs_server* s) { delete s; }

}  // extern "C"
