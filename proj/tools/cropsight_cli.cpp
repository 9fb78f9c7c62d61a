// Command-line front end. Links only the C API.
#include <CLI11.hpp>

#include <csignal>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "cropsight/cropsight.h"

namespace {

constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;

cs_server* g_server = nullptr;

void on_signal(int) {
  if (g_server) cs_server_stop(g_server);
}

int fail(cs_status st, const std::string& context) {
  std::fprintf(stderr, "error: %s: %s (%s)\n", context.c_str(), cs_last_error(), cs_status_name(st));
  return kExitFailure;
}

int usage(const std::string& message) {
  std::fprintf(stderr, "error: %s\n", message.c_str());
  return kExitUsage;
}

bool exists(const std::string& path) { return std::filesystem::exists(path); }

// Config from --config (if given) plus the built-in defaults.
cs_status make_config(const std::string& path, cs_config** out) {
  return path.empty() ? cs_config_new(out) : cs_config_load(path.c_str(), out);
}

struct ConfigHandle {
  cs_config* p = nullptr;
  ~ConfigHandle() { cs_config_free(p); }
};
struct ModelHandle {
  cs_model* p = nullptr;
  ~ModelHandle() { cs_model_free(p); }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Rice leaf disease detection and iconic knowledge retrieval"};
  app.require_subcommand(1);
  app.set_version_flag("--version", cs_version());

  int train_n = 25, test_n = 20;
  std::uint64_t seed = 42;
  std::string out_dir;
  auto* gen = app.add_subcommand("gen-corpus", "Generate a synthetic labelled leaf corpus");
  gen->add_option("--train", train_n, "Training images per class")->check(CLI::PositiveNumber);
  gen->add_option("--test", test_n, "Test images per class")->check(CLI::PositiveNumber);
  gen->add_option("--seed", seed, "Generator seed");
  gen->add_option("--out", out_dir, "Output directory")->required();

  std::string corpus, model_out, config_path;
  cs_train_options opts;
  cs_train_options_default(&opts);
  auto* train = app.add_subcommand("train", "Train the spot classifier on a corpus");
  train->add_option("--corpus", corpus, "Corpus directory")->required();
  train->add_option("--out", model_out, "Model file to write")->required();
  train->add_option("--epochs", opts.epochs)->check(CLI::PositiveNumber);
  train->add_option("--lr", opts.learning_rate)->check(CLI::PositiveNumber);
  train->add_option("--batch", opts.batch_size)->check(CLI::PositiveNumber);
  train->add_option("--h1", opts.hidden1)->check(CLI::PositiveNumber);
  train->add_option("--h2", opts.hidden2)->check(CLI::PositiveNumber);
  train->add_option("--l2", opts.l2)->check(CLI::NonNegativeNumber);
  train->add_option("--seed", opts.seed);
  train->add_option("--config", config_path, "Pipeline config file");

  std::string model_path;
  std::vector<std::string> images;
  bool as_json = false;
  auto* classify = app.add_subcommand("classify", "Diagnose one or more leaf images");
  classify->add_option("--model", model_path, "Model file")->required();
  classify->add_option("--config", config_path, "Pipeline config file");
  classify->add_flag("--json", as_json, "Print the full diagnosis as JSON");
  classify->add_option("images", images, "Image files (PNG or PPM)")->required();

  std::string csv_path;
  auto* evaluate = app.add_subcommand("evaluate", "Report accuracy on a corpus test split");
  evaluate->add_option("--model", model_path, "Model file")->required();
  evaluate->add_option("--corpus", corpus, "Corpus directory")->required();
  evaluate->add_option("--config", config_path, "Pipeline config file");
  evaluate->add_option("--csv", csv_path, "Also write the report as CSV");

  auto* serve = app.add_subcommand("serve", "Run the HTTP gateway");
  serve->add_option("--config", config_path, "Gateway config file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : kExitUsage;
  }

  if (!config_path.empty() && !exists(config_path)) return usage("no such config file: " + config_path);
  ConfigHandle cfg;
  if (auto st = make_config(config_path, &cfg.p)) return fail(st, "config " + config_path);

  if (*gen) {
    std::size_t written = 0;
    if (auto st = cs_corpus_generate(train_n, test_n, seed, out_dir.c_str(), &written)) {
      return fail(st, "gen-corpus");
    }
    std::printf("wrote %zu images (+ truth masks, manifest.csv) to %s\n", written, out_dir.c_str());
    return 0;
  }

  if (*train) {
    if (!exists(corpus)) return usage("no such corpus directory: " + corpus);
    ModelHandle model;
    if (auto st = cs_model_train(corpus.c_str(), cfg.p, &opts, &model.p)) return fail(st, "train " + corpus);
    if (auto st = cs_model_save(model.p, model_out.c_str())) return fail(st, "save " + model_out);
    std::printf("model written to %s\n", model_out.c_str());
    return 0;
  }

  if (*classify) {
    if (!exists(model_path)) return usage("no such model file: " + model_path);
    for (const auto& img : images) {
      if (!exists(img)) return usage("no such image file: " + img);
    }
    ModelHandle model;
    if (auto st = cs_model_load(model_path.c_str(), &model.p)) return fail(st, "model " + model_path);
    int rc = 0;
    for (const auto& img : images) {
      cs_diagnosis* d = nullptr;
      if (auto st = cs_diagnose_file(model.p, cfg.p, img.c_str(), &d)) {
        rc = fail(st, img);
        continue;
      }
      if (as_json) {
        std::printf("%s\n", cs_diagnosis_json(d));
      } else {
        std::printf("%s\t%s\tconfidence=%.3f\tspots=%zu\n", img.c_str(), cs_diagnosis_class_name(d),
                    cs_diagnosis_confidence(d), cs_diagnosis_spot_count(d));
      }
      cs_diagnosis_free(d);
    }
    return rc;
  }

  if (*evaluate) {
    if (!exists(model_path)) return usage("no such model file: " + model_path);
    if (!exists(corpus)) return usage("no such corpus directory: " + corpus);
    ModelHandle model;
    if (auto st = cs_model_load(model_path.c_str(), &model.p)) return fail(st, "model " + model_path);
    cs_report* report = nullptr;
    if (auto st = cs_evaluate(model.p, corpus.c_str(), cfg.p, &report)) return fail(st, "evaluate " + corpus);
    if (!csv_path.empty()) {
      std::ofstream(csv_path) << cs_report_csv(report);
    }
    std::fputs(cs_report_text(report), stdout);
    cs_report_free(report);
    return 0;
  }

  if (*serve) {
    cs_server* server = nullptr;
    if (auto st = cs_server_create(cfg.p, &server)) return fail(st, "serve");
    int port = 0;
    if (auto st = cs_server_bind(server, &port)) {
      cs_server_free(server);
      return fail(st, "bind");
    }
    g_server = server;
    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);
    std::printf("listening on port %d\n", port);
    std::fflush(stdout);
    auto st = cs_server_run(server);
    g_server = nullptr;
    cs_server_free(server);
    return st ? fail(st, "serve") : 0;
  }
  return kExitUsage;
}
