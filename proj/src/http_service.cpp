#include "cropsight/http_service.hpp"

#include <cstdio>
#include <httplib.h>
#include <json.hpp>

namespace cropsight::service {

namespace {

using nlohmann::json;

// Multipart framing around the image part is allowed on top of the cap.
constexpr std::size_t kMultipartSlack = 64 * 1024;

std::shared_ptr<const icons::CatalogSnapshot> load_catalog(const pipeline::PipelineConfig& cfg) {
  auto taxonomy = icons::Taxonomy::load(cfg.taxonomy_path);
  auto kb = icons::KnowledgeBase::load(cfg.kb_path, cfg.default_locale);
  auto faq = icons::FaqStore::load(cfg.faq_path, cfg.default_locale);
  return std::make_shared<const icons::CatalogSnapshot>(
      icons::CatalogSnapshot{std::move(taxonomy), std::move(kb), std::move(faq)});
}

std::string request_locale(const httplib::Request& req, const std::string& fallback) {
  if (req.has_param("locale")) return req.get_param_value("locale");
  auto lang = req.get_header_value("Accept-Language");
  if (!lang.empty()) {
    auto end = lang.find_first_of(",;-");
    return lang.substr(0, end);
  }
  return fallback;
}

}  // namespace

int http_status_for(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::DecodeError:
    case ErrorCode::UnsupportedFormat:
    case ErrorCode::EmptyImage:
    case ErrorCode::InvalidParams:
    case ErrorCode::InvalidPath:
      return 400;
    case ErrorCode::NotFound:
    case ErrorCode::UnknownNode:
      return 404;
    case ErrorCode::PayloadTooLarge:
      return 413;
    case ErrorCode::Undiagnosable:
      return 422;
    default:
      return 500;
  }
}

std::string model_fingerprint(const classifier::MlpModel& model) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (auto b : classifier::save_model(model)) {
    h ^= b;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

MessageTable parse_messages(const std::string& json_text) {
  MessageTable out;
  try {
    auto doc = json::parse(json_text);
    if (!doc.is_object()) throw Error(ErrorCode::InvalidConfig, "messages file must be a JSON object");
    for (auto& [code, texts] : doc.items()) out[code] = texts.get<icons::LocalizedText>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidConfig, std::string("messages file: ") + e.what());
  }
  return out;
}

struct Gateway::Impl {
  pipeline::PipelineConfig cfg;
  std::shared_ptr<const classifier::MlpModel> model;
  std::string fingerprint;
  icons::Catalog catalog;
  MessageTable messages;
  httplib::Server server;
  int port = -1;

  Impl(pipeline::PipelineConfig c, classifier::MlpModel m, std::shared_ptr<const icons::CatalogSnapshot> snap,
       MessageTable msgs)
      : cfg(std::move(c)),
        model(std::make_shared<const classifier::MlpModel>(std::move(m))),
        fingerprint(model_fingerprint(*model)),
        catalog(std::move(snap)),
        messages(std::move(msgs)) {
    routes();
  }

  void send_error(httplib::Response& res, ErrorCode code, const std::string& detail, const std::string& locale) {
    std::string message = detail;
    std::string used = cfg.default_locale;
    if (auto it = messages.find(std::string(error_code_name(code))); it != messages.end()) {
      if (auto loc = icons::localize(it->second, locale, cfg.default_locale)) {
        message = loc->text;
        used = loc->locale;
      }
    }
    json body = {{"error", {{"code", error_code_name(code)}, {"message", message}, {"detail", detail}, {"locale", used}}}};
    res.status = http_status_for(code);
    res.set_content(body.dump(), "application/json");
  }

  template <class F>
  httplib::Server::Handler guarded(F f) {
    return [this, f](const httplib::Request& req, httplib::Response& res) {
      const auto locale = request_locale(req, cfg.default_locale);
      try {
        f(req, res, locale);
      } catch (const Error& e) {
        send_error(res, e.code(), e.what(), locale);
      } catch (const json::exception& e) {
        send_error(res, ErrorCode::InvalidParams, e.what(), locale);
      } catch (const std::exception& e) {
        send_error(res, ErrorCode::Internal, e.what(), locale);
      }
    };
  }

  json node_json(const icons::IconNode& n, const std::string& locale) const {
    json j = {{"id", n.id},
              {"icon_url", "/assets/" + n.icon_asset},
              {"labels", n.labels},
              {"is_leaf", n.children.empty()}};
    if (auto l = icons::localize(n.labels, locale, cfg.default_locale)) j["label"] = l->text;
    if (n.entry_id) j["entry_id"] = *n.entry_id;
    return j;
  }

  void children(const std::string& id, httplib::Response& res, const std::string& locale) {
    auto snap = catalog.snapshot();
    json nodes = json::array();
    for (const auto& n : snap->taxonomy.children(id)) nodes.push_back(node_json(n, locale));
    res.set_content(json{{"parent", id}, {"nodes", nodes}}.dump(), "application/json");
  }

  std::string upload_bytes(const httplib::Request& req) const {
    if (req.is_multipart_form_data()) {
      if (req.has_file("image")) return req.get_file_value("image").content;
      if (!req.files.empty()) return req.files.begin()->second.content;
      throw Error(ErrorCode::DecodeError, "multipart body has no image part");
    }
    return req.body;
  }

  void routes() {
    server.set_payload_max_length(cfg.max_upload_bytes + kMultipartSlack);

    server.Get("/api/health", guarded([this](const httplib::Request&, httplib::Response& res, const std::string&) {
      auto sizes = model->layer_sizes();
      json body = {{"status", "ok"},
                   {"version", kVersion},
                   {"build", {{"compiler", __VERSION__}, {"cplusplus", __cplusplus}}},
                   {"model", {{"format_version", classifier::kModelFormatVersion},
                              {"fingerprint", fingerprint},
                              {"layers", sizes}}},
                   {"taxonomy_nodes", catalog.snapshot()->taxonomy.node_count()}};
      res.set_content(body.dump(), "application/json");
    }));

    server.Get("/api/icons/root",
               guarded([this](const httplib::Request&, httplib::Response& res, const std::string& locale) {
                 children(icons::kRootId, res, locale);
               }));

    server.Get(R"(/api/icons/([^/]+)/children)",
               guarded([this](const httplib::Request& req, httplib::Response& res, const std::string& locale) {
                 children(req.matches[1].str(), res, locale);
               }));

    server.Post("/api/query", guarded([this](const httplib::Request& req, httplib::Response& res,
                                             const std::string& header_locale) {
      auto body = json::parse(req.body);
      if (!body.is_object() || !body.contains("path") || !body["path"].is_array()) {
        throw Error(ErrorCode::InvalidPath, "body must be {\"path\": [ids], \"locale\": code}");
      }
      icons::QueryPath path;
      for (const auto& id : body["path"]) {
        if (!id.is_string()) throw Error(ErrorCode::InvalidPath, "path elements must be strings");
        path.node_ids.push_back(id.get<std::string>());
      }
      std::string locale = body.value("locale", header_locale);
      auto snap = catalog.snapshot();
      auto query = icons::build_query(snap->taxonomy, path);
      auto hit = snap->knowledge.retrieve(query, locale);
      json out = {{"entry_id", hit.entry_id},
                  {"topic_keys", query.topic_keys},
                  {"content", hit.content},
                  {"locale", hit.locale},
                  {"fallback", hit.fallback},
                  {"updated_at", hit.updated_at}};
      res.set_content(out.dump(), "application/json");
    }));

    server.Get("/api/faq", guarded([this](const httplib::Request&, httplib::Response& res, const std::string& locale) {
      json items = json::array();
      for (const auto& f : catalog.snapshot()->faq.list(locale)) {
        items.push_back({{"id", f.id},
                         {"question", f.question},
                         {"answer", f.answer},
                         {"locale", f.locale},
                         {"fallback", f.fallback}});
      }
      res.set_content(json{{"locale", locale}, {"items", items}}.dump(), "application/json");
    }));

    server.Post("/api/diagnose", guarded([this](const httplib::Request& req, httplib::Response& res,
                                                const std::string&) {
      auto bytes = upload_bytes(req);
      if (bytes.size() > cfg.max_upload_bytes) {
        throw Error(ErrorCode::PayloadTooLarge, "image exceeds " + std::to_string(cfg.max_upload_bytes) + " bytes");
      }
      std::string image_id = req.is_multipart_form_data() && req.has_file("image")
                                 ? req.get_file_value("image").filename
                                 : std::string("upload");
      auto m = model;  // keep the snapshot alive for the whole request
      auto result = pipeline::run_pipeline(
          std::span(reinterpret_cast<const std::uint8_t*>(bytes.data()), bytes.size()), cfg, *m, image_id);
      res.set_content(pipeline::diagnosis_json(result), "application/json");
    }));

    // Rejections produced by the HTTP layer itself (oversized bodies,
    // unknown routes) get the same JSON error shape.
    server.set_error_handler([this](const httplib::Request& req, httplib::Response& res) {
      if (!res.body.empty()) return httplib::Server::HandlerResponse::Unhandled;
      const auto locale = request_locale(req, cfg.default_locale);
      int status = res.status;
      if (status == 413) send_error(res, ErrorCode::PayloadTooLarge, "request body too large", locale);
      else if (status == 404) send_error(res, ErrorCode::NotFound, "no such resource: " + req.path, locale);
      else send_error(res, status < 500 ? ErrorCode::InvalidParams : ErrorCode::Internal, "request failed", locale);
      res.status = status;
      return httplib::Server::HandlerResponse::Handled;
    });

    if (!cfg.assets_dir.empty()) server.set_mount_point("/assets", cfg.assets_dir);
    if (!cfg.static_dir.empty()) server.set_mount_point("/", cfg.static_dir);
  }
};

Gateway::Gateway(pipeline::PipelineConfig cfg) {
  pipeline::validate_config(cfg, true, true);
  auto model = pipeline::load_model_file(cfg.model_path);
  auto catalog = load_catalog(cfg);
  MessageTable messages;
  if (!cfg.messages_path.empty()) messages = parse_messages(icons::read_text_file(cfg.messages_path));
  impl_ = std::make_unique<Impl>(std::move(cfg), std::move(model), std::move(catalog), std::move(messages));
}

Gateway::Gateway(pipeline::PipelineConfig cfg, classifier::MlpModel model,
                 std::shared_ptr<const icons::CatalogSnapshot> catalog, MessageTable messages)
    : impl_(std::make_unique<Impl>(std::move(cfg), std::move(model), std::move(catalog), std::move(messages))) {}

Gateway::~Gateway() {
  if (impl_) impl_->server.stop();
}

int Gateway::bind() { return bind(impl_->cfg.listen_host, impl_->cfg.listen_port); }

int Gateway::bind(const std::string& host, int port) {
  int bound = port == 0 ? impl_->server.bind_to_any_port(host) : (impl_->server.bind_to_port(host, port) ? port : -1);
  if (bound < 0) throw Error(ErrorCode::IoError, "cannot listen on " + host + ":" + std::to_string(port));
  impl_->port = bound;
  return bound;
}

void Gateway::serve() {
  if (impl_->port < 0) throw Error(ErrorCode::InvalidConfig, "serve() called before bind()");
  impl_->server.listen_after_bind();
}

void Gateway::stop() { impl_->server.stop(); }

void Gateway::wait_until_ready() const { impl_->server.wait_until_ready(); }

int Gateway::port() const noexcept { return impl_->port; }

}  // namespace cropsight::service
