#pragma once

#include <map>
#include <memory>
#include <string>

#include "cropsight/classifier.hpp"
#include "cropsight/error.hpp"
#include "cropsight/icon_query.hpp"
#include "cropsight/pipeline.hpp"

namespace cropsight::service {

inline constexpr const char* kVersion = "0.1.0";

// HTTP status for an error code (400, 404, 413, 422 or 500).
int http_status_for(ErrorCode code) noexcept;

// 64-bit FNV-1a of the serialized model, as 16 hex digits.
std::string model_fingerprint(const classifier::MlpModel& model);

// code -> {locale: message}, JSON object. Missing codes fall back to the
// exception text.
using MessageTable = std::map<std::string, icons::LocalizedText>;
MessageTable parse_messages(const std::string& json_text);

class Gateway {
 public:
  // Loads model, catalog and messages from the paths in `cfg`.
  explicit Gateway(pipeline::PipelineConfig cfg);
  Gateway(pipeline::PipelineConfig cfg, classifier::MlpModel model,
          std::shared_ptr<const icons::CatalogSnapshot> catalog, MessageTable messages = {});
  ~Gateway();
  Gateway(const Gateway&) = delete;
  Gateway& operator=(const Gateway&) = delete;

  // Binds to cfg.listen_host. Port 0 picks a free port. Returns the port.
  int bind();
  int bind(const std::string& host, int port);
  // Blocks until stop(). bind() must have succeeded.
  void serve();
  void stop();
  void wait_until_ready() const;
  int port() const noexcept;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace cropsight::service
