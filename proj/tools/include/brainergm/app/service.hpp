#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>

namespace brainergm::app {

struct ServiceOptions {
  std::size_t workers = 1;                       // job worker threads
  std::optional<std::filesystem::path> data_dir;  // result documents are also written here
};

/// HTTP/JSON job service:
///   POST /v1/networks, GET /v1/networks
///   POST /v1/jobs, GET /v1/jobs/{id}, GET /v1/jobs/{id}/result, DELETE /v1/jobs/{id}
///   GET /v1/health
class Service {
 public:
  explicit Service(ServiceOptions options = {});
  ~Service();
  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  /// Binds `host:port` (port 0 picks a free one); returns the bound port or -1.
  int bind(const std::string& host, int port);
  /// Serves on the bound socket until stop().
  bool serve();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace brainergm::app
