#pragma once

#include <functional>
#include <memory>

#include "airway/api.hpp"

namespace airway {

/// HTTP front end over ApiService. Requests run on the server's worker
/// threads; reads go through store snapshots.
class HttpServer {
 public:
  explicit HttpServer(ApiService& service);
  ~HttpServer();

  /// Binds; port 0 picks a free one. Throws Error{config_error} on failure.
  int bind(const std::string& host, int port);
  /// Blocks until stop().
  void listen();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace airway
