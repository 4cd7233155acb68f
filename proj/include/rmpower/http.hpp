#pragma once

#include <memory>
#include <string>

#include "rmpower/api.hpp"

namespace rmpower::http {

inline constexpr int kDefaultPort = 8707;

/// RMPOWER_PORT when set to a valid port, otherwise 8707.
int default_port();

struct ServeOptions {
  std::string bind = "127.0.0.1";  // loopback unless the caller opts in
  int port = kDefaultPort;         // 0 picks a free port
  std::string ui_dir;              // static bundle served at "/"; empty = built-in placeholder page
  api::ServiceLimits limits;
};

// JSON API:
//   GET  /api/health
//   POST /api/power | /api/nsize | /api/mde | /api/curve | /api/simulate   (JSON body)
//   POST /api/anova?gg=1&hf=1&friedman=1&format=long                      (CSV body)
class Server {
 public:
  explicit Server(ServeOptions opts);
  ~Server();
  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  /// Binds the socket and returns the bound port.
  int bind();
  /// Serves until stop(); call bind() first.
  void run();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace rmpower::http
