#include "rmpower/http.hpp"

#include <cstdlib>
#include <filesystem>

#include <httplib.h>

namespace rmpower::http {

namespace {

constexpr const char* kPlaceholderPage = R"(<!doctype html>
<html><head><meta charset="utf-8"><title>rmpower</title></head>
<body>
<h1>rmpower service</h1>
<p>The browser UI bundle is not installed. JSON endpoints:</p>
<ul>
<li>GET /api/health</li>
<li>POST /api/power, /api/nsize, /api/mde, /api/curve, /api/simulate (JSON body)</li>
<li>POST /api/anova (CSV body; query flags gg, hf, friedman, format=long)</li>
</ul>
</body></html>
)";

}  // namespace

int default_port() {
  if (const char* env = std::getenv("RMPOWER_PORT")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0 && v < 65536) return static_cast<int>(v);
  }
  return kDefaultPort;
}

struct Server::Impl {
  ServeOptions opts;
  httplib::Server server;
  int port = -1;

  void reply(httplib::Response& res, const api::ApiResponse& r) {
    res.status = r.status;
    res.set_content(report::canonical(r.body), "application/json");
  }

  void install_routes() {
    server.Get("/api/health", [this](const httplib::Request&, httplib::Response& res) {
      reply(res, api::dispatch("health", "", {}, opts.limits));
    });
    server.Post(R"(/api/(power|nsize|mde|curve|anova|simulate))",
                [this](const httplib::Request& req, httplib::Response& res) {
                  std::map<std::string, std::string> query;
                  for (const auto& [k, v] : req.params) query[k] = v;
                  reply(res, api::dispatch(req.matches[1].str(), req.body, query, opts.limits));
                });
    server.set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
      std::string what = "internal error";
      try {
        std::rethrow_exception(ep);
      } catch (const std::exception& e) {
        what = e.what();
      } catch (...) {
      }
      res.status = 500;
      res.set_content(report::canonical({{"schema_version", report::kSchemaVersion},
                                         {"type", "error"},
                                         {"error", {{"kind", "internal"}, {"message", what}}}}),
                      "application/json");
    });
    if (!opts.ui_dir.empty() && std::filesystem::is_directory(opts.ui_dir)) {
      server.set_mount_point("/", opts.ui_dir);
    } else {
      server.Get("/", [](const httplib::Request&, httplib::Response& res) {
        res.set_content(kPlaceholderPage, "text/html");
      });
    }
  }
};

Server::Server(ServeOptions opts) : impl_(std::make_unique<Impl>()) {
  impl_->opts = std::move(opts);
  impl_->install_routes();
}

Server::~Server() { stop(); }

int Server::bind() {
  if (impl_->opts.port == 0)
    impl_->port = impl_->server.bind_to_any_port(impl_->opts.bind);
  else
    impl_->port = impl_->server.bind_to_port(impl_->opts.bind, impl_->opts.port) ? impl_->opts.port : -1;
  if (impl_->port < 0)
    throw Error(ErrorKind::Io, "cannot bind " + impl_->opts.bind + ":" + std::to_string(impl_->opts.port));
  return impl_->port;
}

void Server::run() { impl_->server.listen_after_bind(); }

void Server::stop() {
  if (impl_ && impl_->server.is_running()) impl_->server.stop();
}

}  // namespace rmpower::http
