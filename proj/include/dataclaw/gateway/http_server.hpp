#pragma once

#include <atomic>
#include <chrono>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "dataclaw/gateway/service.hpp"

namespace httplib {
class Server;
}

namespace dataclaw::gateway {

struct ServerOptions {
  // Quiet period after which an SSE stream gets a `: ping` comment.
  std::chrono::milliseconds heartbeat{15000};
  std::size_t threads = 64;
};

/// REST + SSE front end over an AgentService. Routes live under /api; see
/// docs/api.md.
class HttpServer {
 public:
  explicit HttpServer(AgentService& service, ServerOptions options = {});
  ~HttpServer();

  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  // Port 0 picks a free port. False when the address cannot be bound.
  bool bind(const std::string& host, int port);
  int port() const { return port_; }

  // Serves on a background thread / on the calling thread until stop().
  void start();
  void listen();
  void stop();

 private:
  void install_routes();

  AgentService& service_;
  ServerOptions options_;
  std::unique_ptr<httplib::Server> server_;
  std::thread thread_;
  int port_ = -1;
  std::atomic<bool> stopping_{false};
  std::mutex streams_mu_;
  std::vector<std::weak_ptr<Subscription>> streams_;
};

}  // namespace dataclaw::gateway
