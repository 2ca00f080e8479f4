#pragma once

#include <memory>
#include <thread>

#include "driftwatch/server.hpp"

namespace driftwatch::testing {

/// A Server listening on an ephemeral loopback port for the lifetime of the
/// object.
class RunningServer {
 public:
  explicit RunningServer(const fs::path& store, std::optional<fs::path> config = std::nullopt, RetryPolicy policy = {})
      : server_(std::make_unique<Server>(store, std::move(config), std::move(policy))) {
    port_ = server_->bind("127.0.0.1", 0);
    thread_ = std::thread([this] { server_->listen(); });
    server_->wait_until_ready();
  }

  ~RunningServer() {
    server_->stop();
    thread_.join();
  }

  RunningServer(const RunningServer&) = delete;
  RunningServer& operator=(const RunningServer&) = delete;

  httplib::Client client() const {
    httplib::Client c("127.0.0.1", port_);
    c.set_read_timeout(std::chrono::seconds(30));
    return c;
  }

  int port() const { return port_; }
  Server& server() { return *server_; }

 private:
  std::unique_ptr<Server> server_;
  int port_ = 0;
  std::thread thread_;
};

}  // namespace driftwatch::testing
