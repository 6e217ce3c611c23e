#pragma once

// Internal glue around cpp-httplib shared by every server and client here.

#include <httplib.h>

#include <string>
#include <thread>

#include "tfp/error.hpp"
#include "tfp/model.hpp"

namespace tfp::detail {

/// Binds `server` (port 0 picks a free one) and returns the bound port.
inline int bind_or_throw(httplib::Server& server, const std::string& host, int port) {
  // httplib's default adds SO_REUSEPORT, which lets a second server share a
  // taken port silently.
  server.set_socket_options([](socket_t sock) {
    int yes = 1;
    setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, reinterpret_cast<const void*>(&yes), sizeof(yes));
  });
  if (port == 0) {
    int bound = server.bind_to_any_port(host);
    if (bound < 0) throw Error(ErrorCode::PortInUse, "cannot bind " + host);
    return bound;
  }
  if (!server.bind_to_port(host, port))
    throw Error(ErrorCode::PortInUse, "cannot bind " + host + ":" + std::to_string(port));
  return port;
}

/// Runs a bound server on its own thread until stop().
class ServerThread {
 public:
  explicit ServerThread(httplib::Server& server) : server_(server) {}
  ~ServerThread() { stop(); }

  void run() {
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }

  void stop() {
    if (server_.is_running()) server_.stop();
    if (thread_.joinable()) thread_.join();
  }

 private:
  httplib::Server& server_;
  std::thread thread_;
};

/// Client for the origin of `url` with one timeout applied to every phase.
inline httplib::Client make_client(const ParsedUrl& url, std::chrono::milliseconds timeout) {
  httplib::Client client(url.origin());
  client.set_connection_timeout(timeout);
  client.set_read_timeout(timeout);
  client.set_write_timeout(timeout);
  return client;
}

/// base + path with exactly one slash between them.
inline std::string join_url(std::string base, std::string_view path) {
  while (!base.empty() && base.back() == '/') base.pop_back();
  if (path.empty() || path.front() != '/') base += '/';
  return base + std::string(path);
}

}  // namespace tfp::detail
