#pragma once

#include <httplib.h>

#include <atomic>
#include <chrono>
#include <filesystem>
#include <functional>
#include <random>
#include <string>
#include <thread>

#include "tfp/model.hpp"

namespace tfp::fixtures {

namespace fs = std::filesystem;

class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    std::random_device rd;
    path_ = fs::temp_directory_path() /
            ("tfp-test-" + std::to_string(rd()) + "-" + std::to_string(counter++));
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const fs::path& path() const { return path_; }
  fs::path operator/(const std::string& rel) const { return path_ / rel; }

 private:
  fs::path path_;
};

/// Local HTTP server with a pluggable handler. Tracks total requests and the
/// highest number of requests in flight at once.
class MockTarget {
 public:
  using Handler = std::function<void(const httplib::Request&, httplib::Response&)>;

  explicit MockTarget(Handler handler) : handler_(std::move(handler)) {
    auto wrap = [this](const httplib::Request& req, httplib::Response& res) {
      int now = ++in_flight_;
      int seen = max_in_flight_.load();
      while (now > seen && !max_in_flight_.compare_exchange_weak(seen, now)) {
      }
      ++requests_;
      handler_(req, res);
      --in_flight_;
    };
    server_.Get(".*", wrap);
    server_.Post(".*", wrap);
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }

  ~MockTarget() {
    server_.stop();
    thread_.join();
  }

  MockTarget(const MockTarget&) = delete;
  MockTarget& operator=(const MockTarget&) = delete;

  /// Sleeps `delay`, then answers `status` with `body`.
  static Handler fixed(std::chrono::milliseconds delay, int status = 200, std::string body = "ok") {
    return [=](const httplib::Request&, httplib::Response& res) {
      std::this_thread::sleep_for(delay);
      res.status = status;
      res.set_content(body, "text/plain");
    };
  }

  std::string url(const std::string& path = "/") const { return "http://127.0.0.1:" + std::to_string(port_) + path; }
  int port() const { return port_; }
  long requests() const { return requests_.load(); }
  int max_in_flight() const { return max_in_flight_.load(); }

 private:
  Handler handler_;
  httplib::Server server_;
  std::thread thread_;
  int port_ = 0;
  std::atomic<int> in_flight_{0};
  std::atomic<int> max_in_flight_{0};
  std::atomic<long> requests_{0};
};

/// Port 1 on loopback: nothing listens there, connections are refused.
inline std::string refused_url() { return "http://127.0.0.1:1/"; }

}  // namespace tfp::fixtures
