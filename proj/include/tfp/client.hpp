#pragma once

// Developer-side commands behind `tfpc`. Each returns a process exit code:
//
//   0 pass   1 performance criteria failed   2 validation error
//   3 missing test case   4 transport/protocol failure   5 filesystem/scaffold

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <filesystem>
#include <functional>
#include <mutex>
#include <optional>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include "tfp/protocol.hpp"

namespace tfp::client {

enum ExitCode : int {
  kExitPass = 0,
  kExitPerfFail = 1,
  kExitValidation = 2,
  kExitMissingTest = 3,
  kExitTransport = 4,
  kExitFilesystem = 5,
};

struct Console {
  std::ostream& out;
  std::ostream& err;
};

struct ClientConfig {
  std::string service_url;
  std::chrono::seconds timeout{120};
  std::optional<int> requests;
  std::optional<int> concurrency;
  std::chrono::milliseconds poll_interval{2000};
  std::chrono::seconds poll_timeout{600};
};

inline constexpr const char* kServiceUrlEnv = "TFPC_SERVICE_URL";

/// Flag, then environment, then the project's tfp.conf. Nothing when no
/// source names a URL.
std::optional<std::string> resolve_service_url(const std::optional<std::string>& flag,
                                               const std::filesystem::path& project_root);

int cmd_init(const std::filesystem::path& root, std::string_view user_name, Console io);
int cmd_create_test(const std::filesystem::path& root, const std::string& service_file, Console io);
int cmd_validate(const std::vector<std::filesystem::path>& paths, Console io);
int cmd_run_critical(const std::filesystem::path& root, const std::string& service_file, const ClientConfig& config,
                     Console io);
int cmd_run_master(const std::filesystem::path& root, const ClientConfig& config, Console io);

/// Re-runs `job` on demand with at most one run in flight. Requests that
/// arrive while a run is in progress collapse into a single follow-up run.
class CoalescingRunner {
 public:
  explicit CoalescingRunner(std::function<void()> job);
  ~CoalescingRunner();
  CoalescingRunner(const CoalescingRunner&) = delete;
  CoalescingRunner& operator=(const CoalescingRunner&) = delete;

  void notify();
  /// Blocks until no run is queued or in flight.
  void wait_idle();

 private:
  void loop();

  std::function<void()> job_;
  std::mutex mu_;
  std::condition_variable cv_;
  bool pending_ = false;
  bool running_ = false;
  bool stopping_ = false;
  std::thread worker_;
};

/// Validates every path, then re-validates a file whenever its contents
/// change, until `stop` becomes true. Returns the one-shot exit code of the
/// last pass over all files.
int cmd_watch(const std::vector<std::filesystem::path>& paths, Console io, const std::atomic<bool>& stop,
              std::chrono::milliseconds poll_interval = std::chrono::milliseconds(200));

/// The envelope a run would transmit: script contents plus the project
/// identity, with load overrides applied.
protocol::TestEnvelope build_envelope(const ApplicationIdentity& identity, const std::string& script_text,
                                      const ClientConfig& config, RunMode mode);

}  // namespace tfp::client
