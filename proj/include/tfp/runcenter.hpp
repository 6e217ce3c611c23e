#pragma once

// Execution tier: HTTP load generation, the adaptive master-suite loop, and
// the dispatch endpoints the service talks to.

#include <chrono>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "tfp/model.hpp"
#include "tfp/protocol.hpp"

namespace tfp::runcenter {

inline constexpr std::chrono::seconds kRequestTimeout{30};
inline constexpr std::chrono::seconds kDispatchTimeout{120};

/// Runs one load profile against one test case.
using Executor = std::function<Measurement(const TestCase&, const LoadProfile&)>;

/// Issues exactly profile.requests requests with at most profile.concurrency
/// in flight. Non-2xx replies record a latency and count as errors; requests
/// without any reply count as transport errors. Throws E_TARGET_UNRESOLVABLE
/// only when every request failed to connect.
Measurement execute(const TestCase& test_case, const LoadProfile& profile,
                    std::chrono::milliseconds request_timeout = kRequestTimeout);

Executor http_executor(std::chrono::milliseconds request_timeout = kRequestTimeout);

/// Grows concurrency geometrically while the criteria hold, then bisects
/// between the last passing and first failing level. Every iteration runs
/// max(requests_per_iteration, concurrency) requests.
AdaptiveOutcome adaptive_master(const protocol::InstructionSet& instructions, const Executor& run);

/// Concurrency levels the loop visits given the recorded traces, recomputed
/// from decisions and re-evaluated summaries alone.
std::vector<int> replay_levels(const std::vector<TraceRecord>& traces, const PerformanceCriteria& criteria,
                               const AdaptiveParams& params);

/// Result of dispatching one instruction set.
struct DispatchResult {
  std::optional<Measurement> measurement;  // critical
  std::optional<AdaptiveOutcome> outcome;  // master
};

/// How the service reaches a run center.
class Dispatcher {
 public:
  virtual ~Dispatcher() = default;
  virtual DispatchResult dispatch(const protocol::InstructionSet& instructions) = 0;
};

/// Runs in-process.
class EmbeddedDispatcher : public Dispatcher {
 public:
  explicit EmbeddedDispatcher(Executor run = http_executor());
  DispatchResult dispatch(const protocol::InstructionSet& instructions) override;

 private:
  Executor run_;
  std::mutex mu_;  // one instruction set at a time
};

/// POSTs the instruction document to <base_url>/execute.
class HttpDispatcher : public Dispatcher {
 public:
  HttpDispatcher(std::string base_url, std::chrono::seconds timeout = kDispatchTimeout);
  DispatchResult dispatch(const protocol::InstructionSet& instructions) override;

 private:
  std::string base_url_;
  std::chrono::seconds timeout_;
};

/// `POST /execute` and `GET /status` over HTTP.
class Server {
 public:
  explicit Server(Executor run = http_executor(), std::chrono::seconds dispatch_timeout = kDispatchTimeout);
  ~Server();
  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  /// Binds (port 0 picks a free port) and serves on a background thread.
  /// Returns the bound port. Throws E_PORT_IN_USE.
  int start(const std::string& host, int port);
  /// Binds and serves on the calling thread until stop().
  void serve(const std::string& host, int port);
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace tfp::runcenter
