#pragma once

// Orchestration tier: receives envelopes, turns them into instruction sets,
// dispatches them to a run center, keeps the results and serves reports.
//
//   POST /tfps                  SOAP request -> SOAP result (200/202/400/413/502)
//   GET  /results/{task_id}     HTML report
//   GET  /results/{task_id}.xml result envelope

#include <chrono>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "tfp/background.hpp"
#include "tfp/model.hpp"
#include "tfp/protocol.hpp"
#include "tfp/runcenter.hpp"

namespace tfp::service {

inline constexpr std::size_t kMaxBodyBytes = 1 << 20;

/// One XML file per task under data_dir, named <task_id>.xml. Records only
/// move PENDING -> DONE or PENDING -> FAILED; terminal records never change.
class ResultStore {
 public:
  /// Creates data_dir if needed and indexes the records already there.
  explicit ResultStore(std::filesystem::path data_dir);

  /// A task id unused by any stored or previously reserved task.
  std::string reserve_task_id();

  /// Throws E_TERMINAL_RECORD for a forbidden transition and E_IO.
  void put(const TestResultRecord& record);
  /// Throws E_UNKNOWN_TASK.
  TestResultRecord fetch(const std::string& task_id) const;
  std::vector<std::string> task_ids() const;

  const std::filesystem::path& data_dir() const { return dir_; }

 private:
  std::filesystem::path dir_;
  mutable std::mutex mu_;
  std::map<std::string, TestResultRecord> records_;
  std::set<std::string> reserved_;
};

/// Copies the envelope, fills the default load profile, and for master runs
/// attaches adaptive parameters (the envelope's, or defaults).
protocol::InstructionSet parse_to_instructions(const protocol::TestEnvelope& env, const std::string& task_id,
                                               RunMode mode);

/// Self-contained HTML page for one record.
std::string render_report(const TestResultRecord& record);

struct Reply {
  int status = 200;
  std::string content_type;
  std::string body;
};

struct Options {
  std::filesystem::path data_dir;
  /// Prefix of detail URLs; when empty, derived from the request's Host.
  std::string public_base_url;
  std::chrono::seconds critical_timeout{120};
};

class Service {
 public:
  Service(Options options, std::shared_ptr<runcenter::Dispatcher> dispatcher);
  ~Service();
  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  /// base_url is the externally visible origin used when no public base is
  /// configured.
  Reply handle_submission(std::string_view body, const std::string& base_url);
  Reply handle_result_xml(const std::string& task_id) const;
  Reply handle_report(const std::string& task_id) const;

  /// Binds (port 0 picks one) and serves on a background thread; returns the
  /// port. Throws E_PORT_IN_USE.
  int start(const std::string& host, int port);
  void serve(const std::string& host, int port);
  void stop();

  /// Blocks until every asynchronous master run has finished.
  void wait_idle();

  ResultStore& store() { return store_; }

 private:
  struct Http;

  runcenter::DispatchResult dispatch_with_timeout(const protocol::InstructionSet& instructions,
                                                  std::chrono::seconds timeout);
  void finish_master(TestResultRecord record, const protocol::InstructionSet& instructions);

  Options options_;
  std::shared_ptr<runcenter::Dispatcher> dispatcher_;
  ResultStore store_;
  std::unique_ptr<Http> http_;
  Background background_;
};

}  // namespace tfp::service
