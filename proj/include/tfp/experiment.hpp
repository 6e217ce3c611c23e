#pragma once

// Response time of a submission path that validates scripts on the server
// versus one that validates them in the client before sending.

#include <atomic>
#include <chrono>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace tfp::experiment {

enum class Mode { CloudValidation, PluginValidation };
std::string_view to_string(Mode m);

struct ExperimentConfig {
  std::vector<int> request_counts = {1, 6, 11, 16, 21, 26, 31, 36, 41, 46};
  double validation_delay_ms = 50;
  double rest_delay_ms = 10;
  int repetitions = 5;
  /// 0 picks a free port.
  int cloud_port = 0;
  int plugin_port = 0;
};

/// Nothing when valid, otherwise why not.
std::optional<std::string> check_config(const ExperimentConfig& cfg);

struct ExperimentRow {
  int n_requests = 0;
  Mode mode = Mode::CloudValidation;
  double total_time_ms = 0;

  bool operator==(const ExperimentRow&) const = default;
};

/// The two local service variants plus the client side of each mode.
/// CLOUD: the service validates (and sleeps validation + rest).
/// PLUGIN: the client validates, the service sleeps rest only.
class ModeServices {
 public:
  /// Throws E_PORT_IN_USE.
  explicit ModeServices(const ExperimentConfig& cfg);
  ~ModeServices();
  ModeServices(const ModeServices&) = delete;
  ModeServices& operator=(const ModeServices&) = delete;

  /// Sends one script the way `mode` does. False when it was rejected,
  /// either locally (PLUGIN) or by the service (CLOUD). Throws E_IO when the
  /// service cannot be reached.
  bool submit(Mode mode, const std::string& script_text);

  /// Submissions that reached each service.
  long submissions(Mode mode) const;

  int port(Mode mode) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// A script every validator pass accepts; the body of each submission.
std::string sample_script();

/// For each count and mode: median over repetitions of the time taken by
/// n sequential submissions. Rows come out grouped by count, CLOUD first.
/// Throws E_FIELD for a bad config, E_PORT_IN_USE, E_IO.
std::vector<ExperimentRow> run_modes_experiment(const ExperimentConfig& cfg);

/// cloud.dat, plugin.dat ("<n> <ms>" lines sorted by n) and modes.gp.
/// Throws E_FIELD for no rows, E_IO.
std::vector<std::filesystem::path> emit_plot_files(const std::vector<ExperimentRow>& rows,
                                                   const std::filesystem::path& out_dir);

/// "5,10,15" -> {5, 10, 15}. Throws E_FIELD.
std::vector<int> parse_counts(std::string_view text);

}  // namespace tfp::experiment
