// tfpc: developer client. Project root is the current directory unless
// --root is given.

#include <CLI11.hpp>

#include <atomic>
#include <csignal>
#include <filesystem>
#include <iostream>

#include "tfp/client.hpp"
#include "tfp/error.hpp"
#include "tfp/experiment.hpp"

namespace fs = std::filesystem;
using namespace tfp;
using namespace tfp::client;

namespace {

std::atomic<bool> g_stop{false};

extern "C" void on_sigint(int) { g_stop = true; }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Test-first performance client"};
  app.require_subcommand(1);

  std::string root = ".";
  std::optional<std::string> service_url;
  int timeout_s = 120;
  std::optional<int> requests, concurrency;
  app.add_option("--root", root, "Project root")->capture_default_str();
  app.add_option("--service-url", service_url, "Service base URL (else $TFPC_SERVICE_URL, else TFP/tfp.conf)");
  app.add_option("--timeout", timeout_s, "Request timeout in seconds")->check(CLI::PositiveNumber)->capture_default_str();
  app.add_option("--requests", requests, "Override requests of the load profile");
  app.add_option("--concurrency", concurrency, "Override concurrency of the load profile");

  auto* init = app.add_subcommand("init", "Scaffold the TFP project template");
  std::string user;
  init->add_option("--user", user, "User name recorded in app.id")->required();

  auto* create = app.add_subcommand("create-test", "Create the critical test script for a service file");
  std::string service_file;
  create->add_option("service_file", service_file)->required();

  auto* validate = app.add_subcommand("validate", "Validate test scripts");
  std::vector<std::string> paths;
  bool watch = false;
  validate->add_option("paths", paths)->required();
  validate->add_flag("--watch", watch, "Re-validate on every change until interrupted");

  auto* critical = app.add_subcommand("run-critical", "Run the critical test of a service file");
  std::string critical_file;
  critical->add_option("service_file", critical_file)->required();

  auto* master = app.add_subcommand("run-master", "Run the master test suite adaptively");
  int poll_ms = 2000;
  master->add_option("--poll-ms", poll_ms, "Result polling interval")->check(CLI::PositiveNumber)->capture_default_str();

  auto* exp = app.add_subcommand("experiment", "Compare server-side and client-side validation timing");
  experiment::ExperimentConfig cfg;
  std::string counts = "1,6,11,16,21,26,31,36,41,46";
  std::string out_dir = "experiment-out";
  exp->add_option("--validation-ms", cfg.validation_delay_ms)->capture_default_str();
  exp->add_option("--rest-ms", cfg.rest_delay_ms)->capture_default_str();
  exp->add_option("--counts", counts)->capture_default_str();
  exp->add_option("--repetitions", cfg.repetitions)->capture_default_str();
  exp->add_option("--out", out_dir)->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  Console io{std::cout, std::cerr};
  const fs::path project(root);

  if (*init) return cmd_init(project, user, io);
  if (*create) return cmd_create_test(project, service_file, io);
  if (*validate) {
    std::vector<fs::path> files(paths.begin(), paths.end());
    if (!watch) return cmd_validate(files, io);
    std::signal(SIGINT, on_sigint);
    std::signal(SIGTERM, on_sigint);
    return cmd_watch(files, io, g_stop);
  }
  if (*exp) {
    try {
      cfg.request_counts = experiment::parse_counts(counts);
      auto rows = experiment::run_modes_experiment(cfg);
      for (const auto& r : rows)
        std::cout << r.n_requests << ' ' << experiment::to_string(r.mode) << ' ' << r.total_time_ms << "\n";
      for (const auto& p : experiment::emit_plot_files(rows, out_dir)) std::cout << p.string() << "\n";
      return kExitPass;
    } catch (const Error& e) {
      std::cerr << e.what() << "\n";
      return e.code() == ErrorCode::Field ? kExitValidation : kExitFilesystem;
    }
  }

  ClientConfig config;
  auto url = resolve_service_url(service_url, project);
  if (!url) {
    std::cerr << "E_TRANSPORT: no service URL (use --service-url, $" << kServiceUrlEnv << " or TFP/tfp.conf)\n";
    return kExitTransport;
  }
  config.service_url = *url;
  config.timeout = std::chrono::seconds(timeout_s);
  config.requests = requests;
  config.concurrency = concurrency;
  if (*critical) return cmd_run_critical(project, critical_file, config, io);
  config.poll_interval = std::chrono::milliseconds(poll_ms);
  return cmd_run_master(project, config, io);
}
