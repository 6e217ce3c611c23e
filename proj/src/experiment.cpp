#include "tfp/experiment.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <optional>
#include <thread>

#include "http_util.hpp"
#include "tfp/conventions.hpp"
#include "tfp/error.hpp"
#include "tfp/text.hpp"
#include "tfp/validator.hpp"

namespace tfp::experiment {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

std::string_view to_string(Mode m) { return m == Mode::CloudValidation ? "CLOUD_VALIDATION" : "PLUGIN_VALIDATION"; }

std::optional<std::string> check_config(const ExperimentConfig& cfg) {
  if (cfg.request_counts.empty()) return "request_counts is empty";
  for (std::size_t i = 0; i < cfg.request_counts.size(); ++i) {
    if (cfg.request_counts[i] < 1) return "request counts must be positive";
    if (i > 0 && cfg.request_counts[i] <= cfg.request_counts[i - 1]) return "request counts must be strictly increasing";
  }
  if (!(cfg.validation_delay_ms >= 0) || !(cfg.rest_delay_ms >= 0)) return "delays must be >= 0";
  if (cfg.repetitions < 1) return "repetitions must be positive";
  return std::nullopt;
}

namespace {

void sleep_ms(double ms) {
  if (ms > 0) std::this_thread::sleep_for(std::chrono::duration<double, std::milli>(ms));
}

}  // namespace

struct ModeServices::Impl {
  struct Variant {
    httplib::Server http;
    detail::ServerThread thread{http};
    std::atomic<long> count{0};
    int port = 0;
    std::optional<httplib::Client> client;
  };

  double validation_ms;
  double rest_ms;
  Variant cloud;
  Variant plugin;

  Impl(const ExperimentConfig& cfg) : validation_ms(cfg.validation_delay_ms), rest_ms(cfg.rest_delay_ms) {
    cloud.http.Post("/tfps", [this](const httplib::Request& req, httplib::Response& res) {
      ++cloud.count;
      bool ok = !has_errors(validate_script(req.body));
      sleep_ms(validation_ms + rest_ms);
      res.status = ok ? 200 : 400;
      res.set_content(ok ? "ACCEPTED" : "INVALID", "text/plain");
    });
    plugin.http.Post("/tfps", [this](const httplib::Request&, httplib::Response& res) {
      ++plugin.count;
      sleep_ms(rest_ms);
      res.set_content("ACCEPTED", "text/plain");
    });
    cloud.port = detail::bind_or_throw(cloud.http, "127.0.0.1", cfg.cloud_port);
    plugin.port = detail::bind_or_throw(plugin.http, "127.0.0.1", cfg.plugin_port);
    for (Variant* v : {&cloud, &plugin}) {
      v->thread.run();
      v->client.emplace("127.0.0.1", v->port);
      v->client->set_keep_alive(true);
      v->client->set_read_timeout(std::chrono::seconds(60));
    }
  }

  Variant& of(Mode m) { return m == Mode::CloudValidation ? cloud : plugin; }
};

ModeServices::ModeServices(const ExperimentConfig& cfg) : impl_(std::make_unique<Impl>(cfg)) {}
ModeServices::~ModeServices() = default;

bool ModeServices::submit(Mode mode, const std::string& script_text) {
  if (mode == Mode::PluginValidation && has_errors(validate_script(script_text))) return false;
  auto& v = impl_->of(mode);
  auto res = v.client->Post("/tfps", script_text, "text/xml; charset=utf-8");
  if (!res) throw Error(ErrorCode::Io, "experiment service unreachable: " + httplib::to_string(res.error()));
  return res->status == 200;
}

long ModeServices::submissions(Mode mode) const { return impl_->of(mode).count.load(); }

int ModeServices::port(Mode mode) const { return impl_->of(mode).port; }

std::string sample_script() {
  return render_script({TestCase{"http://localhost:8080/BookSearch", HttpMethod::Get, std::nullopt},
                        PerformanceCriteria{3, 30, 1048576}, LoadProfile{100, 10}, std::nullopt});
}

std::vector<ExperimentRow> run_modes_experiment(const ExperimentConfig& cfg) {
  if (auto why = check_config(cfg)) throw Error(ErrorCode::Field, *why);
  ModeServices services(cfg);
  const std::string script = sample_script();

  std::vector<ExperimentRow> rows;
  for (int n : cfg.request_counts) {
    for (Mode mode : {Mode::CloudValidation, Mode::PluginValidation}) {
      std::vector<double> times;
      for (int rep = 0; rep < cfg.repetitions; ++rep) {
        auto t0 = Clock::now();
        for (int i = 0; i < n; ++i) {
          if (!services.submit(mode, script)) throw Error(ErrorCode::Io, "sample script was rejected");
        }
        times.push_back(std::chrono::duration<double, std::milli>(Clock::now() - t0).count());
      }
      std::sort(times.begin(), times.end());
      std::size_t k = times.size();
      double median = k % 2 ? times[k / 2] : (times[k / 2 - 1] + times[k / 2]) / 2;
      rows.push_back({n, mode, median});
    }
  }
  return rows;
}

std::vector<fs::path> emit_plot_files(const std::vector<ExperimentRow>& rows, const fs::path& out_dir) {
  if (rows.empty()) throw Error(ErrorCode::Field, "no rows to plot");
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (!fs::is_directory(out_dir, ec)) throw Error(ErrorCode::Io, "cannot create " + out_dir.string());

  auto data = [&](Mode mode) {
    std::vector<ExperimentRow> sel;
    std::copy_if(rows.begin(), rows.end(), std::back_inserter(sel), [&](const auto& r) { return r.mode == mode; });
    std::stable_sort(sel.begin(), sel.end(), [](const auto& a, const auto& b) { return a.n_requests < b.n_requests; });
    std::string out;
    char buf[64];
    for (const auto& r : sel) {
      std::snprintf(buf, sizeof buf, "%d %.3f\n", r.n_requests, r.total_time_ms);
      out += buf;
    }
    return out;
  };

  const fs::path cloud = out_dir / "cloud.dat";
  const fs::path plugin = out_dir / "plugin.dat";
  const fs::path script = out_dir / "modes.gp";
  write_file_atomic(cloud, data(Mode::CloudValidation));
  write_file_atomic(plugin, data(Mode::PluginValidation));
  write_file_atomic(script,
                    "set terminal pngcairo size 800,500\n"
                    "set output 'modes.png'\n"
                    "set xlabel 'number of requests'\n"
                    "set ylabel 'response time (ms)'\n"
                    "set key top left\n"
                    "plot 'cloud.dat' using 1:2 with linespoints title 'validation in service', \\\n"
                    "     'plugin.dat' using 1:2 with linespoints title 'validation in client'\n");
  return {cloud, plugin, script};
}

std::vector<int> parse_counts(std::string_view text) {
  std::vector<int> out;
  while (true) {
    auto comma = text.find(',');
    auto item = trim(text.substr(0, comma));
    auto v = parse_integer(item);
    if (!v || *v < 1 || *v > 1'000'000)
      throw Error(ErrorCode::Field, "counts: '" + std::string(item) + "' is not a positive integer");
    out.push_back(static_cast<int>(*v));
    if (comma == std::string_view::npos) break;
    text.remove_prefix(comma + 1);
  }
  return out;
}

}  // namespace tfp::experiment
