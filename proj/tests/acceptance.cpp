// Acceptance run: one PASS/FAIL line per criterion, exit 1 if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "generators.hpp"
#include "oracles.hpp"
#include "rule_table.hpp"
#include "support.hpp"
#include "tfp/client.hpp"
#include "tfp/conventions.hpp"
#include "tfp/error.hpp"
#include "tfp/experiment.hpp"
#include "tfp/protocol.hpp"
#include "tfp/runcenter.hpp"
#include "tfp/service.hpp"
#include "tfp/sumscore.hpp"
#include "tfp/validator.hpp"

using namespace tfp;
using namespace std::chrono_literals;
using fixtures::TempDir;

namespace {

struct Failed : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void check(bool ok, const std::string& what) {
  if (!ok) throw Failed(what);
}

std::string fmt(double v) {
  std::ostringstream s;
  s << v;
  return s.str();
}

// 1
std::string sum_reproduction() {
  auto s = sumscore::sum_score(1.58, -3.49, 3.49, -3.25, sumscore::kEqualWeights);
  const double want[] = {0.395, -0.8725, 0.8725, -0.8125};
  for (int i = 0; i < 4; ++i) check(std::fabs(s.weighted[i] - want[i]) <= 1e-9, "weighted[" + std::to_string(i) + "]");
  check(std::fabs(s.sum - -0.4175) <= 1e-9, "SUM " + fmt(s.sum));
  return "SUM " + fmt(s.sum);
}

// 2
std::string clamps() {
  double ze = sumscore::z_error_rate(0, 50);
  double zc = sumscore::z_completion(20, 20);
  check(ze == -3.49, "z_error " + fmt(ze));
  check(zc == 3.49, "z_completion " + fmt(zc));
  return "z_error " + fmt(ze) + ", z_completion " + fmt(zc);
}

// 3
std::string quantile_accuracy() {
  double worst = 0;
  for (int i = 0; i < 1000; ++i) {
    double p = 1e-4 + (1 - 2e-4) * (i + 0.5) / 1000.0;
    worst = std::max(worst, std::fabs(fixtures::phi_simpson(sumscore::inv_norm_cdf(p)) - p));
  }
  check(worst < 1e-6, "max error " + fmt(worst));
  return "max |Phi(q(p)) - p| " + fmt(worst);
}

// 4
std::string round_trips() {
  fixtures::Gen g(2024);
  for (int i = 0; i < 1000; ++i) {
    auto env = g.envelope();
    auto a = protocol::encode_request(env);
    check(protocol::decode_request(a).value == env, "envelope " + std::to_string(i));
    check(protocol::encode_request(env) == a, "envelope encoding not deterministic");
    auto res = g.result();
    auto b = protocol::encode_result(res);
    check(protocol::decode_result(b).value == res, "result " + std::to_string(i));
    check(protocol::encode_result(res) == b, "result encoding not deterministic");
    auto ins = g.instructions();
    auto c = protocol::encode_instructions(ins);
    check(protocol::decode_instructions(c).value == ins, "instructions " + std::to_string(i));
    check(protocol::encode_instructions(ins) == c, "instruction encoding not deterministic");
  }
  return "3 x 1000 values";
}

// 5
std::string rule_table() {
  std::set<int> covered;
  for (const auto& rc : fixtures::rule_table()) {
    std::vector<int> errors;
    for (const auto& d : validate_script(rc.text)) {
      if (d.severity == Severity::Error) errors.push_back(d.rule);
    }
    check(errors == std::vector<int>{rc.rule}, "V" + std::to_string(rc.rule) + " case");
    covered.insert(rc.rule);
  }
  check(covered == std::set<int>{1, 2, 3, 4, 5, 6, 7}, "rules not all covered");
  check(validate_script(fixtures::script(fixtures::kGet)).empty(), "valid script has diagnostics");
  auto example = validate_script(fixtures::script("<url>www.example.com/TFP/</url><method>GET</method>",
                                                    "<response>3</response><tps>30</tps><bps>1048576</bps>"));
  check(!has_errors(example) && example.size() == 1 && example[0].rule == 8, "example script");
  auto parsed = parse_script(fixtures::script("<url>www.example.com/TFP/</url><method>GET</method>",
                                              "<response>3</response><tps>30</tps><bps>1048576</bps>"));
  check(parsed.script.test_case.url == "http://www.example.com/TFP/", "scheme not added");
  return "V1-V7 each alone, example passes with 1 warning";
}

// 6
std::string conventions() {
  TempDir d;
  auto def = load_layout(d.path()).layout;
  for (const char* f : {"BookSearch.java", "src/BookSearch.py", "BookSearch.tar.gz"}) {
    auto want = f == std::string("BookSearch.tar.gz") ? "TFP/Critical/BookSearch.tarPerformance.xml"
                                                      : "TFP/Critical/BookSearchPerformance.xml";
    check(resolve_critical(f, def) == d.path() / want, f);
  }
  std::filesystem::create_directories(d / "TFP");
  write_file_atomic(d / "TFP/tfp.conf", "critical_dir = perf/critical\n");
  check(resolve_critical("BookSearch.java", load_layout(d.path()).layout) ==
            d.path() / "perf/critical/BookSearchPerformance.xml",
        "override ignored");
  for (const char* bad : {"critical_dir = ../outside\n", "master_path = /etc/x.xml\n"}) {
    write_file_atomic(d / "TFP/tfp.conf", bad);
    try {
      load_layout(d.path());
      check(false, std::string("accepted ") + bad);
    } catch (const Error& e) {
      check(e.code() == ErrorCode::EscapesRoot, e.what());
    }
  }
  return "defaults, override, escapes rejected";
}

// 7
std::string end_to_end() {
  fixtures::MockTarget target(fixtures::MockTarget::fixed(20ms));
  runcenter::Server center;
  int center_port = center.start("127.0.0.1", 0);
  TempDir data, project;
  service::Service svc({data.path(), "", 120s},
                       std::make_shared<runcenter::HttpDispatcher>("http://127.0.0.1:" + std::to_string(center_port)));
  int port = svc.start("127.0.0.1", 0);

  std::ostringstream sink;
  check(client::cmd_init(project.path(), "alice", {sink, sink}) == 0, "init");
  auto script_path = project / "TFP/Critical/BookSearchPerformance.xml";
  client::ClientConfig cfg;
  cfg.service_url = "http://127.0.0.1:" + std::to_string(port);

  auto run = [&](PerformanceCriteria c, std::string& out) {
    write_file_atomic(script_path, render_script({TestCase{target.url(), HttpMethod::Get, std::nullopt}, c,
                                                  LoadProfile{20, 2}, std::nullopt}));
    std::ostringstream o, e;
    int code = client::cmd_run_critical(project.path(), "BookSearch.java", cfg, {o, e});
    out = o.str() + e.str();
    return code;
  };

  std::string out;
  int code = run({100, 1, 8}, out);
  check(code == 0, "loose criteria exit " + std::to_string(code) + ": " + out);
  auto at = out.find("details: ");
  check(at != std::string::npos, "no detail url");
  auto detail = out.substr(at + 9, out.find('\n', at) - at - 9);
  auto url = parse_url(detail);
  check(url.has_value(), "bad detail url " + detail);
  httplib::Client c(url->host, url->port);
  auto page = c.Get(url->target);
  check(page && page->status == 200, "detail url does not resolve");
  auto id = detail.substr(detail.rfind('/') + 1);
  check(svc.store().fetch(id).status == ResultStatus::Done, "record not DONE");

  code = run({5, 1, 8}, out);
  check(code == 1, "tight criteria exit " + std::to_string(code) + ": " + out);
  check(out.find("response: FAIL") != std::string::npos && out.find("tps: PASS") != std::string::npos &&
            out.find("bps: PASS") != std::string::npos,
        "expected only response to fail: " + out);
  return "exit 0 then exit 1, detail page 200";
}

// 8
std::string adaptive() {
  auto latency = [](int c) { return 5.0 + 10.0 * c; };
  runcenter::Executor synthetic = [&](const TestCase&, const LoadProfile& p) {
    Measurement m;
    m.latencies_ms.assign(static_cast<std::size_t>(p.requests), latency(p.concurrency));
    m.wall_time_s = p.requests * latency(p.concurrency) / 1000.0 / p.concurrency;
    m.bytes_received = static_cast<std::uint64_t>(p.requests) * 100;
    return m;
  };
  PerformanceCriteria criteria{100, 0.001, 0.001};
  protocol::InstructionSet ins{new_uuid(), new_app_identity("a"), {"http://h/", HttpMethod::Get, std::nullopt},
                               criteria, LoadProfile{}, AdaptiveParams{}};
  auto out = runcenter::adaptive_master(ins, synthetic);

  int sweep = 0;
  for (int c = 1; c <= 16; ++c) {
    auto s = summarize(synthetic(ins.test_case, {std::max(10, c), c}));
    if (!evaluate(s, criteria).overall) break;
    sweep = c;
  }
  check(out.max_sustainable_concurrency == 9, "search found " + std::to_string(out.max_sustainable_concurrency));
  check(sweep == 9, "sweep found " + std::to_string(sweep));
  check(out.traces.size() <= 20, std::to_string(out.traces.size()) + " iterations");
  check(!out.incomplete, "search incomplete");
  return "max 9 = sweep 9 in " + std::to_string(out.traces.size()) + " iterations";
}

// 9
std::string experiment_shape() {
  using experiment::Mode;
  experiment::ExperimentConfig small;
  small.request_counts = {5, 10, 15, 20, 25, 30};
  small.validation_delay_ms = 50;
  small.rest_delay_ms = 10;
  small.repetitions = 5;
  auto rows = experiment::run_modes_experiment(small);

  std::vector<double> gaps;
  double ratio = 0;
  for (std::size_t i = 0; i + 1 < rows.size(); i += 2) {
    const auto& cloud = rows[i];
    const auto& plugin = rows[i + 1];
    check(cloud.mode == Mode::CloudValidation && plugin.mode == Mode::PluginValidation, "row order");
    gaps.push_back(cloud.total_time_ms - plugin.total_time_ms);
    if (cloud.n_requests == 10) ratio = cloud.total_time_ms / plugin.total_time_ms;
  }
  check(ratio >= 1.5, "ratio at n=10 is " + fmt(ratio));
  for (std::size_t i = 1; i < gaps.size(); ++i)
    check(gaps[i] >= gaps[i - 1] * 0.8, "gap shrinks between counts " + std::to_string(i - 1) + " and " +
                                            std::to_string(i) + ": " + fmt(gaps[i - 1]) + " -> " + fmt(gaps[i]));
  check(gaps.back() > gaps.front(), "gap does not grow");

  experiment::ExperimentConfig large = small;
  large.request_counts = {10};
  large.rest_delay_ms = 1000;
  large.repetitions = 3;
  auto big = experiment::run_modes_experiment(large);
  double rel = (big[0].total_time_ms - big[1].total_time_ms) / big[0].total_time_ms;
  check(rel <= 0.15, "relative gap at rest 1000 is " + fmt(rel));
  return "ratio " + fmt(ratio) + ", gap " + fmt(gaps.front()) + ".." + fmt(gaps.back()) + "ms, large-rest gap " +
         fmt(rel * 100) + "%";
}

// 10
std::string hammer() {
  TempDir data;
  runcenter::Executor quick = [](const TestCase&, const LoadProfile& p) {
    Measurement m;
    m.latencies_ms.assign(static_cast<std::size_t>(p.requests), 2.0);
    m.wall_time_s = 0.1;
    m.bytes_received = 1000;
    return m;
  };
  std::vector<std::string> ids;
  {
    service::Service svc({data.path(), "", 120s}, std::make_shared<runcenter::EmbeddedDispatcher>(quick));
    int port = svc.start("127.0.0.1", 0);
    std::mutex mu;
    std::vector<std::string> problems;
    std::vector<std::thread> ts;
    for (int i = 0; i < 20; ++i) {
      ts.emplace_back([&, i] {
        protocol::TestEnvelope env{new_app_identity("u" + std::to_string(i)),
                                   {"http://h/x", HttpMethod::Get, std::nullopt},
                                   {100, 1, 8},
                                   LoadProfile{10, 2},
                                   RunMode::Critical,
                                   std::nullopt};
        httplib::Client c("127.0.0.1", port);
        auto res = c.Post("/tfps", protocol::encode_request(env), std::string(protocol::kSoapContentType));
        std::lock_guard lock(mu);
        if (!res || res->status != 200) {
          problems.push_back(res ? std::to_string(res->status) : httplib::to_string(res.error()));
          return;
        }
        ids.push_back(protocol::decode_result(res->body).value.task_id);
      });
    }
    for (auto& t : ts) t.join();
    check(problems.empty(), "submission failed: " + (problems.empty() ? "" : problems[0]));
    check(std::set<std::string>(ids.begin(), ids.end()).size() == 20, "ids not distinct");
    httplib::Client c("127.0.0.1", port);
    for (const auto& id : ids) {
      auto r = c.Get("/results/" + id + ".xml");
      check(r && r->status == 200, "cannot fetch " + id);
    }
  }
  service::ResultStore reopened(data.path());
  check(reopened.task_ids().size() == 20, "store has " + std::to_string(reopened.task_ids().size()) + " records");
  for (const auto& id : ids) check(reopened.fetch(id).status == ResultStatus::Done, id + " not DONE after restart");
  return "20 distinct ids, fetchable, intact after restart";
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    std::function<std::string()> run;
  };
  const std::vector<Criterion> all = {
      {"sum reproduction", sum_reproduction},
      {"clamped z-equivalents", clamps},
      {"inverse normal accuracy", quantile_accuracy},
      {"protocol round trips", round_trips},
      {"validator rule table", rule_table},
      {"convention mapping", conventions},
      {"end-to-end run", end_to_end},
      {"adaptive search", adaptive},
      {"experiment shape", experiment_shape},
      {"submission hammer", hammer},
  };
  int failures = 0;
  for (std::size_t i = 0; i < all.size(); ++i) {
    auto t0 = std::chrono::steady_clock::now();
    std::string verdict, detail;
    try {
      detail = all[i].run();
      verdict = "PASS";
    } catch (const std::exception& e) {
      detail = e.what();
      verdict = "FAIL";
      ++failures;
    }
    double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("%s %2zu %s (%.2fs): %s\n", verdict.c_str(), i + 1, all[i].name, s, detail.c_str());
    std::fflush(stdout);
  }
  return failures ? 1 : 0;
}
