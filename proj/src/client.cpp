#include "tfp/client.hpp"

#include <cstdlib>
#include <iomanip>
#include <map>
#include <sstream>
#include <system_error>

#include "http_util.hpp"
#include "tfp/conventions.hpp"
#include "tfp/error.hpp"
#include "tfp/validator.hpp"

namespace tfp::client {

namespace fs = std::filesystem;

std::optional<std::string> resolve_service_url(const std::optional<std::string>& flag, const fs::path& project_root) {
  if (flag && !flag->empty()) return flag;
  if (const char* env = std::getenv(kServiceUrlEnv); env && *env) return std::string(env);
  try {
    return load_layout(project_root).service_url;
  } catch (const Error&) {
    return std::nullopt;
  }
}

int cmd_init(const fs::path& root, std::string_view user_name, Console io) {
  try {
    auto layout = scaffold_project(root, user_name);
    io.out << (root / "TFP").string() << "\n"
           << layout.critical_path().string() << "\n"
           << layout.master_file().string() << "\n"
           << layout.app_id_file().string() << "\n";
    return kExitPass;
  } catch (const Error& e) {
    io.err << e.what() << "\n";
    return kExitFilesystem;
  }
}

int cmd_create_test(const fs::path& root, const std::string& service_file, Console io) {
  try {
    std::error_code ec;
    if (!fs::is_directory(root / "TFP", ec))
      throw Error(ErrorCode::Io, root.string() + " is not a scaffolded project; run `tfpc init` first");
    auto layout = load_layout(root).layout;
    auto path = resolve_critical(service_file, layout);
    if (fs::exists(path, ec)) throw Error(ErrorCode::Exists, path.string() + " already exists");
    fs::create_directories(path.parent_path(), ec);
    write_file_atomic(path, critical_script_template(service_name_of(service_file)));
    io.out << path.string() << "\n";
    return kExitPass;
  } catch (const Error& e) {
    io.err << e.what() << "\n";
    return kExitFilesystem;
  }
}

namespace {

/// Prints the diagnostics of one file; true when it has errors.
bool report_file(const fs::path& path, Console io) {
  std::vector<Diagnostic> diags;
  try {
    diags = validate_script(read_file(path));
  } catch (const Error& e) {
    io.err << "ERROR " << path.string() << ": " << e.what() << "\n";
    return true;
  }
  for (const auto& d : diags) io.err << path.string() << ": " << format_diagnostic(d) << "\n";
  return has_errors(diags);
}

}  // namespace

int cmd_validate(const std::vector<fs::path>& paths, Console io) {
  bool any_error = false;
  for (const auto& p : paths) any_error = report_file(p, io) || any_error;
  return any_error ? kExitValidation : kExitPass;
}

CoalescingRunner::CoalescingRunner(std::function<void()> job) : job_(std::move(job)), worker_([this] { loop(); }) {}

CoalescingRunner::~CoalescingRunner() {
  {
    std::lock_guard lock(mu_);
    stopping_ = true;
  }
  cv_.notify_all();
  worker_.join();
}

void CoalescingRunner::notify() {
  {
    std::lock_guard lock(mu_);
    pending_ = true;
  }
  cv_.notify_all();
}

void CoalescingRunner::wait_idle() {
  std::unique_lock lock(mu_);
  cv_.wait(lock, [this] { return !pending_ && !running_; });
}

void CoalescingRunner::loop() {
  std::unique_lock lock(mu_);
  for (;;) {
    cv_.wait(lock, [this] { return pending_ || stopping_; });
    if (stopping_) return;
    pending_ = false;
    running_ = true;
    lock.unlock();
    job_();
    lock.lock();
    running_ = false;
    cv_.notify_all();
  }
}

int cmd_watch(const std::vector<fs::path>& paths, Console io, const std::atomic<bool>& stop,
              std::chrono::milliseconds poll_interval) {
  std::mutex print_mu;
  std::map<fs::path, bool> failing;
  std::vector<std::unique_ptr<CoalescingRunner>> runners;
  std::vector<std::optional<std::string>> seen(paths.size());

  for (const auto& p : paths) {
    failing[p] = false;
    runners.push_back(std::make_unique<CoalescingRunner>([&, p] {
      std::ostringstream out, err;
      bool bad = report_file(p, {out, err});
      std::lock_guard lock(print_mu);
      io.err << err.str();
      io.out << p.string() << (bad ? ": errors" : ": ok") << "\n";
      failing[p] = bad;
    }));
  }

  auto snapshot = [](const fs::path& p) -> std::optional<std::string> {
    try {
      return read_file(p);
    } catch (const Error&) {
      return std::nullopt;
    }
  };

  for (bool first = true; first || !stop.load(); first = false) {
    for (std::size_t i = 0; i < paths.size(); ++i) {
      auto now = snapshot(paths[i]);
      if (first || now != seen[i]) {
        seen[i] = std::move(now);
        runners[i]->notify();
      }
    }
    if (stop.load()) break;
    std::this_thread::sleep_for(poll_interval);
  }
  for (auto& r : runners) r->wait_idle();
  std::lock_guard lock(print_mu);
  for (const auto& [_, bad] : failing) {
    if (bad) return kExitValidation;
  }
  return kExitPass;
}

protocol::TestEnvelope build_envelope(const ApplicationIdentity& identity, const std::string& script_text,
                                      const ClientConfig& config, RunMode mode) {
  auto parsed = parse_script(script_text);
  protocol::TestEnvelope env;
  env.application = identity;
  env.test_case = parsed.script.test_case;
  env.criteria = parsed.script.criteria;
  env.load = parsed.script.load;
  if (config.requests || config.concurrency) {
    LoadProfile load = env.load.value_or(LoadProfile{});
    if (config.requests) load.requests = *config.requests;
    if (config.concurrency) load.concurrency = *config.concurrency;
    if (auto why = check_load(load)) throw Error(ErrorCode::Field, "load override: " + *why);
    env.load = load;
  }
  env.mode = mode;
  if (mode == RunMode::Master) env.adaptive = parsed.script.adaptive.value_or(AdaptiveParams{});
  return env;
}

namespace {

std::string num(double v) {
  std::ostringstream ss;
  ss << std::setprecision(6) << v;
  return ss.str();
}

void print_verdict(const TestVerdict& v, std::ostream& out) {
  auto line = [&](std::string_view name, const CriterionResult& c, std::string_view cmp, std::string_view unit) {
    out << name << ": " << (c.pass ? "PASS " : "FAIL ") << num(c.observed) << unit << ' ' << cmp << ' '
        << num(c.expected) << unit << "\n";
  };
  line("response", v.response, "<=", "ms");
  line("tps", v.tps, ">=", "");
  line("bps", v.bps, ">=", "");
  out << "overall: " << (v.overall ? "PASS" : "FAIL") << "\n";
}

/// Stops a command with an exit code after printing one error line.
struct Abort {
  int code;
  std::string message;
};

struct Prepared {
  protocol::TestEnvelope envelope;
  ParsedUrl service;
};

Prepared prepare(const fs::path& root, const fs::path& script_path, ErrorCode missing, const std::string& what,
                 const ClientConfig& config, RunMode mode, Console io) {
  std::error_code ec;
  if (!fs::exists(script_path, ec))
    throw Abort{kExitMissingTest, std::string(to_string(missing)) + ": no " + what + " at " + script_path.string()};
  std::string text;
  try {
    text = read_file(script_path);
  } catch (const Error& e) {
    throw Abort{kExitFilesystem, e.what()};
  }
  auto diags = validate_script(text);
  if (has_errors(diags)) {
    for (const auto& d : diags) io.err << script_path.string() << ": " << format_diagnostic(d) << "\n";
    throw Abort{kExitValidation, "E_INVALID_SCRIPT: " + script_path.string() + " was not submitted"};
  }
  ApplicationIdentity identity;
  try {
    identity = read_app_id(load_layout(root).layout);
  } catch (const Error& e) {
    throw Abort{kExitFilesystem, e.what()};
  }
  auto service = parse_url(config.service_url);
  if (!service) throw Abort{kExitTransport, "E_TRANSPORT: service url '" + config.service_url + "' is not usable"};
  try {
    return {build_envelope(identity, text, config, mode), *service};
  } catch (const Error& e) {
    throw Abort{kExitValidation, e.what()};
  }
}

protocol::ResultEnvelope decode_reply(const httplib::Result& res) {
  if (!res) throw Abort{kExitTransport, "E_TRANSPORT: " + httplib::to_string(res.error())};
  try {
    return protocol::decode_result(res->body).value;
  } catch (const Error& e) {
    throw Abort{kExitTransport, "E_TRANSPORT: service replied " + std::to_string(res->status) + ": " +
                                    (res->body.empty() ? std::string(e.what()) : res->body)};
  }
}

int finish(const protocol::ResultEnvelope& result, Console io) {
  if (result.status == ResultStatus::Failed)
    throw Abort{kExitTransport, "E_TRANSPORT: run failed: " + result.error.value_or("unknown") +
                                    " (details: " + result.detail_url + ")"};
  print_verdict(*result.verdict, io.out);
  io.out << "details: " << result.detail_url << "\n";
  return result.verdict->overall ? kExitPass : kExitPerfFail;
}

template <typename Body>
int guarded(Console io, Body&& body) {
  try {
    return body();
  } catch (const Abort& a) {
    io.err << a.message << "\n";
    return a.code;
  } catch (const Error& e) {
    io.err << e.what() << "\n";
    return kExitFilesystem;
  }
}

}  // namespace

int cmd_run_critical(const fs::path& root, const std::string& service_file, const ClientConfig& config, Console io) {
  return guarded(io, [&] {
    ProjectLayout layout;
    try {
      layout = load_layout(root).layout;
    } catch (const Error& e) {
      throw Abort{kExitFilesystem, e.what()};
    }
    fs::path script;
    try {
      script = resolve_critical(service_file, layout);
    } catch (const Error& e) {
      throw Abort{kExitMissingTest, e.what()};
    }
    auto prepared = prepare(root, script, ErrorCode::NoTestCase,
                            "test case for service '" + service_name_of(service_file) + "'", config,
                            RunMode::Critical, io);
    auto client = detail::make_client(prepared.service, config.timeout);
    auto res = client.Post(detail::join_url(prepared.service.target, "/tfps"),
                           protocol::encode_request(prepared.envelope), std::string(protocol::kSoapContentType));
    auto result = decode_reply(res);
    if (result.status == ResultStatus::Pending)
      throw Abort{kExitTransport, "E_TRANSPORT: service answered PENDING to a critical run"};
    return finish(result, io);
  });
}

int cmd_run_master(const fs::path& root, const ClientConfig& config, Console io) {
  return guarded(io, [&] {
    ProjectLayout layout;
    try {
      layout = load_layout(root).layout;
    } catch (const Error& e) {
      throw Abort{kExitFilesystem, e.what()};
    }
    auto prepared = prepare(root, layout.master_file(), ErrorCode::NoMaster, "master test suite", config,
                            RunMode::Master, io);
    auto client = detail::make_client(prepared.service, config.timeout);
    auto res = client.Post(detail::join_url(prepared.service.target, "/tfps"),
                           protocol::encode_request(prepared.envelope), std::string(protocol::kSoapContentType));
    auto result = decode_reply(res);

    const auto deadline = std::chrono::steady_clock::now() + config.poll_timeout;
    const auto poll_path = detail::join_url(prepared.service.target, "/results/" + result.task_id + ".xml");
    std::string last_error;
    while (result.status == ResultStatus::Pending) {
      if (std::chrono::steady_clock::now() + config.poll_interval > deadline)
        throw Abort{kExitTransport, "E_POLL_TIMEOUT: task " + result.task_id + " still PENDING" +
                                        (last_error.empty() ? "" : " (last poll: " + last_error + ")")};
      std::this_thread::sleep_for(config.poll_interval);
      // a dropped poll is retried; the task keeps running on the service
      auto res = client.Get(poll_path);
      if (!res) {
        last_error = httplib::to_string(res.error());
        continue;
      }
      result = decode_reply(res);
    }
    if (result.status == ResultStatus::Done && result.max_sustainable) {
      io.out << "max sustainable concurrency: " << *result.max_sustainable << "\n";
      if (result.incomplete) io.out << "search incomplete: E_ITERATION_BUDGET exhausted\n";
      for (const auto& t : result.traces) {
        io.out << "trace " << t.iteration << ": concurrency " << t.concurrency << ", mean " << num(t.summary.mean_ms)
               << "ms, p95 " << num(t.summary.p95_ms) << "ms, tps " << num(t.summary.observed_tps) << " -> "
               << to_string(t.decision) << "\n";
      }
      io.out << "traces: " << result.traces.size() << "\n";
    }
    return finish(result, io);
  });
}

}  // namespace tfp::client
