#include "tfp/runcenter.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <thread>

#include "http_util.hpp"
#include "tfp/background.hpp"
#include "tfp/error.hpp"

namespace tfp::runcenter {

namespace {

using Clock = std::chrono::steady_clock;

struct Attempt {
  Clock::time_point start{};
  Clock::time_point end{};
  bool replied = false;
  bool ok = false;  // 2xx
  bool connect_failed = false;
  std::size_t bytes = 0;
};

}  // namespace

Measurement execute(const TestCase& test_case, const LoadProfile& profile, std::chrono::milliseconds request_timeout) {
  if (auto why = check_case(test_case)) throw Error(ErrorCode::Field, *why);
  if (auto why = check_load(profile)) throw Error(ErrorCode::Field, *why);
  const auto url = *parse_url(test_case.url);

  std::vector<Attempt> attempts(static_cast<std::size_t>(profile.requests));
  std::atomic<std::size_t> next{0};
  Measurement m;
  m.started_at = now_utc();

  auto worker = [&] {
    auto client = detail::make_client(url, request_timeout);
    client.set_keep_alive(true);
    for (std::size_t i = next++; i < attempts.size(); i = next++) {
      auto& a = attempts[i];
      a.start = Clock::now();
      auto res = test_case.method == HttpMethod::Get
                     ? client.Get(url.target)
                     : client.Post(url.target, test_case.message.value_or(""), "text/xml; charset=utf-8");
      a.end = Clock::now();
      if (res) {
        a.replied = true;
        a.ok = res->status >= 200 && res->status < 300;
        a.bytes = res->body.size();
      } else {
        a.connect_failed = res.error() == httplib::Error::Connection;
      }
    }
  };

  const int workers = std::min(profile.concurrency, profile.requests);
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
  for (auto& t : pool) t.join();

  std::size_t connect_failures = 0;
  auto first = Clock::time_point::max();
  auto last = Clock::time_point::min();
  for (const auto& a : attempts) {
    first = std::min(first, a.start);
    last = std::max(last, a.end);
    if (a.replied) {
      m.latencies_ms.push_back(std::chrono::duration<double, std::milli>(a.end - a.start).count());
      m.bytes_received += a.bytes;
      if (!a.ok) ++m.error_count;
    } else {
      ++m.error_count;
      ++m.transport_errors;
      if (a.connect_failed) ++connect_failures;
    }
  }
  if (connect_failures == attempts.size())
    throw Error(ErrorCode::TargetUnresolvable, "no connection to " + url.origin() + " succeeded");
  // Floor keeps tps finite if the clock did not advance.
  m.wall_time_s = std::max(std::chrono::duration<double>(last - first).count(), 1e-9);
  return m;
}

Executor http_executor(std::chrono::milliseconds request_timeout) {
  return [request_timeout](const TestCase& tc, const LoadProfile& p) { return execute(tc, p, request_timeout); };
}

namespace {

struct Step {
  Decision decision;
  int next;
};

/// The estimator: given the bracket after an iteration, what happens next.
/// `lo` is the highest passing level (0 if none), `hi` the lowest failing one.
Step decide(int level, int lo, std::optional<int> hi, double growth) {
  if (!hi) {
    double grown = std::ceil(static_cast<double>(level) * growth);
    int next = grown >= static_cast<double>(std::numeric_limits<int>::max()) ? std::numeric_limits<int>::max()
                                                                              : static_cast<int>(grown);
    if (next <= level) return {Decision::Stop, level};  // cannot grow further
    return {Decision::Grow, next};
  }
  if (lo == 0 || *hi - lo <= 1) return {Decision::Stop, level};
  return {Decision::Bisect, lo + (*hi - lo) / 2};
}

}  // namespace

AdaptiveOutcome adaptive_master(const protocol::InstructionSet& instructions, const Executor& run) {
  const AdaptiveParams params = instructions.adaptive.value_or(AdaptiveParams{});
  if (auto why = check_adaptive(params)) throw Error(ErrorCode::Field, *why);

  AdaptiveOutcome out;
  int level = params.start_concurrency;
  int lo = 0;
  std::optional<int> hi;
  std::optional<MeasurementSummary> best;

  for (int iteration = 1;; ++iteration) {
    LoadProfile profile{std::max(params.requests_per_iteration, level), level};
    auto m = run(instructions.test_case, profile);
    auto summary = m.latencies_ms.empty() ? empty_summary(m.error_count) : summarize(m);
    const bool pass = evaluate(summary, instructions.criteria).overall;
    if (pass) {
      lo = std::max(lo, level);
      best = summary;
    } else {
      hi = hi ? std::min(*hi, level) : level;
    }
    auto step = decide(level, lo, hi, params.growth_factor);
    if (step.decision != Decision::Stop && iteration >= params.max_iterations) {
      step.decision = Decision::Stop;
      out.incomplete = true;
    }
    out.traces.push_back({iteration, level, summary, step.decision});
    if (step.decision == Decision::Stop) break;
    level = step.next;
  }

  out.max_sustainable_concurrency = lo;
  out.final_summary = best ? *best : out.traces.front().summary;
  return out;
}

std::vector<int> replay_levels(const std::vector<TraceRecord>& traces, const PerformanceCriteria& criteria,
                               const AdaptiveParams& params) {
  std::vector<int> levels;
  if (traces.empty()) return levels;
  int level = params.start_concurrency;
  int lo = 0;
  std::optional<int> hi;
  for (const auto& t : traces) {
    levels.push_back(level);
    if (evaluate(t.summary, criteria).overall) {
      lo = std::max(lo, level);
    } else {
      hi = hi ? std::min(*hi, level) : level;
    }
    if (t.decision == Decision::Stop) break;
    level = decide(level, lo, hi, params.growth_factor).next;
  }
  return levels;
}

// --- dispatchers -----------------------------------------------------------

EmbeddedDispatcher::EmbeddedDispatcher(Executor run) : run_(std::move(run)) {}

DispatchResult EmbeddedDispatcher::dispatch(const protocol::InstructionSet& instructions) {
  std::lock_guard lock(mu_);
  DispatchResult r;
  if (instructions.adaptive) r.outcome = adaptive_master(instructions, run_);
  else r.measurement = run_(instructions.test_case, instructions.profile);
  return r;
}

HttpDispatcher::HttpDispatcher(std::string base_url, std::chrono::seconds timeout)
    : base_url_(std::move(base_url)), timeout_(timeout) {}

DispatchResult HttpDispatcher::dispatch(const protocol::InstructionSet& instructions) {
  auto url = parse_url(detail::join_url(base_url_, "/execute"));
  if (!url) throw Error(ErrorCode::Transport, "run center url '" + base_url_ + "' is not an absolute http(s) URL");
  // The run center answers 504 at its own deadline; leave it room to say so.
  auto client = detail::make_client(*url, timeout_ + std::chrono::seconds(5));
  auto res = client.Post(url->target, protocol::encode_instructions(instructions),
                         std::string(protocol::kXmlContentType));
  if (!res) throw Error(ErrorCode::Transport, "run center unreachable: " + httplib::to_string(res.error()));
  if (res->status != 200)
    throw Error(ErrorCode::Transport, "run center replied " + std::to_string(res->status) + ": " + res->body);
  DispatchResult r;
  if (instructions.adaptive) r.outcome = protocol::decode_outcome(res->body);
  else r.measurement = protocol::decode_measurement(res->body);
  return r;
}

// --- server ----------------------------------------------------------------

struct Server::Impl {
  EmbeddedDispatcher dispatcher;
  std::chrono::seconds dispatch_timeout;
  httplib::Server http;
  detail::ServerThread thread{http};
  Background background;

  Impl(Executor run, std::chrono::seconds timeout) : dispatcher(std::move(run)), dispatch_timeout(timeout) {
    http.Post("/execute", [this](const httplib::Request& req, httplib::Response& res) { execute(req, res); });
    http.Get("/status", [](const httplib::Request&, httplib::Response& res) {
      res.set_content(protocol::encode_status("READY"), std::string(protocol::kXmlContentType));
    });
  }

  void execute(const httplib::Request& req, httplib::Response& res) {
    protocol::InstructionSet instructions;
    try {
      instructions = protocol::decode_instructions(req.body).value;
    } catch (const Error& e) {
      res.status = 400;
      res.set_content(e.what(), "text/plain");
      return;
    }
    auto pending = background.spawn([this, instructions] { return dispatcher.dispatch(instructions); });
    if (pending.wait_for(dispatch_timeout) != std::future_status::ready) {
      res.status = 504;
      res.set_content("run exceeded the dispatch timeout", "text/plain");
      return;
    }
    try {
      auto result = pending.get();
      res.set_content(result.outcome ? protocol::encode_outcome(*result.outcome)
                                     : protocol::encode_measurement(*result.measurement),
                      std::string(protocol::kXmlContentType));
    } catch (const Error& e) {
      res.status = 502;
      res.set_content(e.what(), "text/plain");
    } catch (const std::exception& e) {
      res.status = 500;
      res.set_content(e.what(), "text/plain");
    }
  }
};

Server::Server(Executor run, std::chrono::seconds dispatch_timeout)
    : impl_(std::make_unique<Impl>(std::move(run), dispatch_timeout)) {}

Server::~Server() { stop(); }

int Server::start(const std::string& host, int port) {
  int bound = detail::bind_or_throw(impl_->http, host, port);
  impl_->thread.run();
  return bound;
}

void Server::serve(const std::string& host, int port) {
  detail::bind_or_throw(impl_->http, host, port);
  impl_->http.listen_after_bind();
}

void Server::stop() { impl_->thread.stop(); }

}  // namespace tfp::runcenter
