#include "tfp/service.hpp"

#include <sstream>
#include <system_error>

#include "http_util.hpp"
#include "tfp/conventions.hpp"
#include "tfp/error.hpp"
#include "tfp/xml.hpp"

namespace tfp::service {

namespace fs = std::filesystem;

// --- store -----------------------------------------------------------------

ResultStore::ResultStore(fs::path data_dir) : dir_(std::move(data_dir)) {
  std::error_code ec;
  fs::create_directories(dir_, ec);
  if (ec) throw Error(ErrorCode::Io, "cannot create " + dir_.string() + ": " + ec.message());
  for (const auto& entry : fs::directory_iterator(dir_, ec)) {
    if (!entry.is_regular_file() || entry.path().extension() != ".xml") continue;
    try {
      auto record = protocol::decode_record(read_file(entry.path()));
      if (entry.path().stem() == record.task_id) records_.emplace(record.task_id, std::move(record));
    } catch (const Error&) {
      // Unreadable files stay out of the index.
    }
  }
  if (ec) throw Error(ErrorCode::Io, "cannot scan " + dir_.string() + ": " + ec.message());
}

std::string ResultStore::reserve_task_id() {
  std::lock_guard lock(mu_);
  for (;;) {
    auto id = new_uuid();
    if (!records_.count(id) && reserved_.insert(id).second) return id;
  }
}

void ResultStore::put(const TestResultRecord& record) {
  auto text = protocol::encode_record(record);
  std::lock_guard lock(mu_);
  auto it = records_.find(record.task_id);
  if (it != records_.end()) {
    if (it->second.status != ResultStatus::Pending)
      throw Error(ErrorCode::TerminalRecord, "task " + record.task_id + " is already " +
                                                 std::string(to_string(it->second.status)));
    if (record.status == ResultStatus::Pending)
      throw Error(ErrorCode::TerminalRecord, "task " + record.task_id + " is already PENDING");
  }
  write_file_atomic(dir_ / (record.task_id + ".xml"), text);
  records_[record.task_id] = record;
}

TestResultRecord ResultStore::fetch(const std::string& task_id) const {
  std::lock_guard lock(mu_);
  auto it = records_.find(task_id);
  if (it == records_.end()) throw Error(ErrorCode::UnknownTask, task_id);
  return it->second;
}

std::vector<std::string> ResultStore::task_ids() const {
  std::lock_guard lock(mu_);
  std::vector<std::string> ids;
  for (const auto& [id, _] : records_) ids.push_back(id);
  return ids;
}

// --- parsing and reporting -------------------------------------------------

protocol::InstructionSet parse_to_instructions(const protocol::TestEnvelope& env, const std::string& task_id,
                                               RunMode mode) {
  protocol::InstructionSet i;
  i.task_id = task_id;
  i.identity = env.application;
  i.test_case = env.test_case;
  i.criteria = env.criteria;
  i.profile = env.load.value_or(LoadProfile{});
  if (mode == RunMode::Master) i.adaptive = env.adaptive.value_or(AdaptiveParams{});
  return i;
}

namespace {

std::string num(double v) {
  std::ostringstream ss;
  ss.precision(6);
  ss << v;
  return ss.str();
}

void criterion_row(std::ostringstream& html, std::string_view name, std::string_view unit, std::string_view cmp,
                   const CriterionResult& c) {
  html << "<tr class=\"criterion\"><td>" << name << "</td><td>" << cmp << ' ' << num(c.expected) << ' ' << unit
       << "</td><td>" << num(c.observed) << ' ' << unit << "</td><td class=\"" << (c.pass ? "pass" : "fail") << "\">"
       << (c.pass ? "PASS" : "FAIL") << "</td></tr>\n";
}

}  // namespace

std::string render_report(const TestResultRecord& r) {
  using xml::escape;
  std::ostringstream html;
  html << "<!DOCTYPE html>\n<html><head><meta charset=\"utf-8\"><title>Performance test " << r.task_id
       << "</title>\n<style>body{font-family:sans-serif;margin:2em}table{border-collapse:collapse;margin:1em 0}"
          "td,th{border:1px solid #ccc;padding:4px 8px;text-align:left}.pass{color:#070}.fail{color:#a00}"
          "</style></head><body>\n";
  html << "<h1>Performance test " << r.task_id << "</h1>\n";
  html << "<p>Status: <strong>" << to_string(r.status) << "</strong>, mode " << to_string(r.mode) << ", finished "
       << format_timestamp(r.finished_at) << "</p>\n";

  html << "<h2>Request</h2>\n<table>\n";
  html << "<tr><th>Application</th><td>" << escape(r.identity.app_id) << "</td></tr>\n";
  html << "<tr><th>User</th><td>" << escape(r.identity.user_name) << "</td></tr>\n";
  html << "<tr><th>URL</th><td>" << escape(r.test_case.url) << "</td></tr>\n";
  html << "<tr><th>Method</th><td>" << to_string(r.test_case.method) << "</td></tr>\n";
  if (r.test_case.message) html << "<tr><th>Message</th><td><pre>" << escape(*r.test_case.message) << "</pre></td></tr>\n";
  html << "<tr><th>Load</th><td>" << r.profile.requests << " requests, concurrency " << r.profile.concurrency
       << "</td></tr>\n</table>\n";

  if (r.error) html << "<p class=\"fail\">Error: " << escape(*r.error) << "</p>\n";

  if (r.verdict) {
    html << "<h2>Criteria</h2>\n<table>\n<tr><th>Criterion</th><th>Expected</th><th>Observed</th><th>Result</th></tr>\n";
    criterion_row(html, "response", "ms", "&lt;=", r.verdict->response);
    criterion_row(html, "tps", "req/s", "&gt;=", r.verdict->tps);
    criterion_row(html, "bps", "bit/s", "&gt;=", r.verdict->bps);
    html << "</table>\n<p>Overall: <strong class=\"" << (r.verdict->overall ? "pass\">PASS" : "fail\">FAIL")
         << "</strong></p>\n";
  }
  if (r.summary) {
    const auto& s = *r.summary;
    html << "<h2>Latency</h2>\n<table>\n<tr><th>mean</th><th>p50</th><th>p95</th><th>completed</th><th>errored</th></tr>\n"
         << "<tr><td>" << num(s.mean_ms) << " ms</td><td>" << num(s.p50_ms) << " ms</td><td>" << num(s.p95_ms)
         << " ms</td><td>" << s.completed << "</td><td>" << s.errored << "</td></tr>\n</table>\n";
  }
  if (r.max_sustainable) {
    html << "<h2>Adaptive run</h2>\n<p>Highest concurrency meeting the criteria: " << *r.max_sustainable
         << (r.incomplete ? " (iteration budget exhausted before the search converged)" : "") << "</p>\n";
    html << "<table>\n<tr><th>Iteration</th><th>Concurrency</th><th>p50 ms</th><th>p95 ms</th><th>tps</th>"
            "<th>Decision</th></tr>\n";
    for (const auto& t : r.traces) {
      html << "<tr class=\"trace\"><td>" << t.iteration << "</td><td>" << t.concurrency << "</td><td>"
           << num(t.summary.p50_ms) << "</td><td>" << num(t.summary.p95_ms) << "</td><td>"
           << num(t.summary.observed_tps) << "</td><td>" << to_string(t.decision) << "</td></tr>\n";
    }
    html << "</table>\n";
  }
  html << "</body></html>\n";
  return html.str();
}

// --- service ---------------------------------------------------------------

struct Service::Http {
  httplib::Server server;
  detail::ServerThread thread{server};
};

namespace {

Reply soap_reply(int status, const protocol::ResultEnvelope& env) {
  return {status, std::string(protocol::kSoapContentType), protocol::encode_result(env)};
}

Reply error_reply(int status, const std::string& text) { return {status, "text/plain; charset=utf-8", text}; }

void record_summary(TestResultRecord& record, const MeasurementSummary& summary) {
  record.summary = summary;
  record.verdict = evaluate(summary, record.criteria);
}

}  // namespace

Service::Service(Options options, std::shared_ptr<runcenter::Dispatcher> dispatcher)
    : options_(std::move(options)),
      dispatcher_(std::move(dispatcher)),
      store_(options_.data_dir),
      http_(std::make_unique<Http>()) {
  auto& srv = http_->server;
  srv.set_payload_max_length(kMaxBodyBytes);
  srv.Post("/tfps", [this](const httplib::Request& req, httplib::Response& res) {
    auto host = req.get_header_value("Host");
    auto reply = handle_submission(req.body, "http://" + (host.empty() ? std::string("localhost") : host));
    res.status = reply.status;
    res.set_content(reply.body, reply.content_type);
  });
  srv.Get(R"(/results/([^/]+)\.xml)", [this](const httplib::Request& req, httplib::Response& res) {
    auto reply = handle_result_xml(req.matches[1]);
    res.status = reply.status;
    res.set_content(reply.body, reply.content_type);
  });
  srv.Get(R"(/results/([^/.]+))", [this](const httplib::Request& req, httplib::Response& res) {
    auto reply = handle_report(req.matches[1]);
    res.status = reply.status;
    res.set_content(reply.body, reply.content_type);
  });
}

Service::~Service() {
  stop();
  background_.join_all();
}

runcenter::DispatchResult Service::dispatch_with_timeout(const protocol::InstructionSet& instructions,
                                                         std::chrono::seconds timeout) {
  auto dispatcher = dispatcher_;
  auto pending = background_.spawn([dispatcher, instructions] { return dispatcher->dispatch(instructions); });
  if (pending.wait_for(timeout) != std::future_status::ready)
    throw Error(ErrorCode::Transport, "run center did not answer within " + std::to_string(timeout.count()) + " s");
  return pending.get();
}

Reply Service::handle_submission(std::string_view body, const std::string& base_url) {
  if (body.size() > kMaxBodyBytes) return error_reply(413, "request body exceeds 1 MiB");
  protocol::TestEnvelope env;
  try {
    env = protocol::decode_request(body).value;
  } catch (const Error& e) {
    return error_reply(400, e.what());
  }

  const auto task_id = store_.reserve_task_id();
  auto instructions = parse_to_instructions(env, task_id, env.mode);
  const auto base = options_.public_base_url.empty() ? base_url : options_.public_base_url;

  TestResultRecord record;
  record.task_id = task_id;
  record.mode = env.mode;
  record.identity = instructions.identity;
  record.test_case = instructions.test_case;
  record.criteria = instructions.criteria;
  record.profile = instructions.profile;
  record.adaptive = instructions.adaptive;
  record.detail_url = detail::join_url(base, "/results/" + task_id);

  try {
    if (env.mode == RunMode::Master) {
      record.status = ResultStatus::Pending;
      record.finished_at = now_utc();
      store_.put(record);
      background_.spawn([this, record, instructions] { finish_master(record, instructions); });
      return soap_reply(202, protocol::to_result_envelope(record));
    }

    int status = 200;
    try {
      auto result = dispatch_with_timeout(instructions, options_.critical_timeout);
      if (!result.measurement) throw Error(ErrorCode::Transport, "run center returned no measurement");
      record_summary(record, summarize(*result.measurement));
      record.status = ResultStatus::Done;
    } catch (const Error& e) {
      record.status = ResultStatus::Failed;
      record.error = e.what();
      status = 502;
    }
    record.finished_at = now_utc();
    store_.put(record);
    return soap_reply(status, protocol::to_result_envelope(record));
  } catch (const Error& e) {
    return error_reply(500, e.what());
  }
}

void Service::finish_master(TestResultRecord record, const protocol::InstructionSet& instructions) {
  try {
    auto result = dispatcher_->dispatch(instructions);
    if (!result.outcome) throw Error(ErrorCode::Transport, "run center returned no adaptive outcome");
    record_summary(record, result.outcome->final_summary);
    record.traces = result.outcome->traces;
    record.max_sustainable = result.outcome->max_sustainable_concurrency;
    record.incomplete = result.outcome->incomplete;
    record.status = ResultStatus::Done;
  } catch (const std::exception& e) {
    record.status = ResultStatus::Failed;
    record.error = e.what();
  }
  record.finished_at = now_utc();
  try {
    store_.put(record);
  } catch (const Error&) {
    // The PENDING record stays; nothing else can be done from here.
  }
}

Reply Service::handle_result_xml(const std::string& task_id) const {
  try {
    return soap_reply(200, protocol::to_result_envelope(store_.fetch(task_id)));
  } catch (const Error& e) {
    return error_reply(404, e.what());
  }
}

Reply Service::handle_report(const std::string& task_id) const {
  try {
    return {200, "text/html; charset=utf-8", render_report(store_.fetch(task_id))};
  } catch (const Error& e) {
    return error_reply(404, e.what());
  }
}

int Service::start(const std::string& host, int port) {
  int bound = detail::bind_or_throw(http_->server, host, port);
  http_->thread.run();
  return bound;
}

void Service::serve(const std::string& host, int port) {
  detail::bind_or_throw(http_->server, host, port);
  http_->server.listen_after_bind();
}

void Service::stop() { http_->thread.stop(); }

void Service::wait_idle() { background_.join_all(); }

}  // namespace tfp::service
