#include "tfp/protocol.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "tfp/error.hpp"
#include "tfp/xml.hpp"

namespace tfp::protocol {

namespace {

using xml::Element;
using xml::Writer;

// --- decoding helpers ------------------------------------------------------

enum class Unknown { Warn, Reject };

struct Layout {
  std::vector<std::string_view> required;
  std::vector<std::string_view> optional = {};
  std::vector<std::string_view> repeated = {};
};

/// Indexes the children of a container element and enforces its shape. All
/// shape problems of one container are reported together.
class Section {
 public:
  Section(const Element& parent, std::string_view ns, const Layout& layout, Unknown policy,
          std::vector<std::string>* warnings)
      : where_(parent.name) {
    std::vector<std::string> offenders;
    if (!trim(parent.text).empty()) offenders.push_back("unexpected text inside '" + where_ + "'");
    auto listed = [](const std::vector<std::string_view>& names, const std::string& n) {
      return std::find(names.begin(), names.end(), n) != names.end();
    };
    for (const auto& child : parent.children) {
      if (child.ns == ns && listed(layout.repeated, child.name)) {
        repeated_[child.name].push_back(&child);
      } else if (child.ns == ns && (listed(layout.required, child.name) || listed(layout.optional, child.name))) {
        if (!single_.emplace(child.name, &child).second)
          offenders.push_back("duplicated element '" + child.name + "'");
      } else if (policy == Unknown::Warn && warnings) {
        warnings->push_back("ignored unknown element '" + child.name + "' in '" + where_ + "'");
      } else {
        offenders.push_back("unexpected element '" + child.name + "' in '" + where_ + "'");
      }
    }
    for (auto name : layout.required) {
      if (!single_.count(std::string(name))) offenders.push_back("missing element '" + std::string(name) + "'");
    }
    if (!offenders.empty()) {
      std::string joined;
      for (const auto& o : offenders) joined += (joined.empty() ? "" : "; ") + o;
      throw Error(ErrorCode::Schema, joined);
    }
  }

  const Element& get(std::string_view name) const { return *single_.at(std::string(name)); }

  const Element* find(std::string_view name) const {
    auto it = single_.find(std::string(name));
    return it == single_.end() ? nullptr : it->second;
  }

  std::vector<const Element*> all(std::string_view name) const {
    auto it = repeated_.find(std::string(name));
    return it == repeated_.end() ? std::vector<const Element*>{} : it->second;
  }

  const std::string& where() const { return where_; }

 private:
  std::string where_;
  std::map<std::string, const Element*> single_;
  std::map<std::string, std::vector<const Element*>> repeated_;
};

[[noreturn]] void field_error(std::string_view field, const std::string& why) {
  throw Error(ErrorCode::Field, std::string(field) + ": " + why);
}

const std::string& leaf_text(const Element& e) {
  if (!e.children.empty()) throw Error(ErrorCode::Schema, "unexpected element inside '" + e.name + "'");
  return e.text;
}

double decimal_field(const Element& e) {
  auto v = parse_decimal(leaf_text(e));
  if (!v) field_error(e.name, "'" + e.text + "' is not a plain decimal number");
  return *v;
}

double positive_field(const Element& e) {
  double v = decimal_field(e);
  if (v <= 0.0) field_error(e.name, "must be greater than 0");
  return v;
}

double non_negative_field(const Element& e) {
  double v = decimal_field(e);
  if (v < 0.0) field_error(e.name, "must not be negative");
  return v;
}

std::int64_t integer_field(const Element& e, std::int64_t min, std::int64_t max) {
  auto v = parse_integer(leaf_text(e));
  if (!v) field_error(e.name, "'" + e.text + "' is not an integer");
  if (*v < min || *v > max) field_error(e.name, "out of range");
  return *v;
}

int int_field(const Element& e, int min) {
  return static_cast<int>(integer_field(e, min, std::numeric_limits<int>::max()));
}

std::uint64_t count_field(const Element& e) {
  return static_cast<std::uint64_t>(integer_field(e, 0, std::numeric_limits<std::int64_t>::max()));
}

bool bool_field(const Element& e) {
  auto t = trim(leaf_text(e));
  if (t == "true") return true;
  if (t == "false") return false;
  field_error(e.name, "expected true or false");
}

std::string uuid_field(const Element& e) {
  auto t = std::string(trim(leaf_text(e)));
  if (!is_uuid_v4(t)) field_error(e.name, "'" + t + "' is not a lowercase v4 UUID");
  return t;
}

Timestamp timestamp_field(const Element& e) {
  auto t = parse_timestamp(leaf_text(e));
  if (!t) field_error(e.name, "expected UTC timestamp like 2026-01-31T12:00:00.000Z");
  return *t;
}

void expect_root(const Element& root, std::string_view ns, std::string_view name) {
  if (!root.is(ns, name))
    throw Error(ErrorCode::Schema, "root element must be '" + std::string(name) + "' in namespace " +
                                       std::string(ns) + ", found '" + root.name + "'");
}

/// Unwraps Envelope/Body and returns the single payload element.
const Element& soap_payload(const Element& root, std::string_view payload_name) {
  expect_root(root, kSoapNs, "Envelope");
  Section env(root, kSoapNs, {.required = {"Body"}, .optional = {"Header"}}, Unknown::Reject, nullptr);
  Section body(env.get("Body"), kServiceNs, {.required = {payload_name}}, Unknown::Reject, nullptr);
  return body.get(payload_name);
}

ApplicationIdentity decode_identity(const Element& e, std::string_view ns, std::vector<std::string>* warnings) {
  Section s(e, ns, {.required = {"appId", "userName"}}, Unknown::Warn, warnings);
  ApplicationIdentity id;
  id.app_id = uuid_field(s.get("appId"));
  id.user_name = leaf_text(s.get("userName"));
  if (auto why = check_user_name(id.user_name)) field_error("userName", *why);
  if (trim(id.user_name).size() != id.user_name.size()) field_error("userName", "surrounding whitespace");
  return id;
}

TestCase decode_case(const Element& e, std::string_view ns, std::vector<std::string>* warnings) {
  Section s(e, ns, {.required = {"url", "method"}, .optional = {"message"}}, Unknown::Warn, warnings);
  TestCase tc;
  auto url = normalize_url(leaf_text(s.get("url")));
  if (!url) field_error("url", "'" + s.get("url").text + "' is not an absolute http/https URL");
  if (url->scheme_added && warnings) warnings->push_back("url had no scheme; normalized to " + url->url);
  tc.url = url->url;
  auto method = parse_method(leaf_text(s.get("method")));
  if (!method || trim(s.get("method").text) != to_string(*method))
    field_error("method", "'" + s.get("method").text + "' is not GET or POST");
  tc.method = *method;
  if (const auto* msg = s.find("message")) tc.message = leaf_text(*msg);
  // The published skeleton carries an empty message element even for GET.
  if (tc.method == HttpMethod::Get && tc.message && trim(*tc.message).empty()) {
    tc.message.reset();
    if (warnings) warnings->push_back("empty message ignored for GET");
  }
  if (tc.method == HttpMethod::Post && !tc.message) throw Error(ErrorCode::Schema, "missing element 'message' for POST");
  if (tc.method == HttpMethod::Get && tc.message) throw Error(ErrorCode::Schema, "unexpected element 'message' for GET");
  if (auto why = check_case(tc)) field_error("message", *why);
  return tc;
}

PerformanceCriteria decode_criteria(const Element& e, std::string_view ns, std::vector<std::string>* warnings) {
  Section s(e, ns, {.required = {"response", "tps", "bps"}}, Unknown::Warn, warnings);
  return {positive_field(s.get("response")), positive_field(s.get("tps")), positive_field(s.get("bps"))};
}

LoadProfile decode_load(const Element& e, std::string_view ns, std::vector<std::string>* warnings) {
  Section s(e, ns, {.required = {"requests", "concurrency"}}, Unknown::Warn, warnings);
  LoadProfile p{int_field(s.get("requests"), 1), int_field(s.get("concurrency"), 1)};
  if (auto why = check_load(p)) field_error("concurrency", *why);
  return p;
}

AdaptiveParams decode_adaptive(const Element& e, std::string_view ns, std::vector<std::string>* warnings) {
  Section s(e, ns,
            {.required = {"startConcurrency", "growthFactor", "maxIterations", "requestsPerIteration"}},
            Unknown::Warn, warnings);
  AdaptiveParams a;
  a.start_concurrency = int_field(s.get("startConcurrency"), 1);
  a.growth_factor = decimal_field(s.get("growthFactor"));
  if (a.growth_factor <= 1.0) field_error("growthFactor", "must be greater than 1");
  a.max_iterations = int_field(s.get("maxIterations"), 1);
  a.requests_per_iteration = int_field(s.get("requestsPerIteration"), 1);
  return a;
}

MeasurementSummary decode_summary(const Element& e, std::string_view ns) {
  Section s(e, ns, {.required = {"mean", "p50", "p95", "tps", "bps", "completed", "errored"}}, Unknown::Reject,
            nullptr);
  MeasurementSummary m;
  m.mean_ms = non_negative_field(s.get("mean"));
  m.p50_ms = non_negative_field(s.get("p50"));
  m.p95_ms = non_negative_field(s.get("p95"));
  m.observed_tps = non_negative_field(s.get("tps"));
  m.observed_bps = non_negative_field(s.get("bps"));
  m.completed = count_field(s.get("completed"));
  m.errored = count_field(s.get("errored"));
  if (m.p50_ms > m.p95_ms) field_error("p50", "exceeds p95");
  return m;
}

std::vector<TraceRecord> decode_traces(const Element& e, std::string_view ns) {
  Section s(e, ns, {.required = {}, .repeated = {"trace"}}, Unknown::Reject, nullptr);
  std::vector<TraceRecord> out;
  for (const auto* t : s.all("trace")) {
    Section ts(*t, ns, {.required = {"iteration", "concurrency", "decision", "summary"}}, Unknown::Reject, nullptr);
    TraceRecord r;
    r.iteration = int_field(ts.get("iteration"), 1);
    r.concurrency = int_field(ts.get("concurrency"), 1);
    auto d = parse_decision(trim(leaf_text(ts.get("decision"))));
    if (!d) field_error("decision", "expected GROW, BISECT or STOP");
    r.decision = *d;
    r.summary = decode_summary(ts.get("summary"), ns);
    if (r.iteration != static_cast<int>(out.size()) + 1) field_error("iteration", "traces must count up from 1");
    out.push_back(r);
  }
  return out;
}

TestVerdict decode_verdict(const Element& e, std::string_view ns) {
  Section s(e, ns, {.required = {"overall"}, .repeated = {"criterion"}}, Unknown::Reject, nullptr);
  std::map<std::string, CriterionResult> by_name;
  for (const auto* c : s.all("criterion")) {
    Section cs(*c, ns, {.required = {"name", "expected", "observed", "pass"}}, Unknown::Reject, nullptr);
    auto name = std::string(trim(leaf_text(cs.get("name"))));
    if (name != "response" && name != "tps" && name != "bps") field_error("name", "unknown criterion '" + name + "'");
    CriterionResult r{positive_field(cs.get("expected")), non_negative_field(cs.get("observed")),
                      bool_field(cs.get("pass"))};
    if (!by_name.emplace(name, r).second) throw Error(ErrorCode::Schema, "duplicated criterion '" + name + "'");
  }
  for (auto name : {"response", "tps", "bps"}) {
    if (!by_name.count(name)) throw Error(ErrorCode::Schema, std::string("missing criterion '") + name + "'");
  }
  TestVerdict v{by_name["response"], by_name["tps"], by_name["bps"], bool_field(s.get("overall"))};
  if (v.overall != (v.response.pass && v.tps.pass && v.bps.pass))
    field_error("overall", "disagrees with the criterion results");
  return v;
}

// --- encoding helpers ------------------------------------------------------

void require(const std::optional<std::string>& problem) {
  if (problem) throw Error(ErrorCode::InvalidEnvelope, *problem);
}

std::string q(std::string_view prefix, std::string_view local) {
  return std::string(prefix) + ":" + std::string(local);
}

void write_identity(Writer& w, std::string_view p, const ApplicationIdentity& id) {
  w.open(q(p, "application"));
  w.leaf(q(p, "appId"), id.app_id);
  w.leaf(q(p, "userName"), id.user_name);
  w.close();
}

void write_case(Writer& w, std::string_view p, const TestCase& tc) {
  w.open(q(p, "case"));
  w.leaf(q(p, "url"), tc.url);
  w.leaf(q(p, "method"), to_string(tc.method));
  if (tc.message) w.leaf(q(p, "message"), *tc.message);
  w.close();
}

void write_criteria(Writer& w, std::string_view p, const PerformanceCriteria& c) {
  w.open(q(p, "criteria"));
  w.leaf(q(p, "response"), format_decimal(c.response_ms));
  w.leaf(q(p, "tps"), format_decimal(c.tps));
  w.leaf(q(p, "bps"), format_decimal(c.bps));
  w.close();
}

void write_load(Writer& w, std::string_view p, std::string_view name, const LoadProfile& l) {
  w.open(q(p, name));
  w.leaf(q(p, "requests"), std::to_string(l.requests));
  w.leaf(q(p, "concurrency"), std::to_string(l.concurrency));
  w.close();
}

void write_adaptive(Writer& w, std::string_view p, const AdaptiveParams& a) {
  w.open(q(p, "adaptive"));
  w.leaf(q(p, "startConcurrency"), std::to_string(a.start_concurrency));
  w.leaf(q(p, "growthFactor"), format_decimal(a.growth_factor));
  w.leaf(q(p, "maxIterations"), std::to_string(a.max_iterations));
  w.leaf(q(p, "requestsPerIteration"), std::to_string(a.requests_per_iteration));
  w.close();
}

std::optional<std::string> check_summary(const MeasurementSummary& s) {
  for (double v : {s.mean_ms, s.p50_ms, s.p95_ms, s.observed_tps, s.observed_bps}) {
    if (!std::isfinite(v) || v < 0.0) return "summary values must be finite and non-negative";
  }
  if (s.p50_ms > s.p95_ms) return "summary p50 exceeds p95";
  return std::nullopt;
}

void write_summary(Writer& w, std::string_view p, std::string_view name, const MeasurementSummary& s) {
  require(check_summary(s));
  w.open(q(p, name));
  w.leaf(q(p, "mean"), format_decimal(s.mean_ms));
  w.leaf(q(p, "p50"), format_decimal(s.p50_ms));
  w.leaf(q(p, "p95"), format_decimal(s.p95_ms));
  w.leaf(q(p, "tps"), format_decimal(s.observed_tps));
  w.leaf(q(p, "bps"), format_decimal(s.observed_bps));
  w.leaf(q(p, "completed"), std::to_string(s.completed));
  w.leaf(q(p, "errored"), std::to_string(s.errored));
  w.close();
}

void write_traces(Writer& w, std::string_view p, const std::vector<TraceRecord>& traces) {
  w.open(q(p, "traces"));
  for (std::size_t i = 0; i < traces.size(); ++i) {
    const auto& t = traces[i];
    if (t.iteration != static_cast<int>(i) + 1) require("trace iterations must count up from 1");
    if (t.concurrency < 1) require("trace concurrency must be at least 1");
    w.open(q(p, "trace"));
    w.leaf(q(p, "iteration"), std::to_string(t.iteration));
    w.leaf(q(p, "concurrency"), std::to_string(t.concurrency));
    w.leaf(q(p, "decision"), to_string(t.decision));
    write_summary(w, p, "summary", t.summary);
    w.close();
  }
  w.close();
}

void write_verdict(Writer& w, std::string_view p, const TestVerdict& v) {
  if (v.overall != (v.response.pass && v.tps.pass && v.bps.pass)) require("verdict overall disagrees with criteria");
  w.open(q(p, "verdict"));
  auto criterion = [&](std::string_view name, const CriterionResult& c) {
    require(check_positive(c.expected));
    if (!std::isfinite(c.observed) || c.observed < 0.0) require("observed values must be non-negative");
    w.open(q(p, "criterion"));
    w.leaf(q(p, "name"), name);
    w.leaf(q(p, "expected"), format_decimal(c.expected));
    w.leaf(q(p, "observed"), format_decimal(c.observed));
    w.leaf(q(p, "pass"), c.pass ? "true" : "false");
    w.close();
  };
  criterion("response", v.response);
  criterion("tps", v.tps);
  criterion("bps", v.bps);
  w.leaf(q(p, "overall"), v.overall ? "true" : "false");
  w.close();
}

void open_soap(Writer& w, std::string_view payload) {
  w.open("soap:Envelope", {{"xmlns:soap", std::string(kSoapNs)}});
  w.empty("soap:Header");
  w.open("soap:Body");
  w.open(q("m", payload), {{"xmlns:m", std::string(kServiceNs)}});
}

void close_soap(Writer& w) {
  w.close();
  w.close();
  w.close();
}

std::optional<std::string> check_result(const ResultEnvelope& r) {
  if (!is_uuid_v4(r.task_id)) return "taskId is not a lowercase v4 UUID";
  if (r.detail_url.empty() || !r.detail_url.ends_with(r.task_id)) return "detailUrl must end with the taskId";
  if (!xml::is_xml_safe(r.detail_url)) return "detailUrl contains characters XML cannot carry";
  if (r.error && !xml::is_xml_safe(*r.error)) return "error contains characters XML cannot carry";
  const bool done = r.status == ResultStatus::Done;
  if (done && (!r.verdict || !r.summary)) return "DONE results carry a verdict and a summary";
  if (!done && (r.verdict || r.summary)) return "only DONE results carry a verdict or a summary";
  if (!done && (r.max_sustainable || !r.traces.empty())) return "only DONE results carry adaptive results";
  if (r.error && r.status != ResultStatus::Failed) return "only FAILED results carry an error";
  if (!r.max_sustainable && (r.incomplete || !r.traces.empty())) return "traces require maxSustainable";
  if (r.max_sustainable && *r.max_sustainable < 0) return "maxSustainable must not be negative";
  return std::nullopt;
}

void write_result_fields(Writer& w, const ResultEnvelope& r) {
  require(check_result(r));
  w.leaf("m:taskId", r.task_id);
  w.leaf("m:status", to_string(r.status));
  w.leaf("m:detailUrl", r.detail_url);
  if (r.error) w.leaf("m:error", *r.error);
  if (r.verdict) write_verdict(w, "m", *r.verdict);
  if (r.summary) write_summary(w, "m", "summary", *r.summary);
  if (r.max_sustainable) {
    w.leaf("m:maxSustainable", std::to_string(*r.max_sustainable));
    w.leaf("m:incomplete", r.incomplete ? "true" : "false");
    write_traces(w, "m", r.traces);
  }
}

const Layout kResultLayout{.required = {"taskId", "status", "detailUrl"},
                           .optional = {"error", "verdict", "summary", "maxSustainable", "incomplete", "traces"}};

ResultEnvelope read_result_fields(const Section& s) {
  ResultEnvelope r;
  r.task_id = uuid_field(s.get("taskId"));
  auto status = parse_status(trim(leaf_text(s.get("status"))));
  if (!status) field_error("status", "expected DONE, PENDING or FAILED");
  r.status = *status;
  r.detail_url = leaf_text(s.get("detailUrl"));
  if (!r.detail_url.ends_with(r.task_id)) field_error("detailUrl", "must end with the taskId");
  if (const auto* e = s.find("error")) r.error = leaf_text(*e);
  if (const auto* e = s.find("verdict")) r.verdict = decode_verdict(*e, kServiceNs);
  if (const auto* e = s.find("summary")) r.summary = decode_summary(*e, kServiceNs);
  const auto* ms = s.find("maxSustainable");
  const auto* inc = s.find("incomplete");
  const auto* tr = s.find("traces");
  if (ms) {
    if (!inc || !tr) throw Error(ErrorCode::Schema, "missing element 'incomplete' or 'traces' after 'maxSustainable'");
    r.max_sustainable = int_field(*ms, 0);
    r.incomplete = bool_field(*inc);
    r.traces = decode_traces(*tr, kServiceNs);
  } else if (inc || tr) {
    throw Error(ErrorCode::Schema, "missing element 'maxSustainable'");
  }
  if (auto why = check_result(r)) throw Error(ErrorCode::Schema, *why);
  return r;
}

}  // namespace

// --- request ---------------------------------------------------------------

std::string encode_request(const TestEnvelope& env) {
  require(check_identity(env.application));
  require(check_case(env.test_case));
  require(check_criteria(env.criteria));
  if (env.load) require(check_load(*env.load));
  if (env.adaptive) {
    require(check_adaptive(*env.adaptive));
    if (env.mode != RunMode::Master) require("adaptive parameters require master mode");
  }
  Writer w;
  open_soap(w, "TFPService");
  write_identity(w, "m", env.application);
  write_case(w, "m", env.test_case);
  write_criteria(w, "m", env.criteria);
  if (env.load) write_load(w, "m", "load", *env.load);
  if (env.mode == RunMode::Master) w.leaf("m:mode", "master");
  if (env.adaptive) write_adaptive(w, "m", *env.adaptive);
  close_soap(w);
  return w.str();
}

Decoded<TestEnvelope> decode_request(std::string_view text) {
  auto root = xml::parse(text);
  const auto& payload = soap_payload(root, "TFPService");
  Decoded<TestEnvelope> out;
  auto* warn = &out.warnings;
  Section s(payload, kServiceNs,
            {.required = {"application", "case", "criteria"}, .optional = {"load", "mode", "adaptive"}}, Unknown::Warn,
            warn);
  auto& env = out.value;
  env.application = decode_identity(s.get("application"), kServiceNs, warn);
  env.test_case = decode_case(s.get("case"), kServiceNs, warn);
  env.criteria = decode_criteria(s.get("criteria"), kServiceNs, warn);
  if (const auto* e = s.find("load")) env.load = decode_load(*e, kServiceNs, warn);
  if (const auto* e = s.find("mode")) {
    auto mode = trim(leaf_text(*e));
    if (mode == "master") env.mode = RunMode::Master;
    else if (mode == "critical") env.mode = RunMode::Critical;
    else field_error("mode", "expected master or critical");
  }
  if (const auto* e = s.find("adaptive")) {
    if (env.mode != RunMode::Master) throw Error(ErrorCode::Schema, "unexpected element 'adaptive' outside master mode");
    env.adaptive = decode_adaptive(*e, kServiceNs, warn);
  }
  return out;
}

// --- result ----------------------------------------------------------------

std::string encode_result(const ResultEnvelope& r) {
  Writer w;
  open_soap(w, "TFPServiceResult");
  write_result_fields(w, r);
  close_soap(w);
  return w.str();
}

Decoded<ResultEnvelope> decode_result(std::string_view text) {
  auto root = xml::parse(text);
  const auto& payload = soap_payload(root, "TFPServiceResult");
  Decoded<ResultEnvelope> out;
  Section s(payload, kServiceNs, kResultLayout, Unknown::Warn, &out.warnings);
  out.value = read_result_fields(s);
  return out;
}

ResultEnvelope to_result_envelope(const TestResultRecord& r) {
  ResultEnvelope e;
  e.task_id = r.task_id;
  e.status = r.status;
  e.detail_url = r.detail_url;
  e.verdict = r.verdict;
  e.summary = r.summary;
  e.max_sustainable = r.max_sustainable;
  e.incomplete = r.incomplete;
  e.traces = r.traces;
  e.error = r.error;
  return e;
}

std::string encode_record(const TestResultRecord& r) {
  require(check_identity(r.identity));
  require(check_case(r.test_case));
  require(check_criteria(r.criteria));
  require(check_load(r.profile));
  if (r.adaptive) require(check_adaptive(*r.adaptive));
  Writer w;
  open_soap(w, "TFPServiceResult");
  write_result_fields(w, to_result_envelope(r));
  w.open("m:request");
  write_identity(w, "m", r.identity);
  write_case(w, "m", r.test_case);
  write_criteria(w, "m", r.criteria);
  write_load(w, "m", "load", r.profile);
  w.leaf("m:mode", to_string(r.mode));
  if (r.adaptive) write_adaptive(w, "m", *r.adaptive);
  w.close();
  w.leaf("m:finishedAt", format_timestamp(r.finished_at));
  close_soap(w);
  return w.str();
}

TestResultRecord decode_record(std::string_view text) {
  auto root = xml::parse(text);
  const auto& payload = soap_payload(root, "TFPServiceResult");
  Layout layout = kResultLayout;
  layout.required.push_back("request");
  layout.required.push_back("finishedAt");
  Section s(payload, kServiceNs, layout, Unknown::Reject, nullptr);
  auto env = read_result_fields(s);
  TestResultRecord r;
  r.task_id = env.task_id;
  r.status = env.status;
  r.detail_url = env.detail_url;
  r.verdict = env.verdict;
  r.summary = env.summary;
  r.max_sustainable = env.max_sustainable;
  r.incomplete = env.incomplete;
  r.traces = env.traces;
  r.error = env.error;
  r.finished_at = timestamp_field(s.get("finishedAt"));

  Section req(s.get("request"), kServiceNs,
              {.required = {"application", "case", "criteria", "load", "mode"}, .optional = {"adaptive"}},
              Unknown::Reject, nullptr);
  r.identity = decode_identity(req.get("application"), kServiceNs, nullptr);
  r.test_case = decode_case(req.get("case"), kServiceNs, nullptr);
  r.criteria = decode_criteria(req.get("criteria"), kServiceNs, nullptr);
  r.profile = decode_load(req.get("load"), kServiceNs, nullptr);
  auto mode = trim(leaf_text(req.get("mode")));
  if (mode == "master") r.mode = RunMode::Master;
  else if (mode == "critical") r.mode = RunMode::Critical;
  else field_error("mode", "expected master or critical");
  if (const auto* e = req.find("adaptive")) r.adaptive = decode_adaptive(*e, kServiceNs, nullptr);
  return r;
}

// --- run center documents --------------------------------------------------

std::string encode_instructions(const InstructionSet& i) {
  if (!is_uuid_v4(i.task_id)) require("taskId is not a lowercase v4 UUID");
  require(check_identity(i.identity));
  require(check_case(i.test_case));
  require(check_criteria(i.criteria));
  require(check_load(i.profile));
  if (i.adaptive) require(check_adaptive(*i.adaptive));
  Writer w;
  w.open("tfp:instructionSet", {{"xmlns:tfp", std::string(kRunCenterNs)}, {"action", "EXECUTE"}});
  w.leaf("tfp:taskId", i.task_id);
  write_identity(w, "tfp", i.identity);
  write_case(w, "tfp", i.test_case);
  write_criteria(w, "tfp", i.criteria);
  write_load(w, "tfp", "profile", i.profile);
  if (i.adaptive) write_adaptive(w, "tfp", *i.adaptive);
  w.close();
  return w.str();
}

Decoded<InstructionSet> decode_instructions(std::string_view text) {
  auto root = xml::parse(text);
  expect_root(root, kRunCenterNs, "instructionSet");
  auto action = root.attributes.find("action");
  if (action == root.attributes.end()) throw Error(ErrorCode::Schema, "missing attribute 'action'");
  if (action->second != "EXECUTE") field_error("action", "unsupported action '" + action->second + "'");
  Decoded<InstructionSet> out;
  auto* warn = &out.warnings;
  Section s(root, kRunCenterNs,
            {.required = {"taskId", "application", "case", "criteria", "profile"}, .optional = {"adaptive"}},
            Unknown::Warn, warn);
  auto& i = out.value;
  i.task_id = uuid_field(s.get("taskId"));
  i.identity = decode_identity(s.get("application"), kRunCenterNs, warn);
  i.test_case = decode_case(s.get("case"), kRunCenterNs, warn);
  i.criteria = decode_criteria(s.get("criteria"), kRunCenterNs, warn);
  i.profile = decode_load(s.get("profile"), kRunCenterNs, warn);
  if (const auto* e = s.find("adaptive")) i.adaptive = decode_adaptive(*e, kRunCenterNs, warn);
  return out;
}

std::string encode_measurement(const Measurement& m) {
  if (!(m.wall_time_s > 0.0) || !std::isfinite(m.wall_time_s)) require("wallTime must be greater than 0");
  if (m.transport_errors > m.error_count) require("transport errors exceed the error count");
  for (double l : m.latencies_ms) {
    if (!std::isfinite(l) || l < 0.0) require("latencies must be finite and non-negative");
  }
  Writer w;
  w.open("tfp:measurement", {{"xmlns:tfp", std::string(kRunCenterNs)}});
  w.leaf("tfp:startedAt", format_timestamp(m.started_at));
  w.leaf("tfp:wallTime", format_decimal(m.wall_time_s));
  w.leaf("tfp:bytes", std::to_string(m.bytes_received));
  w.leaf("tfp:errors", std::to_string(m.error_count));
  w.leaf("tfp:transportErrors", std::to_string(m.transport_errors));
  w.open("tfp:latencies");
  for (double l : m.latencies_ms) w.leaf("tfp:latency", format_decimal(l));
  w.close();
  w.close();
  return w.str();
}

Measurement decode_measurement(std::string_view text) {
  auto root = xml::parse(text);
  expect_root(root, kRunCenterNs, "measurement");
  Section s(root, kRunCenterNs,
            {.required = {"startedAt", "wallTime", "bytes", "errors", "transportErrors", "latencies"}},
            Unknown::Reject, nullptr);
  Measurement m;
  m.started_at = timestamp_field(s.get("startedAt"));
  m.wall_time_s = positive_field(s.get("wallTime"));
  m.bytes_received = count_field(s.get("bytes"));
  m.error_count = count_field(s.get("errors"));
  m.transport_errors = count_field(s.get("transportErrors"));
  if (m.transport_errors > m.error_count) field_error("transportErrors", "exceeds errors");
  Section lat(s.get("latencies"), kRunCenterNs, {.required = {}, .repeated = {"latency"}}, Unknown::Reject, nullptr);
  for (const auto* e : lat.all("latency")) m.latencies_ms.push_back(non_negative_field(*e));
  return m;
}

std::string encode_outcome(const AdaptiveOutcome& o) {
  if (o.max_sustainable_concurrency < 0) require("maxSustainable must not be negative");
  Writer w;
  w.open("tfp:outcome", {{"xmlns:tfp", std::string(kRunCenterNs)}});
  w.leaf("tfp:maxSustainable", std::to_string(o.max_sustainable_concurrency));
  w.leaf("tfp:incomplete", o.incomplete ? "true" : "false");
  write_summary(w, "tfp", "finalSummary", o.final_summary);
  write_traces(w, "tfp", o.traces);
  w.close();
  return w.str();
}

AdaptiveOutcome decode_outcome(std::string_view text) {
  auto root = xml::parse(text);
  expect_root(root, kRunCenterNs, "outcome");
  Section s(root, kRunCenterNs, {.required = {"maxSustainable", "incomplete", "finalSummary", "traces"}},
            Unknown::Reject, nullptr);
  AdaptiveOutcome o;
  o.max_sustainable_concurrency = int_field(s.get("maxSustainable"), 0);
  o.incomplete = bool_field(s.get("incomplete"));
  o.final_summary = decode_summary(s.get("finalSummary"), kRunCenterNs);
  o.traces = decode_traces(s.get("traces"), kRunCenterNs);
  return o;
}

std::string encode_status(std::string_view state) {
  Writer w;
  w.open("tfp:status", {{"xmlns:tfp", std::string(kRunCenterNs)}, {"action", "STATUS"}});
  w.leaf("tfp:state", state);
  w.close();
  return w.str();
}

std::string decode_status(std::string_view text) {
  auto root = xml::parse(text);
  expect_root(root, kRunCenterNs, "status");
  auto action = root.attributes.find("action");
  if (action == root.attributes.end() || action->second != "STATUS") field_error("action", "expected STATUS");
  Section s(root, kRunCenterNs, {.required = {"state"}}, Unknown::Reject, nullptr);
  return std::string(trim(leaf_text(s.get("state"))));
}

}  // namespace tfp::protocol
