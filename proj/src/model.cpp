#include "tfp/model.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>

#include <boost/uuid/uuid.hpp>
#include <boost/uuid/uuid_generators.hpp>
#include <boost/uuid/uuid_io.hpp>

#include "tfp/error.hpp"
#include "tfp/xml.hpp"

namespace tfp {

std::string_view to_string(HttpMethod m) noexcept { return m == HttpMethod::Get ? "GET" : "POST"; }

std::optional<HttpMethod> parse_method(std::string_view text) {
  auto upper = to_upper(trim(text));
  if (upper == "GET") return HttpMethod::Get;
  if (upper == "POST") return HttpMethod::Post;
  return std::nullopt;
}

std::string_view to_string(Decision d) noexcept {
  switch (d) {
    case Decision::Grow: return "GROW";
    case Decision::Bisect: return "BISECT";
    case Decision::Stop: return "STOP";
  }
  return "STOP";
}

std::optional<Decision> parse_decision(std::string_view text) {
  if (text == "GROW") return Decision::Grow;
  if (text == "BISECT") return Decision::Bisect;
  if (text == "STOP") return Decision::Stop;
  return std::nullopt;
}

std::string_view to_string(RunMode m) noexcept { return m == RunMode::Critical ? "critical" : "master"; }

std::string_view to_string(ResultStatus s) noexcept {
  switch (s) {
    case ResultStatus::Done: return "DONE";
    case ResultStatus::Pending: return "PENDING";
    case ResultStatus::Failed: return "FAILED";
  }
  return "FAILED";
}

std::optional<ResultStatus> parse_status(std::string_view text) {
  if (text == "DONE") return ResultStatus::Done;
  if (text == "PENDING") return ResultStatus::Pending;
  if (text == "FAILED") return ResultStatus::Failed;
  return std::nullopt;
}

bool is_uuid_v4(std::string_view s) noexcept {
  if (s.size() != 36) return false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const char c = s[i];
    if (i == 8 || i == 13 || i == 18 || i == 23) {
      if (c != '-') return false;
    } else if (!((c >= '0' && c <= '9') || (c >= 'a' && c <= 'f'))) {
      return false;
    }
  }
  return s[14] == '4' && (s[19] == '8' || s[19] == '9' || s[19] == 'a' || s[19] == 'b');
}

std::optional<std::string> check_user_name(std::string_view name) {
  auto t = trim(name);
  if (t.empty()) return "user name is blank";
  if (t.size() > 64) return "user name exceeds 64 characters";
  if (!xml::is_xml_safe(t)) return "user name contains characters XML cannot carry";
  return std::nullopt;
}

std::optional<std::string> check_positive(double value) {
  if (!std::isfinite(value) || value <= 0.0) return "must be a number greater than 0";
  return std::nullopt;
}

std::optional<std::string> check_load(const LoadProfile& load) {
  if (load.requests < 1) return "requests must be at least 1";
  if (load.concurrency < 1) return "concurrency must be at least 1";
  if (load.concurrency > load.requests) return "concurrency must not exceed requests";
  return std::nullopt;
}

std::optional<std::string> check_case(const TestCase& tc) {
  if (!parse_url(tc.url)) return "url '" + tc.url + "' is not an absolute http/https URL";
  if (!xml::is_xml_safe(tc.url)) return "url contains characters XML cannot carry";
  if (tc.message && !xml::is_xml_safe(*tc.message)) return "message contains characters XML cannot carry";
  if (tc.method == HttpMethod::Post && !tc.message) return "POST requires a message";
  if (tc.method == HttpMethod::Get && tc.message) return "GET must not carry a message";
  return std::nullopt;
}

std::optional<std::string> check_identity(const ApplicationIdentity& id) {
  if (!is_uuid_v4(id.app_id)) return "appId '" + id.app_id + "' is not a lowercase v4 UUID";
  if (auto e = check_user_name(id.user_name)) return e;
  if (trim(id.user_name).size() != id.user_name.size()) return "user name has surrounding whitespace";
  return std::nullopt;
}

std::optional<std::string> check_criteria(const PerformanceCriteria& c) {
  if (check_positive(c.response_ms)) return "response must be greater than 0";
  if (check_positive(c.tps)) return "tps must be greater than 0";
  if (check_positive(c.bps)) return "bps must be greater than 0";
  return std::nullopt;
}

std::optional<std::string> check_adaptive(const AdaptiveParams& a) {
  if (a.start_concurrency < 1) return "startConcurrency must be at least 1";
  if (!std::isfinite(a.growth_factor) || a.growth_factor <= 1.0) return "growthFactor must be greater than 1";
  if (a.max_iterations < 1) return "maxIterations must be at least 1";
  if (a.requests_per_iteration < 1) return "requestsPerIteration must be at least 1";
  return std::nullopt;
}

std::string ParsedUrl::origin() const { return scheme + "://" + host + ":" + std::to_string(port); }

std::optional<ParsedUrl> parse_url(std::string_view url) {
  ParsedUrl out;
  auto sep = url.find("://");
  if (sep == std::string_view::npos) return std::nullopt;
  out.scheme = std::string(url.substr(0, sep));
  for (auto& c : out.scheme) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (out.scheme != "http" && out.scheme != "https") return std::nullopt;
  auto rest = url.substr(sep + 3);
  auto path_at = rest.find_first_of("/?#");
  auto authority = rest.substr(0, path_at);
  out.target = path_at == std::string_view::npos ? "/" : std::string(rest.substr(path_at));
  if (!out.target.empty() && out.target.front() != '/') out.target.insert(out.target.begin(), '/');
  if (auto hash = out.target.find('#'); hash != std::string::npos) out.target.erase(hash);
  if (authority.empty() || authority.find('@') != std::string_view::npos) return std::nullopt;
  auto colon = authority.rfind(':');
  if (colon != std::string_view::npos) {
    auto port = parse_integer(authority.substr(colon + 1));
    if (!port || *port < 1 || *port > 65535 || authority.substr(colon + 1).front() == '+') return std::nullopt;
    out.port = static_cast<int>(*port);
    authority = authority.substr(0, colon);
  } else {
    out.port = out.scheme == "https" ? 443 : 80;
  }
  if (authority.empty()) return std::nullopt;
  for (char c : authority) {
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '.' || c == '_')) return std::nullopt;
  }
  out.host = std::string(authority);
  return out;
}

std::optional<NormalizedUrl> normalize_url(std::string_view url) {
  url = trim(url);
  if (url.empty()) return std::nullopt;
  if (url.find("://") != std::string_view::npos) {
    if (!parse_url(url)) return std::nullopt;
    return NormalizedUrl{std::string(url), false};
  }
  std::string prefixed = "http://" + std::string(url);
  if (!parse_url(prefixed)) return std::nullopt;
  return NormalizedUrl{std::move(prefixed), true};
}

double percentile_nearest_rank(std::span<const double> sorted, int percent) {
  const std::size_t n = sorted.size();
  // ceil(percent * n / 100) in integers; rank 0 only happens for percent 0.
  std::size_t rank = (static_cast<std::size_t>(percent) * n + 99) / 100;
  rank = std::clamp<std::size_t>(rank, 1, n);
  return sorted[rank - 1];
}

MeasurementSummary summarize(const Measurement& m) {
  if (m.latencies_ms.empty()) throw Error(ErrorCode::NoSamples, "no request completed");
  std::vector<double> sorted = m.latencies_ms;
  std::sort(sorted.begin(), sorted.end());
  MeasurementSummary s;
  s.completed = sorted.size();
  s.errored = m.error_count;
  s.mean_ms = std::accumulate(sorted.begin(), sorted.end(), 0.0) / static_cast<double>(sorted.size());
  s.p50_ms = percentile_nearest_rank(sorted, 50);
  s.p95_ms = percentile_nearest_rank(sorted, 95);
  s.observed_tps = static_cast<double>(s.completed) / m.wall_time_s;
  s.observed_bps = static_cast<double>(m.bytes_received) * 8.0 / m.wall_time_s;
  return s;
}

MeasurementSummary empty_summary(std::uint64_t errored) {
  MeasurementSummary s;
  s.errored = errored;
  return s;
}

TestVerdict evaluate(const MeasurementSummary& s, const PerformanceCriteria& c) {
  TestVerdict v;
  v.response = {c.response_ms, s.mean_ms, s.mean_ms <= c.response_ms};
  v.tps = {c.tps, s.observed_tps, s.observed_tps >= c.tps};
  v.bps = {c.bps, s.observed_bps, s.observed_bps >= c.bps};
  v.overall = v.response.pass && v.tps.pass && v.bps.pass;
  return v;
}

std::string new_uuid() {
  thread_local boost::uuids::random_generator gen;
  return boost::uuids::to_string(gen());
}

ApplicationIdentity new_app_identity(std::string_view user_name) {
  auto name = trim(user_name);
  if (name.empty()) throw Error(ErrorCode::EmptyUsername, "user name is blank");
  if (auto e = check_user_name(name)) throw Error(ErrorCode::Field, "userName: " + *e);
  return {new_uuid(), std::string(name)};
}

}  // namespace tfp
