#pragma once

// Domain values shared by the client, the service and the run center, plus
// the two pure operations every tier needs: summarizing a raw measurement and
// judging the summary against declared criteria.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tfp/text.hpp"

namespace tfp {

struct ApplicationIdentity {
  std::string app_id;     // canonical lowercase v4 UUID
  std::string user_name;  // trimmed, 1..64 characters

  bool operator==(const ApplicationIdentity&) const = default;
};

enum class HttpMethod { Get, Post };

std::string_view to_string(HttpMethod m) noexcept;
/// Case-insensitive; yields the canonical method or nothing.
std::optional<HttpMethod> parse_method(std::string_view text);

struct TestCase {
  std::string url;
  HttpMethod method = HttpMethod::Get;
  std::optional<std::string> message;  // present iff POST

  bool operator==(const TestCase&) const = default;
};

struct PerformanceCriteria {
  double response_ms = 0.0;
  double tps = 0.0;
  double bps = 0.0;

  bool operator==(const PerformanceCriteria&) const = default;
};

struct LoadProfile {
  int requests = 100;
  int concurrency = 10;

  bool operator==(const LoadProfile&) const = default;
};

struct Measurement {
  std::vector<double> latencies_ms;     // one per completed request, any status
  std::uint64_t bytes_received = 0;
  double wall_time_s = 0.0;
  std::uint64_t error_count = 0;        // transport failures + non-2xx replies
  std::uint64_t transport_errors = 0;   // requests that produced no response
  Timestamp started_at{};

  bool operator==(const Measurement&) const = default;
};

struct MeasurementSummary {
  double mean_ms = 0.0;
  double p50_ms = 0.0;
  double p95_ms = 0.0;
  double observed_tps = 0.0;
  double observed_bps = 0.0;
  std::uint64_t completed = 0;
  std::uint64_t errored = 0;

  bool operator==(const MeasurementSummary&) const = default;
};

struct CriterionResult {
  double expected = 0.0;
  double observed = 0.0;
  bool pass = false;

  bool operator==(const CriterionResult&) const = default;
};

struct TestVerdict {
  CriterionResult response;
  CriterionResult tps;
  CriterionResult bps;
  bool overall = false;

  bool operator==(const TestVerdict&) const = default;
};

enum class Decision { Grow, Bisect, Stop };

std::string_view to_string(Decision d) noexcept;
std::optional<Decision> parse_decision(std::string_view text);

struct TraceRecord {
  int iteration = 0;
  int concurrency = 0;
  MeasurementSummary summary;
  Decision decision = Decision::Stop;

  bool operator==(const TraceRecord&) const = default;
};

struct AdaptiveParams {
  int start_concurrency = 1;
  double growth_factor = 2.0;
  int max_iterations = 20;  // bounds every loop turn, bisection included
  int requests_per_iteration = 50;

  bool operator==(const AdaptiveParams&) const = default;
};

struct AdaptiveOutcome {
  std::vector<TraceRecord> traces;
  int max_sustainable_concurrency = 0;  // 0: criteria unmet at the start level
  MeasurementSummary final_summary;
  bool incomplete = false;  // iteration budget ran out before the bracket closed

  bool operator==(const AdaptiveOutcome&) const = default;
};

enum class RunMode { Critical, Master };

std::string_view to_string(RunMode m) noexcept;

enum class ResultStatus { Done, Pending, Failed };

std::string_view to_string(ResultStatus s) noexcept;
std::optional<ResultStatus> parse_status(std::string_view text);

/// What the service keeps per task. Critical runs fill summary and verdict;
/// master runs also carry the adaptive trace.
struct TestResultRecord {
  std::string task_id;
  ResultStatus status = ResultStatus::Pending;
  RunMode mode = RunMode::Critical;
  ApplicationIdentity identity;
  TestCase test_case;
  PerformanceCriteria criteria;
  LoadProfile profile;
  std::optional<AdaptiveParams> adaptive;
  std::optional<MeasurementSummary> summary;
  std::optional<TestVerdict> verdict;
  std::vector<TraceRecord> traces;
  std::optional<int> max_sustainable;
  bool incomplete = false;
  std::optional<std::string> error;
  Timestamp finished_at{};
  std::string detail_url;

  bool operator==(const TestResultRecord&) const = default;
};

// --- field rules -----------------------------------------------------------
// Each returns an explanation when the value is unacceptable. The envelope
// decoder and the script validator share them so both tiers judge alike.

bool is_uuid_v4(std::string_view text) noexcept;
std::optional<std::string> check_user_name(std::string_view name);
std::optional<std::string> check_positive(double value);
std::optional<std::string> check_load(const LoadProfile& load);
std::optional<std::string> check_case(const TestCase& tc);
/// Aggregates the per-field rules; empty when the value is valid.
std::optional<std::string> check_identity(const ApplicationIdentity& id);
std::optional<std::string> check_criteria(const PerformanceCriteria& c);
std::optional<std::string> check_adaptive(const AdaptiveParams& a);

struct ParsedUrl {
  std::string scheme;  // "http" or "https"
  std::string host;
  int port = 0;
  std::string target;  // path plus query, at least "/"

  /// scheme://host:port, the form the HTTP client wants.
  std::string origin() const;
};

std::optional<ParsedUrl> parse_url(std::string_view url);

struct NormalizedUrl {
  std::string url;
  bool scheme_added = false;
};

/// Prefixes "http://" onto scheme-less URLs like "www.example.com/TFP/".
/// Yields nothing when the result is still not an absolute http(s) URL.
std::optional<NormalizedUrl> normalize_url(std::string_view url);

// --- operations ------------------------------------------------------------

/// Nearest-rank percentile over ascending-sorted samples: the value at
/// 1-based rank ceil(percent / 100 * n).
double percentile_nearest_rank(std::span<const double> sorted, int percent);

/// Throws E_NO_SAMPLES when no request completed.
MeasurementSummary summarize(const Measurement& m);

/// Summary of an iteration in which nothing completed; fails every
/// throughput criterion.
MeasurementSummary empty_summary(std::uint64_t errored);

TestVerdict evaluate(const MeasurementSummary& s, const PerformanceCriteria& c);

std::string new_uuid();
/// Throws E_EMPTY_USERNAME for blank names.
ApplicationIdentity new_app_identity(std::string_view user_name);

}  // namespace tfp
