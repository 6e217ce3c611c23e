#include "tfp/sumscore.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>

#include "tfp/error.hpp"
#include "tfp/text.hpp"

namespace tfp::sumscore {

double norm_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

double inv_norm_cdf(double p) {
  if (!(p > 0.0 && p < 1.0)) throw Error(ErrorCode::Domain, "probability must lie in (0, 1)");

  // Acklam's rational approximation, relative error about 1.15e-9.
  static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
                                 1.383577518672690e+02,  -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
                                 6.680131188771972e+01,  -1.328068155288572e+01};
  static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
                                 -2.549732539343734e+00, 4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
                                 3.754408661907416e+00};
  constexpr double p_low = 0.02425;

  double x;
  if (p < p_low) {
    double q = std::sqrt(-2 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1);
  } else if (p <= 1 - p_low) {
    double q = p - 0.5;
    double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1);
  } else {
    double q = std::sqrt(-2 * std::log1p(-p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1);
  }

  // One Halley step brings it to full double precision.
  double e = norm_cdf(x) - p;
  double u = e * std::sqrt(2 * M_PI) * std::exp(x * x / 2);
  return x - u / (1 + x * u / 2);
}

double mean(const std::vector<double>& xs) {
  if (xs.empty()) throw Error(ErrorCode::Domain, "mean of an empty list");
  double s = 0;
  for (double x : xs) s += x;
  return s / static_cast<double>(xs.size());
}

double sample_stddev(const std::vector<double>& xs) {
  if (xs.size() < 2) throw Error(ErrorCode::Domain, "standard deviation needs at least two values");
  double m = mean(xs);
  double ss = 0;
  for (double x : xs) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(xs.size() - 1));
}

namespace {

double nonzero_sd(const std::vector<double>& xs, const char* what) {
  double sd = sample_stddev(xs);
  if (sd == 0.0) throw Error(ErrorCode::ZeroVariance, std::string(what) + " have zero standard deviation");
  return sd;
}

double clamped_quantile(int k, int n, const char* what) {
  if (n < 1 || k < 0 || k > n)
    throw Error(ErrorCode::Domain, std::string(what) + ": need 0 <= count <= total and total >= 1");
  if (k == 0) return -kZClamp;
  if (k == n) return kZClamp;
  double p = static_cast<double>(k) / static_cast<double>(n);
  return std::clamp(inv_norm_cdf(p), -kZClamp, kZClamp);
}

}  // namespace

double z_task_time(const std::vector<double>& times, double ideal) {
  if (!(ideal > 0)) throw Error(ErrorCode::Domain, "ideal time must be positive");
  if (times.size() < 2) throw Error(ErrorCode::Domain, "need at least two task times");
  double sd = nonzero_sd(times, "task times");
  return (ideal - mean(times)) / sd;
}

double z_error_rate(int errors, int opportunities) { return clamped_quantile(errors, opportunities, "errors"); }

double z_completion(int completed, int attempted) { return clamped_quantile(completed, attempted, "completion"); }

double z_satisfaction(const std::vector<double>& ratings) {
  if (ratings.size() < 2) throw Error(ErrorCode::Domain, "need at least two ratings");
  for (double r : ratings) {
    if (!(r >= 1 && r <= 5)) throw Error(ErrorCode::Domain, "ratings must lie in [1, 5]");
  }
  double sd = nonzero_sd(ratings, "ratings");
  return (kRatingMidpoint - mean(ratings)) / sd;
}

SumScore sum_score(double z_time, double z_error, double z_completion, double z_satisfaction, const Weights& weights) {
  double total = 0;
  for (double w : weights) total += w;
  if (std::fabs(total - 1.0) > 1e-9) throw Error(ErrorCode::BadWeights, "weights sum to " + format_decimal(total));
  SumScore s{z_time, z_error, z_completion, z_satisfaction, weights, {}, 0};
  const double z[] = {z_time, z_error, z_completion, z_satisfaction};
  for (std::size_t i = 0; i < 4; ++i) {
    s.weighted[i] = weights[i] * z[i];
    s.sum += s.weighted[i];
  }
  return s;
}

SumReport compute(const SumInputs& in, const Weights& weights) {
  SumReport r;
  r.score = sum_score(z_task_time(in.task_times_s, in.ideal_time_s), z_error_rate(in.errors, in.error_opportunities),
                      z_completion(in.completed_tasks, in.attempted_tasks), z_satisfaction(in.ratings), weights);
  r.error_ratio = static_cast<double>(in.errors) / in.error_opportunities;
  r.completion_ratio = static_cast<double>(in.completed_tasks) / in.attempted_tasks;
  return r;
}

namespace {

std::vector<double> parse_list(std::string_view key, std::string_view v) {
  std::vector<double> out;
  while (true) {
    auto comma = v.find(',');
    auto item = trim(v.substr(0, comma));
    auto x = parse_decimal(item);
    if (!x) throw Error(ErrorCode::BadConfig, std::string(key) + ": '" + std::string(item) + "' is not a number");
    out.push_back(*x);
    if (comma == std::string_view::npos) break;
    v.remove_prefix(comma + 1);
  }
  return out;
}

int parse_count(std::string_view key, std::string_view v) {
  auto x = parse_integer(v);
  if (!x || *x < 0 || *x > 1'000'000'000)
    throw Error(ErrorCode::BadConfig, std::string(key) + ": '" + std::string(v) + "' is not a non-negative integer");
  return static_cast<int>(*x);
}

}  // namespace

ParsedInputs parse_inputs(std::string_view text) {
  std::map<std::string, std::string, std::less<>> kv;
  std::istringstream in{std::string(text)};
  std::string line;
  for (int no = 1; std::getline(in, line); ++no) {
    auto body = trim(std::string_view(line).substr(0, line.find('#')));
    if (body.empty()) continue;
    auto eq = body.find('=');
    if (eq == std::string_view::npos)
      throw Error(ErrorCode::BadConfig, "line " + std::to_string(no) + ": expected key=value");
    std::string key(trim(body.substr(0, eq)));
    if (kv.count(key)) throw Error(ErrorCode::BadConfig, "line " + std::to_string(no) + ": duplicate key " + key);
    kv[key] = std::string(trim(body.substr(eq + 1)));
  }

  auto need = [&](std::string_view key) -> const std::string& {
    auto it = kv.find(key);
    if (it == kv.end()) throw Error(ErrorCode::BadConfig, "missing key " + std::string(key));
    return it->second;
  };

  ParsedInputs p;
  p.inputs.task_times_s = parse_list("task_times", need("task_times"));
  auto ideal = parse_list("ideal_time", need("ideal_time"));
  if (ideal.size() != 1) throw Error(ErrorCode::BadConfig, "ideal_time: expected one value");
  p.inputs.ideal_time_s = ideal[0];
  p.inputs.errors = parse_count("errors", need("errors"));
  p.inputs.error_opportunities = parse_count("opportunities", need("opportunities"));
  p.inputs.completed_tasks = parse_count("completed", need("completed"));
  p.inputs.attempted_tasks = parse_count("attempted", need("attempted"));
  p.inputs.ratings = parse_list("ratings", need("ratings"));
  if (auto it = kv.find("weights"); it != kv.end()) {
    auto w = parse_list("weights", it->second);
    if (w.size() != 4) throw Error(ErrorCode::BadConfig, "weights: expected four values");
    std::copy(w.begin(), w.end(), p.weights.begin());
  }
  for (const auto& [key, _] : kv) {
    static const char* known[] = {"task_times", "ideal_time", "errors",  "opportunities",
                                  "completed",  "attempted",  "ratings", "weights"};
    if (std::find_if(std::begin(known), std::end(known), [&](const char* k) { return key == k; }) == std::end(known))
      throw Error(ErrorCode::BadConfig, "unknown key " + key);
  }
  return p;
}

std::string format_table(const SumReport& report) {
  const auto& s = report.score;
  const char* names[] = {"Task Time", "Error Rates", "Task Completion", "Satisfaction"};
  const double z[] = {s.z_time, s.z_error, s.z_completion, s.z_satisfaction};
  std::ostringstream out;
  char buf[128];
  std::snprintf(buf, sizeof buf, "%-16s %10s %8s %14s\n", "Metric", "Z-Value", "Weight", "Weighted Z");
  out << buf;
  for (int i = 0; i < 4; ++i) {
    std::snprintf(buf, sizeof buf, "%-16s %10.4f %8.4f %14.6f\n", names[i], z[i], s.weights[i], s.weighted[i]);
    out << buf;
  }
  std::snprintf(buf, sizeof buf, "%-16s %10s %8s %14.6f\n", "SUM", "", "", s.sum);
  out << buf;
  std::snprintf(buf, sizeof buf, "error ratio %.6f, completion ratio %.6f\n", report.error_ratio,
                report.completion_ratio);
  out << buf;
  return out.str();
}

}  // namespace tfp::sumscore
