#pragma once

// Summated usability metric: four z-standardized components combined by a
// weighted sum.

#include <array>
#include <string>
#include <string_view>
#include <vector>

namespace tfp::sumscore {

/// Bound of a printed standard normal table.
inline constexpr double kZClamp = 3.49;
/// Midpoint of the 1..5 rating scale.
inline constexpr double kRatingMidpoint = 3.0;

struct SumInputs {
  std::vector<double> task_times_s;
  double ideal_time_s = 0;
  int errors = 0;
  int error_opportunities = 1;
  int completed_tasks = 0;
  int attempted_tasks = 1;
  std::vector<double> ratings;
};

using Weights = std::array<double, 4>;
inline constexpr Weights kEqualWeights{0.25, 0.25, 0.25, 0.25};

struct SumScore {
  double z_time = 0;
  double z_error = 0;
  double z_completion = 0;
  double z_satisfaction = 0;
  Weights weights = kEqualWeights;
  Weights weighted{};
  double sum = 0;
};

/// Standard normal CDF.
double norm_cdf(double z);

/// Quantile of the standard normal. E_DOMAIN outside (0, 1).
double inv_norm_cdf(double p);

double mean(const std::vector<double>& xs);
/// n-1 denominator.
double sample_stddev(const std::vector<double>& xs);

/// (ideal - mean) / sd. E_DOMAIN for fewer than two times or ideal <= 0,
/// E_ZERO_VARIANCE for identical times.
double z_task_time(const std::vector<double>& times, double ideal);
/// Quantile of errors/opportunities, clamped to +-3.49.
double z_error_rate(int errors, int opportunities);
/// Quantile of completed/attempted, clamped to +-3.49.
double z_completion(int completed, int attempted);
/// (3 - mean) / sd over ratings in [1, 5].
double z_satisfaction(const std::vector<double>& ratings);

/// E_BAD_WEIGHTS unless the weights sum to 1 within 1e-9.
SumScore sum_score(double z_time, double z_error, double z_completion, double z_satisfaction,
                   const Weights& weights = kEqualWeights);

struct SumReport {
  SumScore score;
  /// errors / opportunities, before the quantile lookup.
  double error_ratio = 0;
  /// completed / attempted, before the quantile lookup.
  double completion_ratio = 0;
};

SumReport compute(const SumInputs& in, const Weights& weights = kEqualWeights);

/// key=value lines; '#' starts a comment. Keys: task_times, ideal_time,
/// errors, opportunities, completed, attempted, ratings, and optionally
/// weights. Throws E_BAD_CONFIG.
struct ParsedInputs {
  SumInputs inputs;
  Weights weights = kEqualWeights;
};
ParsedInputs parse_inputs(std::string_view text);

/// Four component rows and the SUM.
std::string format_table(const SumReport& report);

}  // namespace tfp::sumscore
