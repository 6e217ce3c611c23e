#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "tfp/error.hpp"
#include "tfp/sumscore.hpp"

using namespace tfp;
using tfp::fixtures::phi_simpson;
using namespace tfp::sumscore;

namespace {

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::Io;
}

}  // namespace

TEST(InvNorm, KnownQuantiles) {
  EXPECT_NEAR(inv_norm_cdf(0.5), 0.0, 1e-12);
  EXPECT_NEAR(inv_norm_cdf(0.975), 1.959964, 1e-4);
  EXPECT_NEAR(inv_norm_cdf(0.0002), -3.54, 0.01);
}

TEST(InvNorm, DomainErrors) {
  for (double p : {0.0, 1.0, -0.1, 1.5, std::nan("")}) EXPECT_EQ(code_of([&] { inv_norm_cdf(p); }), ErrorCode::Domain);
}

TEST(InvNorm, AgreesWithIntegratedCdf) {
  for (int i = 0; i < 200; ++i) {
    double p = 1e-4 + (1 - 2e-4) * (i + 0.5) / 200;
    ASSERT_LT(std::fabs(phi_simpson(inv_norm_cdf(p)) - p), 1e-6) << p;
  }
}

TEST(InvNorm, MonotoneAndAntisymmetric) {
  double prev = -INFINITY;
  for (int i = 1; i < 10000; ++i) {
    double p = i / 10000.0;
    double z = inv_norm_cdf(p);
    ASSERT_GT(z, prev);
    ASSERT_NEAR(z, -inv_norm_cdf(1 - p), 1e-6);
    prev = z;
  }
}

TEST(TaskTime, Examples) {
  EXPECT_NEAR(z_task_time({10, 14}, 12), 0.0, 1e-12);
  EXPECT_NEAR(z_task_time({8, 12}, 14), 1.414214, 1e-6);
  EXPECT_EQ(code_of([] { z_task_time({10, 10}, 12); }), ErrorCode::ZeroVariance);
  EXPECT_EQ(code_of([] { z_task_time({10}, 12); }), ErrorCode::Domain);
  EXPECT_EQ(code_of([] { z_task_time({10, 11}, 0); }), ErrorCode::Domain);
}

TEST(ErrorRate, Examples) {
  EXPECT_DOUBLE_EQ(z_error_rate(0, 1), -3.49);
  EXPECT_DOUBLE_EQ(z_error_rate(0, 17), -3.49);
  EXPECT_DOUBLE_EQ(z_error_rate(5, 5), 3.49);
  EXPECT_NEAR(z_error_rate(1, 2), 0.0, 1e-12);
  EXPECT_EQ(code_of([] { z_error_rate(3, 2); }), ErrorCode::Domain);
  EXPECT_EQ(code_of([] { z_error_rate(0, 0); }), ErrorCode::Domain);
  EXPECT_EQ(code_of([] { z_error_rate(-1, 2); }), ErrorCode::Domain);
}

TEST(Completion, Examples) {
  EXPECT_DOUBLE_EQ(z_completion(9, 9), 3.49);
  EXPECT_NEAR(z_completion(2, 4), 0.0, 1e-12);
  EXPECT_DOUBLE_EQ(z_completion(0, 4), -3.49);
  EXPECT_NEAR(z_completion(1, 10000), -3.49, 1e-12);  // clamps inside the domain too
}

TEST(Completion, AntisymmetricWithErrorRate) {
  for (int n = 1; n <= 60; ++n) {
    for (int e = 0; e <= n; ++e) ASSERT_NEAR(z_error_rate(e, n), -z_completion(n - e, n), 1e-9) << e << "/" << n;
  }
}

TEST(Satisfaction, Examples) {
  EXPECT_NEAR(z_satisfaction({3, 3, 2, 4}), 0.0, 1e-12);
  EXPECT_NEAR(z_satisfaction({4, 4, 5, 5}), -2.598, 1e-3);
  EXPECT_EQ(code_of([] { z_satisfaction({4, 4}); }), ErrorCode::ZeroVariance);
  EXPECT_EQ(code_of([] { z_satisfaction({4, 6}); }), ErrorCode::Domain);
}

TEST(Sum, TableTwo) {
  auto s = sum_score(1.58, -3.49, 3.49, -3.25);
  EXPECT_NEAR(s.weighted[0], 0.395, 1e-9);
  EXPECT_NEAR(s.weighted[1], -0.8725, 1e-9);
  EXPECT_NEAR(s.weighted[2], 0.8725, 1e-9);
  EXPECT_NEAR(s.weighted[3], -0.8125, 1e-9);
  EXPECT_NEAR(s.sum, -0.4175, 1e-9);
}

TEST(Sum, DegenerateWeights) {
  EXPECT_DOUBLE_EQ(sum_score(0, 0, 0, 0).sum, 0.0);
  EXPECT_DOUBLE_EQ(sum_score(1.58, -3.49, 3.49, -3.25, {1, 0, 0, 0}).sum, 1.58);
  EXPECT_EQ(code_of([] { sum_score(1, 1, 1, 1, {0.5, 0.5, 0.5, 0}); }), ErrorCode::BadWeights);
}

TEST(Sum, LinearInEachInput) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-4, 4);
  for (int i = 0; i < 1000; ++i) {
    double z[4] = {u(rng), u(rng), u(rng), u(rng)};
    double a = u(rng), b = u(rng);
    for (int k = 0; k < 4; ++k) {
      double za[4] = {z[0], z[1], z[2], z[3]}, zb[4] = {z[0], z[1], z[2], z[3]}, zab[4] = {z[0], z[1], z[2], z[3]};
      za[k] = a;
      zb[k] = b;
      zab[k] = a + b;
      auto f = [](double* v) { return sum_score(v[0], v[1], v[2], v[3]).sum; };
      double zero[4] = {z[0], z[1], z[2], z[3]};
      zero[k] = 0;
      ASSERT_NEAR(f(zab) - f(zero), (f(za) - f(zero)) + (f(zb) - f(zero)), 1e-12);
    }
  }
}

TEST(Inputs, ParseAndCompute) {
  auto p = parse_inputs(
      "# study\ntask_times = 8, 12\nideal_time=14\nerrors=0\nopportunities=1\ncompleted=5\nattempted=5\n"
      "ratings=4,4,5,5\n");
  EXPECT_EQ(p.inputs.task_times_s, (std::vector<double>{8, 12}));
  EXPECT_EQ(p.weights, kEqualWeights);
  auto r = compute(p.inputs, p.weights);
  EXPECT_NEAR(r.score.z_time, 1.414214, 1e-6);
  EXPECT_DOUBLE_EQ(r.score.z_error, -3.49);
  EXPECT_DOUBLE_EQ(r.score.z_completion, 3.49);
  EXPECT_DOUBLE_EQ(r.error_ratio, 0.0);
  EXPECT_DOUBLE_EQ(r.completion_ratio, 1.0);
  auto table = format_table(r);
  EXPECT_NE(table.find("SUM"), std::string::npos);
  EXPECT_NE(table.find("Error Rates"), std::string::npos);
}

TEST(Inputs, Rejections) {
  EXPECT_EQ(code_of([] { parse_inputs("task_times=1,2\n"); }), ErrorCode::BadConfig);
  EXPECT_EQ(code_of([] { parse_inputs("garbage\n"); }), ErrorCode::BadConfig);
  EXPECT_EQ(code_of([] {
              parse_inputs("task_times=1,x\nideal_time=1\nerrors=0\nopportunities=1\ncompleted=1\nattempted=1\n"
                           "ratings=1,2\n");
            }),
            ErrorCode::BadConfig);
}
