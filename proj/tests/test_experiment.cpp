#include <gtest/gtest.h>

#include <algorithm>
#include <functional>
#include <sstream>

#include "support.hpp"
#include "tfp/conventions.hpp"
#include "tfp/error.hpp"
#include "tfp/experiment.hpp"
#include "tfp/validator.hpp"

using namespace tfp;
using namespace tfp::experiment;
using tfp::fixtures::TempDir;

namespace {

std::vector<std::pair<int, double>> read_dat(const std::filesystem::path& p) {
  std::istringstream in(read_file(p));
  std::vector<std::pair<int, double>> out;
  int n;
  double ms;
  while (in >> n >> ms) out.emplace_back(n, ms);
  return out;
}

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

TEST(Config, Checks) {
  EXPECT_FALSE(check_config({}));
  ExperimentConfig c;
  c.request_counts = {};
  EXPECT_TRUE(check_config(c));
  c.request_counts = {5, 5};
  EXPECT_TRUE(check_config(c));
  c.request_counts = {0, 5};
  EXPECT_TRUE(check_config(c));
  c = {};
  c.repetitions = 0;
  EXPECT_TRUE(check_config(c));
  c = {};
  c.rest_delay_ms = -1;
  EXPECT_TRUE(check_config(c));
  EXPECT_EQ(code_of([&] { run_modes_experiment(c); }), ErrorCode::Field);
}

TEST(Counts, Parse) {
  EXPECT_EQ(parse_counts("5, 10,15"), (std::vector<int>{5, 10, 15}));
  EXPECT_EQ(code_of([] { parse_counts("5,,6"); }), ErrorCode::Field);
  EXPECT_EQ(code_of([] { parse_counts("-1"); }), ErrorCode::Field);
}

TEST(SampleScript, IsValid) { EXPECT_FALSE(has_errors(validate_script(sample_script()))); }

TEST(Services, InvalidScriptNeverReachesPluginService) {
  ExperimentConfig cfg;
  cfg.validation_delay_ms = 1;
  cfg.rest_delay_ms = 1;
  ModeServices s(cfg);
  EXPECT_TRUE(s.submit(Mode::PluginValidation, sample_script()));
  EXPECT_EQ(s.submissions(Mode::PluginValidation), 1);
  for (const char* bad : {"<broken", "<tfp:testScript xmlns:tfp=\"urn:tfpaas:script:v1\"/>"}) {
    EXPECT_FALSE(s.submit(Mode::PluginValidation, bad));
    EXPECT_FALSE(s.submit(Mode::CloudValidation, bad));
  }
  EXPECT_EQ(s.submissions(Mode::PluginValidation), 1);
  EXPECT_EQ(s.submissions(Mode::CloudValidation), 2);
  EXPECT_TRUE(s.submit(Mode::CloudValidation, sample_script()));
}

TEST(Services, PortInUse) {
  ExperimentConfig cfg;
  ModeServices first(cfg);
  cfg.cloud_port = first.port(Mode::CloudValidation);
  EXPECT_EQ(code_of([&] { ModeServices second(cfg); }), ErrorCode::PortInUse);
}

TEST(Run, SmallRunShape) {
  ExperimentConfig cfg;
  cfg.request_counts = {1, 3};
  cfg.validation_delay_ms = 5;
  cfg.rest_delay_ms = 1;
  cfg.repetitions = 1;
  auto rows = run_modes_experiment(cfg);
  ASSERT_EQ(rows.size(), 4u);
  EXPECT_EQ(rows[0].mode, Mode::CloudValidation);
  EXPECT_EQ(rows[1].mode, Mode::PluginValidation);
  EXPECT_EQ(rows[2].n_requests, 3);
  // three validated submissions at >= 6 ms each
  EXPECT_GE(rows[2].total_time_ms, 18.0);
  EXPECT_GT(rows[2].total_time_ms, rows[3].total_time_ms);
}

TEST(Plot, FilesSortedAndDeterministic) {
  std::vector<ExperimentRow> rows = {{10, Mode::CloudValidation, 600.5},
                                     {5, Mode::PluginValidation, 50.25},
                                     {5, Mode::CloudValidation, 300},
                                     {10, Mode::PluginValidation, 100}};
  TempDir d;
  auto files = emit_plot_files(rows, d / "out/nested");
  ASSERT_EQ(files.size(), 3u);
  EXPECT_EQ(read_dat(files[0]), (std::vector<std::pair<int, double>>{{5, 300}, {10, 600.5}}));
  EXPECT_EQ(read_dat(files[1]), (std::vector<std::pair<int, double>>{{5, 50.25}, {10, 100}}));
  auto gp = read_file(files[2]);
  EXPECT_NE(gp.find("'cloud.dat'"), std::string::npos);
  EXPECT_NE(gp.find("'plugin.dat'"), std::string::npos);

  std::vector<std::string> first;
  for (const auto& f : files) first.push_back(read_file(f));
  std::reverse(rows.begin(), rows.end());
  auto again = emit_plot_files(rows, d / "out/nested");
  for (std::size_t i = 0; i < again.size(); ++i) EXPECT_EQ(read_file(again[i]), first[i]);

  EXPECT_EQ(code_of([&] { emit_plot_files({}, d.path()); }), ErrorCode::Field);
  write_file_atomic(d / "file", "x");
  EXPECT_EQ(code_of([&] { emit_plot_files(rows, d / "file"); }), ErrorCode::Io);
}
