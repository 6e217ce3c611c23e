#include <gtest/gtest.h>

#include <algorithm>
#include <sstream>

#include "support.hpp"
#include "tfp/client.hpp"
#include "tfp/conventions.hpp"
#include "tfp/error.hpp"
#include "tfp/runcenter.hpp"
#include "tfp/service.hpp"
#include "tfp/validator.hpp"

using namespace tfp;
using namespace tfp::client;
using tfp::fixtures::MockTarget;
using tfp::fixtures::TempDir;
using namespace std::chrono_literals;

namespace {

struct Captured {
  std::ostringstream out, err;
  Console io() { return {out, err}; }
};

std::string script_for(const std::string& url, PerformanceCriteria c, std::optional<LoadProfile> load = LoadProfile{10, 2}) {
  return render_script({TestCase{url, HttpMethod::Get, std::nullopt}, c, load, std::nullopt});
}

void scaffold(const TempDir& d) {
  Captured c;
  ASSERT_EQ(cmd_init(d.path(), "alice", c.io()), kExitPass) << c.err.str();
}

void put_critical(const TempDir& d, const std::string& text, const std::string& service = "BookSearch.java") {
  auto path = resolve_critical(service, ProjectLayout{d.path()});
  std::filesystem::create_directories(path.parent_path());
  write_file_atomic(path, text);
}

int lines(const std::string& s) { return static_cast<int>(std::count(s.begin(), s.end(), '\n')); }

/// Records submissions and answers with a canned reply.
class StubService {
 public:
  explicit StubService(std::function<std::string(int)> reply_to_poll = {}) : poll_reply_(std::move(reply_to_poll)) {
    server_.Post("/tfps", [this](const httplib::Request& req, httplib::Response& res) {
      std::lock_guard lock(mu_);
      bodies_.push_back(req.body);
      res.set_content(post_reply_, std::string(protocol::kSoapContentType));
    });
    server_.Get(R"(/results/.*\.xml)", [this](const httplib::Request&, httplib::Response& res) {
      int n = ++polls_;
      res.set_content(poll_reply_(n), std::string(protocol::kSoapContentType));
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~StubService() {
    server_.stop();
    thread_.join();
  }
  void reply_with(std::string body) { post_reply_ = std::move(body); }
  std::string url() const { return "http://127.0.0.1:" + std::to_string(port_); }
  std::vector<std::string> bodies() {
    std::lock_guard lock(mu_);
    return bodies_;
  }
  int polls() const { return polls_.load(); }

 private:
  httplib::Server server_;
  std::thread thread_;
  int port_ = 0;
  std::mutex mu_;
  std::vector<std::string> bodies_;
  std::string post_reply_;
  std::function<std::string(int)> poll_reply_;
  std::atomic<int> polls_{0};
};

protocol::ResultEnvelope pending(const std::string& id) {
  protocol::ResultEnvelope r;
  r.task_id = id;
  r.status = ResultStatus::Pending;
  r.detail_url = "http://stub/results/" + id;
  return r;
}

}  // namespace

TEST(Init, PrintsTreeAndRefusesTwice) {
  TempDir d;
  Captured c;
  ASSERT_EQ(cmd_init(d.path(), "alice", c.io()), kExitPass);
  EXPECT_EQ(lines(c.out.str()), 4);
  EXPECT_TRUE(std::filesystem::exists(d / "TFP/app.id"));
  EXPECT_TRUE(std::filesystem::exists(d / "TFP/MasterPerformance.xml"));
  EXPECT_TRUE(std::filesystem::is_directory(d / "TFP/Critical"));
  auto id = read_app_id(ProjectLayout{d.path()});
  Captured again;
  EXPECT_EQ(cmd_init(d.path(), "bob", again.io()), kExitFilesystem);
  EXPECT_NE(again.err.str().find("E_ALREADY_SCAFFOLDED"), std::string::npos);
  EXPECT_EQ(read_app_id(ProjectLayout{d.path()}), id);
}

TEST(CreateTest, WritesTemplateOnce) {
  TempDir d;
  Captured none;
  EXPECT_EQ(cmd_create_test(d.path(), "BookSearch.java", none.io()), kExitFilesystem);
  scaffold(d);
  Captured c;
  ASSERT_EQ(cmd_create_test(d.path(), "src/BookSearch.java", c.io()), kExitPass) << c.err.str();
  auto path = d / "TFP/Critical/BookSearchPerformance.xml";
  ASSERT_TRUE(std::filesystem::exists(path));
  EXPECT_FALSE(has_errors(validate_script(read_file(path))));
  write_file_atomic(path, "edited");
  Captured twice;
  EXPECT_EQ(cmd_create_test(d.path(), "BookSearch.java", twice.io()), kExitFilesystem);
  EXPECT_NE(twice.err.str().find("E_EXISTS"), std::string::npos);
  EXPECT_EQ(read_file(path), "edited");
}

TEST(Validate, ExitCodesAndDiagnostics) {
  TempDir d;
  write_file_atomic(d / "good.xml", script_for("http://h/x", {3, 30, 1048576}));
  auto bad = script_for("http://h/x", {3, 30, 1048576});
  bad.replace(bad.find("<tps>30</tps>"), 13, "<tps>-1</tps>");
  write_file_atomic(d / "bad.xml", bad);

  Captured ok;
  EXPECT_EQ(cmd_validate({d / "good.xml"}, ok.io()), kExitPass);
  EXPECT_EQ(ok.err.str(), "");
  Captured err;
  EXPECT_EQ(cmd_validate({d / "good.xml", d / "bad.xml"}, err.io()), kExitValidation);
  EXPECT_NE(err.err.str().find("bad.xml: ERROR V6"), std::string::npos) << err.err.str();
  Captured missing;
  EXPECT_EQ(cmd_validate({d / "nope.xml"}, missing.io()), kExitValidation);
}

TEST(ResolveUrl, Precedence) {
  TempDir d;
  scaffold(d);
  write_file_atomic(d / "TFP/tfp.conf", "service_url = http://conf:1\n");
  unsetenv(kServiceUrlEnv);
  EXPECT_EQ(resolve_service_url(std::nullopt, d.path()), "http://conf:1");
  setenv(kServiceUrlEnv, "http://env:2", 1);
  EXPECT_EQ(resolve_service_url(std::nullopt, d.path()), "http://env:2");
  EXPECT_EQ(resolve_service_url("http://flag:3", d.path()), "http://flag:3");
  unsetenv(kServiceUrlEnv);
  TempDir empty;
  EXPECT_EQ(resolve_service_url(std::nullopt, empty.path()), std::nullopt);
}

TEST(Envelope, OverridesAndIdentity) {
  auto id = new_app_identity("alice");
  ClientConfig cfg;
  cfg.requests = 40;
  auto env = build_envelope(id, script_for("http://h/x", {3, 30, 1}), cfg, RunMode::Critical);
  EXPECT_EQ(env.application, id);
  EXPECT_EQ(env.load, (LoadProfile{40, 2}));
  EXPECT_FALSE(env.adaptive);
  cfg.concurrency = 41;
  try {
    build_envelope(id, script_for("http://h/x", {3, 30, 1}), cfg, RunMode::Critical);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::Field);
  }
  auto m = build_envelope(id, script_for("http://h/x", {3, 30, 1}), {}, RunMode::Master);
  EXPECT_EQ(m.adaptive, AdaptiveParams{});
}

class EndToEnd : public ::testing::Test {
 protected:
  EndToEnd()
      : target(MockTarget::fixed(20ms)),
        svc({data.path(), "", 120s}, std::make_shared<runcenter::EmbeddedDispatcher>()) {
    port = svc.start("127.0.0.1", 0);
    cfg.service_url = "http://127.0.0.1:" + std::to_string(port);
    scaffold(project);
  }

  MockTarget target;
  TempDir data, project;
  service::Service svc;
  int port = 0;
  ClientConfig cfg;
};

TEST_F(EndToEnd, CriticalPassAndFail) {
  put_critical(project, script_for(target.url(), {100, 1, 8}));
  Captured pass;
  ASSERT_EQ(cmd_run_critical(project.path(), "BookSearch.java", cfg, pass.io()), kExitPass) << pass.err.str();
  EXPECT_NE(pass.out.str().find("response: PASS"), std::string::npos);
  EXPECT_NE(pass.out.str().find("overall: PASS"), std::string::npos);
  auto at = pass.out.str().find("details: ");
  ASSERT_NE(at, std::string::npos);
  auto detail = pass.out.str().substr(at + 9);
  detail.pop_back();
  auto parsed = parse_url(detail);
  ASSERT_TRUE(parsed);
  httplib::Client c("127.0.0.1", port);
  auto page = c.Get(parsed->target);
  ASSERT_TRUE(page);
  EXPECT_EQ(page->status, 200);

  put_critical(project, script_for(target.url(), {5, 1, 8}));
  Captured fail;
  ASSERT_EQ(cmd_run_critical(project.path(), "BookSearch.java", cfg, fail.io()), kExitPerfFail) << fail.err.str();
  EXPECT_NE(fail.out.str().find("response: FAIL"), std::string::npos);
  EXPECT_NE(fail.out.str().find("tps: PASS"), std::string::npos);
  EXPECT_NE(fail.out.str().find("bps: PASS"), std::string::npos);
  EXPECT_NE(fail.out.str().find("overall: FAIL"), std::string::npos);
}

TEST_F(EndToEnd, MissingScript) {
  Captured c;
  EXPECT_EQ(cmd_run_critical(project.path(), "Nothing.java", cfg, c.io()), kExitMissingTest);
  EXPECT_NE(c.err.str().find("E_NO_TEST_CASE"), std::string::npos);
  EXPECT_EQ(c.out.str(), "");
  EXPECT_TRUE(svc.store().task_ids().empty());
}

TEST_F(EndToEnd, MasterAgainstRealService) {
  write_file_atomic(project / "TFP/MasterPerformance.xml",
                    render_script({TestCase{target.url(), HttpMethod::Get, std::nullopt},
                                   {100, 1, 8},
                                   std::nullopt,
                                   AdaptiveParams{1, 2, 3, 4}}));
  cfg.poll_interval = 50ms;
  Captured c;
  ASSERT_EQ(cmd_run_master(project.path(), cfg, c.io()), kExitPass) << c.err.str();
  EXPECT_NE(c.out.str().find("max sustainable concurrency: "), std::string::npos);
  EXPECT_NE(c.out.str().find("trace 1: concurrency 1"), std::string::npos);
  EXPECT_NE(c.out.str().find("search incomplete"), std::string::npos);
  EXPECT_NE(c.out.str().find("traces: 3"), std::string::npos);
}

TEST(Client, InvalidScriptIsNeverSent) {
  TempDir project;
  scaffold(project);
  StubService stub;
  auto bad = script_for("http://h/x", {3, 30, 1});
  bad.replace(bad.find("<method>GET</method>"), 20, "<method>PUT</method>");
  put_critical(project, bad);
  ClientConfig cfg;
  cfg.service_url = stub.url();
  Captured c;
  EXPECT_EQ(cmd_run_critical(project.path(), "BookSearch.java", cfg, c.io()), kExitValidation);
  EXPECT_NE(c.err.str().find("ERROR V4"), std::string::npos);
  EXPECT_NE(c.err.str().find("E_INVALID_SCRIPT"), std::string::npos);
  EXPECT_TRUE(stub.bodies().empty());
}

TEST(Client, UnreachableServiceOneLine) {
  TempDir project;
  scaffold(project);
  put_critical(project, script_for("http://h/x", {3, 30, 1}));
  ClientConfig cfg;
  cfg.service_url = fixtures::refused_url();
  cfg.timeout = 2s;
  Captured c;
  EXPECT_EQ(cmd_run_critical(project.path(), "BookSearch.java", cfg, c.io()), kExitTransport);
  EXPECT_EQ(lines(c.err.str()), 1) << c.err.str();
  EXPECT_EQ(c.err.str().rfind("E_TRANSPORT", 0), 0u);
  EXPECT_EQ(c.out.str(), "");
}

TEST(Client, EnvelopeCarriesProjectIdentity) {
  TempDir project;
  scaffold(project);
  put_critical(project, script_for("http://h/x", {3, 30, 1}));
  StubService stub;
  auto reply = pending(new_uuid());
  reply.status = ResultStatus::Failed;
  reply.error = "E_TRANSPORT: stub";
  stub.reply_with(protocol::encode_result(reply));
  ClientConfig cfg;
  cfg.service_url = stub.url();
  Captured c;
  EXPECT_EQ(cmd_run_critical(project.path(), "BookSearch.java", cfg, c.io()), kExitTransport);
  auto bodies = stub.bodies();
  ASSERT_EQ(bodies.size(), 1u);
  auto env = protocol::decode_request(bodies[0]).value;
  EXPECT_EQ(env.application, read_app_id(ProjectLayout{project.path()}));
  EXPECT_EQ(env.mode, RunMode::Critical);
  EXPECT_EQ(env.test_case.url, "http://h/x");
}

TEST(Client, MasterPollsUntilDone) {
  TempDir project;
  scaffold(project);
  write_file_atomic(project / "TFP/MasterPerformance.xml", script_for("http://h/x", {3, 30, 1}));
  auto id = new_uuid();
  StubService stub([&](int n) {
    auto r = pending(id);
    if (n < 3) return protocol::encode_result(r);
    MeasurementSummary s;
    s.mean_ms = s.p50_ms = s.p95_ms = 2;
    s.observed_tps = 40;
    s.observed_bps = 10;
    s.completed = 4;
    r.status = ResultStatus::Done;
    r.summary = s;
    r.verdict = evaluate(s, {3, 30, 1});
    r.max_sustainable = 1;
    r.traces.push_back({1, 1, s, Decision::Stop});
    return protocol::encode_result(r);
  });
  stub.reply_with(protocol::encode_result(pending(id)));
  ClientConfig cfg;
  cfg.service_url = stub.url();
  cfg.poll_interval = 10ms;
  Captured c;
  ASSERT_EQ(cmd_run_master(project.path(), cfg, c.io()), kExitPass) << c.err.str();
  EXPECT_EQ(stub.polls(), 3);
  EXPECT_NE(c.out.str().find("max sustainable concurrency: 1"), std::string::npos);
  EXPECT_NE(c.out.str().find("traces: 1"), std::string::npos);

  Captured missing;
  TempDir bare;
  scaffold(bare);
  std::filesystem::remove(bare / "TFP/MasterPerformance.xml");
  EXPECT_EQ(cmd_run_master(bare.path(), cfg, missing.io()), kExitMissingTest);
  EXPECT_NE(missing.err.str().find("E_NO_MASTER"), std::string::npos);
}

TEST(Client, MasterPollTimeout) {
  TempDir project;
  scaffold(project);
  write_file_atomic(project / "TFP/MasterPerformance.xml", script_for("http://h/x", {3, 30, 1}));
  auto id = new_uuid();
  StubService stub([&](int) { return protocol::encode_result(pending(id)); });
  stub.reply_with(protocol::encode_result(pending(id)));
  ClientConfig cfg;
  cfg.service_url = stub.url();
  cfg.poll_interval = 100ms;
  cfg.poll_timeout = 1s;
  Captured c;
  EXPECT_EQ(cmd_run_master(project.path(), cfg, c.io()), kExitTransport);
  EXPECT_NE(c.err.str().find("E_POLL_TIMEOUT"), std::string::npos);
  EXPECT_GE(stub.polls(), 5);
}

TEST(CoalescingProperty, BurstsCollapse) {
  // Every burst of notifies issued while a run is in flight leads to exactly
  // one follow-up run.
  for (int burst : {1, 2, 5, 50}) {
    std::atomic<int> runs{0};
    std::atomic<bool> release{false};
    CoalescingRunner r([&] {
      ++runs;
      while (!release.load()) std::this_thread::sleep_for(1ms);
    });
    r.notify();
    while (runs.load() == 0) std::this_thread::sleep_for(1ms);
    for (int i = 0; i < burst; ++i) r.notify();
    release = true;
    r.wait_idle();
    EXPECT_EQ(runs.load(), 2) << burst;
  }
}

TEST(CoalescingProperty, NeverOverlaps) {
  std::atomic<int> inside{0}, worst{0}, runs{0};
  {
    CoalescingRunner r([&] {
      int now = ++inside;
      worst = std::max(worst.load(), now);
      ++runs;
      std::this_thread::sleep_for(2ms);
      --inside;
    });
    std::vector<std::thread> ts;
    for (int t = 0; t < 4; ++t)
      ts.emplace_back([&] {
        for (int i = 0; i < 50; ++i) r.notify();
      });
    for (auto& t : ts) t.join();
    r.wait_idle();
  }
  EXPECT_EQ(worst.load(), 1);
  EXPECT_GE(runs.load(), 1);
  EXPECT_LE(runs.load(), 200);
}

TEST(Watch, RevalidatesOnChange) {
  TempDir d;
  auto path = d / "s.xml";
  write_file_atomic(path, script_for("http://h/x", {3, 30, 1}));
  std::ostringstream out, err;
  std::atomic<bool> stop{false};
  int code = -1;
  std::thread w([&] { code = cmd_watch({path}, {out, err}, stop, 20ms); });
  std::this_thread::sleep_for(300ms);
  write_file_atomic(path, "<broken");
  std::this_thread::sleep_for(300ms);
  stop = true;
  w.join();
  EXPECT_EQ(code, kExitValidation);
  auto text = out.str();
  auto ok = text.find(path.string() + ": ok");
  auto bad = text.find(path.string() + ": errors");
  ASSERT_NE(ok, std::string::npos) << text;
  ASSERT_NE(bad, std::string::npos) << text;
  EXPECT_LT(ok, bad);
  EXPECT_NE(err.str().find("ERROR V1"), std::string::npos);
}
