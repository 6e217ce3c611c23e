// tfps: orchestration service. Without --runcenter-url the run center is
// embedded in the process.

#include <CLI11.hpp>

#include <iostream>

#include "tfp/error.hpp"
#include "tfp/runcenter.hpp"
#include "tfp/service.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Test-first performance service"};
  app.require_subcommand(1);
  auto* serve = app.add_subcommand("serve", "Serve POST /tfps and the result pages");
  int port = 8090;
  std::string host = "0.0.0.0";
  std::string data_dir = "tfps-data";
  std::string runcenter_url;
  std::string public_url;
  serve->add_option("--port", port)->capture_default_str();
  serve->add_option("--host", host)->capture_default_str();
  serve->add_option("--data-dir", data_dir)->capture_default_str();
  serve->add_option("--runcenter-url", runcenter_url, "Remote run center; embedded when omitted");
  serve->add_option("--public-url", public_url, "Base of detail URLs; derived from Host when omitted");
  CLI11_PARSE(app, argc, argv);

  try {
    std::shared_ptr<tfp::runcenter::Dispatcher> dispatcher;
    if (runcenter_url.empty())
      dispatcher = std::make_shared<tfp::runcenter::EmbeddedDispatcher>(tfp::runcenter::http_executor());
    else
      dispatcher = std::make_shared<tfp::runcenter::HttpDispatcher>(runcenter_url);
    tfp::service::Options options;
    options.data_dir = data_dir;
    options.public_base_url = public_url;
    tfp::service::Service service(options, dispatcher);
    std::cerr << "tfps listening on " << host << ":" << port << "\n";
    service.serve(host, port);
  } catch (const tfp::Error& e) {
    std::cerr << e.what() << "\n";
    return 1;
  }
  return 0;
}
