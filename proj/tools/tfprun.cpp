// tfprun: remote run center.

#include <CLI11.hpp>

#include <iostream>

#include "tfp/error.hpp"
#include "tfp/runcenter.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Test-first performance run center"};
  app.require_subcommand(1);
  auto* serve = app.add_subcommand("serve", "Serve POST /execute and GET /status");
  int port = 8091;
  std::string host = "0.0.0.0";
  serve->add_option("--port", port)->capture_default_str();
  serve->add_option("--host", host)->capture_default_str();
  CLI11_PARSE(app, argc, argv);

  try {
    tfp::runcenter::Server server(tfp::runcenter::http_executor());
    std::cerr << "tfprun listening on " << host << ":" << port << "\n";
    server.serve(host, port);
  } catch (const tfp::Error& e) {
    std::cerr << e.what() << "\n";
    return 1;
  }
  return 0;
}
