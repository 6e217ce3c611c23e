// tfpsum: summated usability score from a key=value observation file.

#include <CLI11.hpp>

#include <iostream>

#include "tfp/conventions.hpp"
#include "tfp/error.hpp"
#include "tfp/sumscore.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Summated usability metric"};
  std::string input;
  app.add_option("--input", input, "key=value observation file")->required();
  CLI11_PARSE(app, argc, argv);

  try {
    auto parsed = tfp::sumscore::parse_inputs(tfp::read_file(input));
    std::cout << tfp::sumscore::format_table(tfp::sumscore::compute(parsed.inputs, parsed.weights));
  } catch (const tfp::Error& e) {
    std::cerr << e.what() << "\n";
    return 2;
  }
  return 0;
}
