#pragma once

// Test-script checking. A script is the shareable on-disk form of a test:
//
//   <tfp:testScript xmlns:tfp="urn:tfpaas:script:v1">
//     <case><url/><method/><message/>?</case>
//     <criteria><response/><tps/><bps/></criteria>
//     <load><requests/><concurrency/></load>?
//     <adaptive>...</adaptive>?           (master scripts)
//   </tfp:testScript>
//
// Child elements may be unqualified or in the script namespace. Identity is
// not part of the script; the client attaches it at submission.
//
// Rules:
//   V1 well-formed XML            V5 message present iff POST
//   V2 root and case/criteria     V6 response/tps/bps numeric and > 0
//   V3 url absolute http(s)       V7 load / adaptive parameters
//   V4 method GET or POST         V8 unknown elements, scheme added (warning)

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "tfp/error.hpp"
#include "tfp/model.hpp"

namespace tfp {

inline constexpr std::string_view kScriptNs = "urn:tfpaas:script:v1";

enum class Severity { Error, Warning };

struct Diagnostic {
  int rule = 0;  // 1..8
  Severity severity = Severity::Error;
  std::string locator;  // "element:line", or "line:N" for parse failures
  std::string message;

  bool operator==(const Diagnostic&) const = default;
};

/// V1..V7 are errors, V8 is a warning.
Severity severity_of_rule(int rule) noexcept;

/// "ERROR V5 message:4: GET must not carry a message"
std::string format_diagnostic(const Diagnostic& d);

struct TestScript {
  TestCase test_case;
  PerformanceCriteria criteria;
  std::optional<LoadProfile> load;
  std::optional<AdaptiveParams> adaptive;

  bool operator==(const TestScript&) const = default;
};

struct ParsedScript {
  TestScript script;
  std::vector<Diagnostic> warnings;
};

class InvalidScriptError : public Error {
 public:
  explicit InvalidScriptError(std::vector<Diagnostic> diagnostics);
  const std::vector<Diagnostic>& diagnostics() const noexcept { return diagnostics_; }

 private:
  std::vector<Diagnostic> diagnostics_;
};

/// Every problem in the text, errors and warnings, in document order. Never
/// throws for bad input.
std::vector<Diagnostic> validate_script(std::string_view text);

bool has_errors(const std::vector<Diagnostic>& diagnostics) noexcept;

/// Throws InvalidScriptError (E_INVALID_SCRIPT) carrying the error diagnostics.
ParsedScript parse_script(std::string_view text);

/// Canonical script text; validate_script reports nothing for it.
std::string render_script(const TestScript& script);

}  // namespace tfp
