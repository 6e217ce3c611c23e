#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace tfp {

enum class ErrorCode {
  NoSamples,
  EmptyUsername,
  InvalidEnvelope,
  MalformedXml,
  Schema,
  Field,
  InvalidScript,
  BadConfig,
  EscapesRoot,
  EmptyStem,
  AlreadyScaffolded,
  Io,
  Exists,
  NoTestCase,
  NoMaster,
  Transport,
  PollTimeout,
  UnknownTask,
  TerminalRecord,
  TargetUnresolvable,
  IterationBudget,
  Domain,
  ZeroVariance,
  BadWeights,
  PortInUse,
};

/// Stable identifier, e.g. "E_MALFORMED_XML".
std::string_view to_string(ErrorCode code) noexcept;

/// Every failure surfaced by the library. The code is the contract; the
/// message is for humans and always starts with the code name.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& detail);

  ErrorCode code() const noexcept { return code_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorCode code_;
  std::string detail_;
};

}  // namespace tfp
