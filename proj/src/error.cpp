#include "tfp/error.hpp"

namespace tfp {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::NoSamples: return "E_NO_SAMPLES";
    case ErrorCode::EmptyUsername: return "E_EMPTY_USERNAME";
    case ErrorCode::InvalidEnvelope: return "E_INVALID_ENVELOPE";
    case ErrorCode::MalformedXml: return "E_MALFORMED_XML";
    case ErrorCode::Schema: return "E_SCHEMA";
    case ErrorCode::Field: return "E_FIELD";
    case ErrorCode::InvalidScript: return "E_INVALID_SCRIPT";
    case ErrorCode::BadConfig: return "E_BAD_CONFIG";
    case ErrorCode::EscapesRoot: return "E_ESCAPES_ROOT";
    case ErrorCode::EmptyStem: return "E_EMPTY_STEM";
    case ErrorCode::AlreadyScaffolded: return "E_ALREADY_SCAFFOLDED";
    case ErrorCode::Io: return "E_IO";
    case ErrorCode::Exists: return "E_EXISTS";
    case ErrorCode::NoTestCase: return "E_NO_TEST_CASE";
    case ErrorCode::NoMaster: return "E_NO_MASTER";
    case ErrorCode::Transport: return "E_TRANSPORT";
    case ErrorCode::PollTimeout: return "E_POLL_TIMEOUT";
    case ErrorCode::UnknownTask: return "E_UNKNOWN_TASK";
    case ErrorCode::TerminalRecord: return "E_TERMINAL_RECORD";
    case ErrorCode::TargetUnresolvable: return "E_TARGET_UNRESOLVABLE";
    case ErrorCode::IterationBudget: return "E_ITERATION_BUDGET";
    case ErrorCode::Domain: return "E_DOMAIN";
    case ErrorCode::ZeroVariance: return "E_ZERO_VARIANCE";
    case ErrorCode::BadWeights: return "E_BAD_WEIGHTS";
    case ErrorCode::PortInUse: return "E_PORT_IN_USE";
  }
  return "E_UNKNOWN";
}

Error::Error(ErrorCode code, const std::string& detail)
    : std::runtime_error(std::string(to_string(code)) + (detail.empty() ? "" : ": " + detail)),
      code_(code),
      detail_(detail) {}

}  // namespace tfp
