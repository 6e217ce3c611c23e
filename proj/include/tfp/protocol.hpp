#pragma once

// Wire documents exchanged between the tiers.
//
//   client  -> service    : SOAP 1.2 request envelope  (m:TFPService)
//   service -> client     : SOAP 1.2 result envelope   (m:TFPServiceResult)
//   service -> runcenter  : tfp:instructionSet, answered by tfp:measurement
//                           (critical) or tfp:outcome (master)
//
// Encoders are deterministic and refuse values that break a domain
// invariant (E_INVALID_ENVELOPE). Decoders raise E_MALFORMED_XML, E_SCHEMA
// (missing/duplicated/misplaced element, message names the offenders) or
// E_FIELD (bad value, message starts with the field name). Unknown elements
// inside the payload are skipped and reported as warnings.

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tfp/model.hpp"

namespace tfp::protocol {

inline constexpr std::string_view kSoapNs = "http://www.w3.org/2003/05/soap-envelope";
inline constexpr std::string_view kServiceNs = "urn:tfpaas:tfps:v1";
inline constexpr std::string_view kRunCenterNs = "urn:tfpaas:runcenter:v1";

inline constexpr std::string_view kSoapContentType = "application/soap+xml; charset=utf-8";
inline constexpr std::string_view kXmlContentType = "application/xml";

template <typename T>
struct Decoded {
  T value;
  std::vector<std::string> warnings;
};

struct TestEnvelope {
  ApplicationIdentity application;
  TestCase test_case;
  PerformanceCriteria criteria;
  std::optional<LoadProfile> load;
  RunMode mode = RunMode::Critical;
  std::optional<AdaptiveParams> adaptive;

  bool operator==(const TestEnvelope&) const = default;
};

struct ResultEnvelope {
  std::string task_id;
  ResultStatus status = ResultStatus::Pending;
  std::string detail_url;
  std::optional<TestVerdict> verdict;          // DONE only
  std::optional<MeasurementSummary> summary;   // DONE only
  std::optional<int> max_sustainable;          // master runs
  bool incomplete = false;
  std::vector<TraceRecord> traces;
  std::optional<std::string> error;            // FAILED only

  bool operator==(const ResultEnvelope&) const = default;
};

struct InstructionSet {
  std::string task_id;
  ApplicationIdentity identity;
  TestCase test_case;
  PerformanceCriteria criteria;
  LoadProfile profile;
  std::optional<AdaptiveParams> adaptive;  // present: run the adaptive loop

  bool operator==(const InstructionSet&) const = default;
};

std::string encode_request(const TestEnvelope& env);
Decoded<TestEnvelope> decode_request(std::string_view xml);

std::string encode_result(const ResultEnvelope& r);
Decoded<ResultEnvelope> decode_result(std::string_view xml);

std::string encode_instructions(const InstructionSet& i);
Decoded<InstructionSet> decode_instructions(std::string_view xml);

std::string encode_measurement(const Measurement& m);
Measurement decode_measurement(std::string_view xml);

std::string encode_outcome(const AdaptiveOutcome& o);
AdaptiveOutcome decode_outcome(std::string_view xml);

/// Liveness reply of the run center.
std::string encode_status(std::string_view state);
std::string decode_status(std::string_view xml);

/// Stored form of a task: a result envelope that also echoes the request and
/// carries the completion time. decode_result accepts it (with warnings).
std::string encode_record(const TestResultRecord& r);
TestResultRecord decode_record(std::string_view xml);

ResultEnvelope to_result_envelope(const TestResultRecord& r);

}  // namespace tfp::protocol
