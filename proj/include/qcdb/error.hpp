#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace qcdb {

/// Machine-readable error codes. Names mirror the module error names used by
/// the CLI and the HTTP service, so `to_string(code)` is part of the wire format.
enum class ErrorCode {
  InvalidInstruction,
  InvalidCircuit,
  DebugModeOff,
  PositionOutOfRange,
  UnknownGateKind,
  ParseError,
  MeasurementPresent,
  QubitCountMismatch,
  CapExceeded,
  MidCircuitMeasurement,
  NoMeasurements,
  InvalidSpec,
  InvalidCounts,
  SliceNotFound,
  PatternLengthMismatch,
  DomainMismatch,
  InvalidTestCase,
  IoError,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  [[nodiscard]] ErrorCode code() const noexcept { return code_; }

private:
  ErrorCode code_;
};

} // namespace qcdb
