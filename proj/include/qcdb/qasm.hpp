#pragma once

#include "qcdb/circuit.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace qcdb::qasm {

struct SourceSpan {
  std::string file;
  int line = 1;
  int column = 1;
  int length = 1;
};

enum class Severity { Error, Warning };

struct ParseDiagnostic {
  Severity severity = Severity::Error;
  SourceSpan span;
  std::string message;

  /// "file:line:col: error: message"
  [[nodiscard]] std::string str() const;
};

struct ParseResult {
  std::optional<Circuit> circuit;
  std::vector<ParseDiagnostic> diagnostics;

  [[nodiscard]] bool ok() const { return circuit.has_value(); }
  [[nodiscard]] std::vector<ParseDiagnostic> errors() const;
  [[nodiscard]] std::vector<ParseDiagnostic> warnings() const;
};

/// Parses the supported OpenQASM 2.0 subset. Recognised directive comments:
///   //@break          next statement must be a full-width barrier; it becomes a breakbarrier
///   //@ext <gate>     marks an extension gate (mcx); informational
///   //@context <txt>  routine label recorded in provenance of following statements
/// Any error diagnostic suppresses the circuit. Parsed circuits are in debug mode.
ParseResult parse(std::string_view source, std::string_view file = "<input>");

/// parse(), but throws Error(ParseError) listing every error diagnostic.
Circuit parse_or_throw(std::string_view source, std::string_view file = "<input>");

/// Reads and parses a .qasm file; provenance records the path as given.
Circuit load_file(const std::filesystem::path& path);

struct EmitOptions {
  /// Emitted as `// ...` lines directly after the header.
  std::vector<std::string> header_comments;
};

/// Canonical QASM text. Breakbarriers are written as `//@break` followed by a
/// register-wide barrier; mcx statements are preceded by `//@ext mcx`.
std::string emit(const Circuit& circuit, const EmitOptions& options = {});

} // namespace qcdb::qasm
