#pragma once

#include "qcdb/qasm.hpp"
#include "qcdb/sim.hpp"
#include "qcdb/slicer.hpp"
#include "qcdb/stateprep.hpp"
#include "qcdb/testkit.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace qcdb {

struct SessionConfig {
  Thresholds thresholds;
  std::uint64_t seed = 0;
  std::uint64_t shots = 1024;
  std::size_t qubit_cap = kDefaultQubitCap;
};

struct RunRequest {
  std::optional<std::size_t> slice; // nullopt = full circuit
  StateSpec init;
  /// Sampling when set; required if the target measures.
  std::optional<std::uint64_t> shots;
  std::optional<std::uint64_t> seed;
};

using RunResult = std::variant<StateVector, CountsMap>;

/// Debugger state shared by the REPL and the HTTP service. Every mutation
/// re-derives the slice list, so slices never refer to stale breakbarriers.
/// Not thread-safe; callers serialise access.
class Session {
public:
  Session();

  /// Parses QASM text. On success replaces the circuit and returns warnings;
  /// on failure throws Error(ParseError) and leaves the session unchanged.
  std::vector<qasm::ParseDiagnostic> load_source(std::string_view text, std::string name);
  std::vector<qasm::ParseDiagnostic> load_file(const std::string& path);

  [[nodiscard]] bool loaded() const { return circuit_.has_value(); }
  /// Throws Error(InvalidCircuit) when nothing is loaded.
  [[nodiscard]] const Circuit& circuit() const;
  [[nodiscard]] const std::string& name() const { return name_; }

  void add_breakbarrier(std::size_t position);
  void remove_breakbarrier(std::size_t k);

  void set_mode(SliceMode mode);
  [[nodiscard]] SliceMode mode() const { return mode_; }
  [[nodiscard]] const std::vector<Slice>& slices() const { return slices_; }
  [[nodiscard]] const std::vector<std::string>& slice_warnings() const { return warnings_; }
  /// Throws Error(SliceNotFound).
  [[nodiscard]] const Slice& slice(std::size_t k) const;

  /// Replaces slice k by its horizontal slice (kept until the next re-slice).
  const Slice& hslice(std::size_t k);
  [[nodiscard]] SliceCategory categorize(std::size_t k) const;
  [[nodiscard]] DiffusionReport diffusion(std::size_t k) const;

  RunResult run(const RunRequest& request);
  [[nodiscard]] const std::optional<RunResult>& last_result() const { return last_result_; }

  /// Writes one file per slice into `dir`; returns the paths written.
  std::vector<std::string> export_slices(const std::string& dir) const;

  SessionConfig& config() { return config_; }
  [[nodiscard]] const SessionConfig& config() const { return config_; }

  /// Target circuit for a run: slice k, or the full circuit without markers.
  [[nodiscard]] Circuit target(std::optional<std::size_t> slice) const;

private:
  void reslice();

  std::optional<Circuit> circuit_;
  std::string name_;
  SliceMode mode_ = SliceMode::Standalone;
  std::vector<Slice> slices_;
  std::vector<std::string> warnings_;
  std::optional<RunResult> last_result_;
  SessionConfig config_;
};

struct CommandResult {
  std::string output;
  int status = 0; // 0 ok, 1 command failed, 2 usage error
  bool quit = false;
};

/// One REPL command. Never throws; errors become output with nonzero status.
/// The session is only modified when the command succeeds.
CommandResult execute_command(Session& session, std::string_view line);

/// Splits a command line on whitespace. Single or double quotes group words;
/// a word starting with '{' runs until its braces balance, so JSON specs need
/// no quoting.
std::vector<std::string> tokenize_command(std::string_view line);

std::string help_text();

/// Numbered instruction listing with breakbarrier markers.
std::string render_listing(const Circuit& circuit);

} // namespace qcdb
