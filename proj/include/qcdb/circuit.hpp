#pragma once

#include "qcdb/error.hpp"

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace qcdb {

enum class GateKind : std::uint8_t {
  X,
  Y,
  Z,
  H,
  S,
  Sdg,
  T,
  Tdg,
  RX,
  RY,
  RZ,
  P,
  U,
  CX,
  CZ,
  CP,
  Swap,
  CCX,
  MCX,
  Measure,
  Barrier,
  Breakbarrier,
};

/// Every kind in declaration order.
std::span<const GateKind> all_gate_kinds();

std::string_view gate_name(GateKind kind);
std::optional<GateKind> gate_kind_from_name(std::string_view name);

struct GateArity {
  std::size_t min_qubits;
  std::size_t max_qubits; // SIZE_MAX for variadic kinds
  std::size_t params;
};

GateArity arity(GateKind kind);

/// True for kinds that act unitarily on amplitudes (everything except
/// measure, barrier and breakbarrier).
bool is_unitary(GateKind kind);

/// A (register, index) reference to a qubit or classical bit.
struct BitRef {
  std::string reg;
  std::size_t index = 0;

  [[nodiscard]] std::string str() const;
  auto operator<=>(const BitRef&) const = default;
};

/// Where a gate entered the circuit. Parsed files carry the statement's
/// source location; builder-constructed gates carry a caller label or the
/// synthetic "unknown:0:0" tag.
struct Provenance {
  std::string file = "unknown";
  int line = 0;
  int column = 0;
  std::string context;
  /// Source text of the statement, shown under each site by gate_loc.
  /// Not part of site identity.
  std::string snippet;

  static Provenance unknown() { return {}; }
  static Provenance label(std::string text);

  [[nodiscard]] bool is_synthetic() const { return line == 0; }
  /// "file:line:column"
  [[nodiscard]] std::string tag() const;

  [[nodiscard]] bool same_site(const Provenance& other) const {
    return file == other.file && line == other.line &&
           column == other.column && context == other.context;
  }
};

/// One validated instruction. The constructor enforces the kind's arity and
/// parameter count, distinct qubit operands, and clbit pairing for measure.
class GateInstruction {
public:
  GateInstruction(GateKind kind, std::vector<double> params,
                  std::vector<BitRef> qubits, std::vector<BitRef> clbits = {},
                  Provenance provenance = {});

  [[nodiscard]] GateKind kind() const { return kind_; }
  [[nodiscard]] const std::vector<double>& params() const { return params_; }
  [[nodiscard]] const std::vector<BitRef>& qubits() const { return qubits_; }
  [[nodiscard]] const std::vector<BitRef>& clbits() const { return clbits_; }
  [[nodiscard]] const Provenance& provenance() const { return provenance_; }

  [[nodiscard]] GateInstruction with_provenance(Provenance p) const;
  [[nodiscard]] GateInstruction with_qubits(std::vector<BitRef> qubits) const;

  /// Equality of kind, params and operands; provenance is ignored.
  [[nodiscard]] bool same_operation(const GateInstruction& other) const;

  /// QASM statement text without trailing semicolon, e.g. "cp(0.5) q[1],q[0]".
  /// Breakbarriers render as "barrier ...".
  [[nodiscard]] std::string to_qasm() const;

private:
  GateKind kind_;
  std::vector<double> params_;
  std::vector<BitRef> qubits_;
  std::vector<BitRef> clbits_;
  Provenance provenance_;
};

struct QuantumRegister {
  std::string name;
  std::size_t size = 0;
  bool operator==(const QuantumRegister&) const = default;
};

struct ClassicalRegister {
  std::string name;
  std::size_t size = 0;
  bool operator==(const ClassicalRegister&) const = default;
};

struct BreakbarrierMarker {
  std::size_t position;
  std::vector<BitRef> span;
};

/// Immutable circuit value. Qubits are flattened in register declaration
/// order; flat qubit 0 is the least significant bit of a basis index.
class Circuit {
public:
  Circuit() = default;
  Circuit(std::vector<QuantumRegister> qregs, std::vector<ClassicalRegister> cregs,
          std::vector<GateInstruction> instructions, bool debug_mode = false);

  [[nodiscard]] const std::vector<QuantumRegister>& qregs() const { return qregs_; }
  [[nodiscard]] const std::vector<ClassicalRegister>& cregs() const { return cregs_; }
  [[nodiscard]] const std::vector<GateInstruction>& instructions() const {
    return instructions_;
  }
  [[nodiscard]] bool debug_mode() const { return debug_mode_; }

  [[nodiscard]] std::size_t num_qubits() const { return num_qubits_; }
  [[nodiscard]] std::size_t num_clbits() const { return num_clbits_; }

  [[nodiscard]] std::size_t qubit_index(const BitRef& ref) const;
  [[nodiscard]] std::size_t clbit_index(const BitRef& ref) const;
  [[nodiscard]] BitRef qubit_at(std::size_t flat) const;
  [[nodiscard]] BitRef clbit_at(std::size_t flat) const;
  [[nodiscard]] std::vector<BitRef> all_qubits() const;

  [[nodiscard]] const QuantumRegister* find_qreg(std::string_view name) const;
  [[nodiscard]] const ClassicalRegister* find_creg(std::string_view name) const;

  [[nodiscard]] std::vector<BreakbarrierMarker> breakbarriers() const;
  [[nodiscard]] bool has_measurements() const;
  /// Instructions excluding barrier and breakbarrier markers.
  [[nodiscard]] std::size_t gate_count() const;

  /// Same registers and debug flag, new instruction list.
  [[nodiscard]] Circuit with_instructions(std::vector<GateInstruction> instructions) const;

private:
  std::vector<QuantumRegister> qregs_;
  std::vector<ClassicalRegister> cregs_;
  std::vector<GateInstruction> instructions_;
  bool debug_mode_ = false;
  std::size_t num_qubits_ = 0;
  std::size_t num_clbits_ = 0;
};

/// Instruction-for-instruction equality, provenance excluded.
bool same_instructions(std::span<const GateInstruction> a,
                       std::span<const GateInstruction> b);

Circuit start_debug(const Circuit& circuit);
Circuit insert_breakbarrier(const Circuit& circuit, std::size_t position,
                            Provenance provenance = {});
/// Removes the k-th breakbarrier (0-based, in circuit order).
Circuit remove_breakbarrier(const Circuit& circuit, std::size_t k);
Circuit strip_breakbarriers(const Circuit& circuit);

struct SiteCount {
  Provenance site;
  std::size_t occurrences = 0;
};

struct GateStats {
  std::size_t total = 0;
  std::vector<SiteCount> sites; // order of first appearance
};

using GateInfo = std::map<GateKind, GateStats>;

/// Per-kind totals with occurrences aggregated by provenance site.
/// Breakbarrier markers are not gates and are not reported.
GateInfo gate_info(const Circuit& circuit);

/// Human-readable provenance report for one gate kind.
/// Throws Error(UnknownGateKind) for names outside the supported set.
std::string gate_loc(const Circuit& circuit, std::string_view kind);

/// Incremental construction for programmatic circuits. Register-wide
/// applications expand to one instruction per qubit sharing one provenance.
class CircuitBuilder {
public:
  CircuitBuilder& qreg(std::string name, std::size_t size);
  CircuitBuilder& creg(std::string name, std::size_t size);
  CircuitBuilder& start_debug();

  CircuitBuilder& gate(GateKind kind, std::vector<BitRef> qubits,
                       std::vector<double> params = {},
                       std::optional<Provenance> provenance = std::nullopt);
  /// Applies a single-qubit kind to every qubit of `reg`.
  CircuitBuilder& broadcast(GateKind kind, const std::string& reg,
                            std::vector<double> params = {},
                            std::optional<Provenance> provenance = std::nullopt);
  CircuitBuilder& measure(BitRef qubit, BitRef clbit,
                          std::optional<Provenance> provenance = std::nullopt);
  CircuitBuilder& measure_register(const std::string& qreg, const std::string& creg,
                                   std::optional<Provenance> provenance = std::nullopt);
  CircuitBuilder& barrier(std::vector<BitRef> qubits);
  /// Throws Error(DebugModeOff) before start_debug().
  CircuitBuilder& breakbarrier(std::optional<Provenance> provenance = std::nullopt);

  [[nodiscard]] Circuit build() const;

private:
  Provenance resolve(std::optional<Provenance> provenance) const;
  std::size_t qreg_size(const std::string& name) const;

  std::vector<QuantumRegister> qregs_;
  std::vector<ClassicalRegister> cregs_;
  std::vector<GateInstruction> instructions_;
  bool debug_mode_ = false;
};

} // namespace qcdb
