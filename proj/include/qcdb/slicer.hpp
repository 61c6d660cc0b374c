#pragma once

#include "qcdb/circuit.hpp"

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace qcdb {

enum class SliceMode { Standalone, Accumulated };

std::string_view to_string(SliceMode mode);
/// "standalone" (alias "mini") or "accumulated". Throws Error(InvalidSpec).
SliceMode slice_mode_from_name(std::string_view name);

struct Slice {
  std::size_t index = 0;
  SliceMode mode = SliceMode::Standalone;
  Circuit circuit;
  /// qubit_map[local] = original (register, index) in the source circuit.
  std::vector<BitRef> qubit_map;
  /// Source qubits dropped by hslice, in the order they were removed.
  std::vector<BitRef> removed_qubits;
};

struct VSliceResult {
  std::vector<Slice> slices;
  std::vector<std::string> warnings;
};

/// Cuts at every breakbarrier: b markers give b+1 slices. Empty slices (marker
/// at either end, or adjacent markers) are kept and reported in `warnings`.
VSliceResult vslice(const Circuit& circuit, SliceMode mode);

/// Drops qubits touched by no gate or measurement. Registers that lose qubits
/// shrink and are renumbered densely; fully unused registers disappear.
/// Barriers are restricted to surviving qubits. Classical registers are kept.
Slice hslice(const Slice& slice);

/// Flat indices of qubits touched by a gate or measurement (barriers excluded).
std::vector<std::size_t> used_qubits(const Circuit& circuit);

enum class Behaviour { PseudoClassical, FullQuantum };
enum class Complexity { Simple, Complex };

std::string_view to_string(Behaviour b);
std::string_view to_string(Complexity c);

enum class GateClass { Permutation, DiagonalPhase, Mixing, None };

/// None for measure, barrier and breakbarrier.
GateClass gate_class(GateKind kind);

struct Thresholds {
  std::size_t max_simple_qubits = 5;
  std::size_t max_simple_gates = 20;
};

struct GateClassCounts {
  std::size_t permutation = 0;
  std::size_t diagonal_phase = 0;
  std::size_t mixing = 0;

  [[nodiscard]] std::size_t total() const { return permutation + diagonal_phase + mixing; }
};

struct SliceCategory {
  Behaviour behaviour = Behaviour::PseudoClassical;
  Complexity complexity = Complexity::Simple;
  GateClassCounts evidence;
  std::size_t used_qubits = 0;
  /// Gates counted by evidence (measure and barriers excluded).
  std::size_t gate_count = 0;
};

/// Throws Error(InvalidSpec) for zero thresholds.
SliceCategory categorize(const Slice& slice, const Thresholds& thresholds = {});

/// "<stem>.slice<k>.qasm"
std::string slice_file_name(std::string_view stem, std::size_t index);

/// QASM for the slice with header comments recording mode, index and qubit_map.
std::string emit_slice(const Slice& slice);

} // namespace qcdb
