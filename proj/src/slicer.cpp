#include "qcdb/slicer.hpp"

#include "qcdb/qasm.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <map>

namespace qcdb {

std::string_view to_string(SliceMode mode) {
  return mode == SliceMode::Standalone ? "standalone" : "accumulated";
}

SliceMode slice_mode_from_name(std::string_view name) {
  if (name == "standalone" || name == "mini") {
    return SliceMode::Standalone;
  }
  if (name == "accumulated") {
    return SliceMode::Accumulated;
  }
  throw Error(ErrorCode::InvalidSpec,
              fmt::format("unknown slicing mode '{}' (standalone, mini, accumulated)", name));
}

VSliceResult vslice(const Circuit& circuit, SliceMode mode) {
  std::vector<std::vector<GateInstruction>> segments(1);
  for (const auto& inst : circuit.instructions()) {
    if (inst.kind() == GateKind::Breakbarrier) {
      segments.emplace_back();
    } else {
      segments.back().push_back(inst);
    }
  }

  VSliceResult result;
  const auto map = circuit.all_qubits();
  std::vector<GateInstruction> prefix;
  for (std::size_t k = 0; k < segments.size(); ++k) {
    if (segments[k].empty() && segments.size() > 1) {
      result.warnings.push_back(fmt::format("slice {} is empty", k));
    }
    std::vector<GateInstruction> body;
    if (mode == SliceMode::Accumulated) {
      prefix.insert(prefix.end(), segments[k].begin(), segments[k].end());
      body = prefix;
    } else {
      body = segments[k];
    }
    result.slices.push_back(Slice{k, mode, circuit.with_instructions(std::move(body)), map, {}});
  }
  return result;
}

std::vector<std::size_t> used_qubits(const Circuit& circuit) {
  std::vector<bool> used(circuit.num_qubits(), false);
  for (const auto& inst : circuit.instructions()) {
    if (inst.kind() == GateKind::Barrier || inst.kind() == GateKind::Breakbarrier) {
      continue;
    }
    for (const auto& ref : inst.qubits()) {
      used[circuit.qubit_index(ref)] = true;
    }
  }
  std::vector<std::size_t> out;
  for (std::size_t q = 0; q < used.size(); ++q) {
    if (used[q]) {
      out.push_back(q);
    }
  }
  return out;
}

Slice hslice(const Slice& slice) {
  const Circuit& src = slice.circuit;
  const auto used = used_qubits(src);
  if (used.size() == src.num_qubits()) {
    return slice;
  }
  std::vector<bool> keep(src.num_qubits(), false);
  for (auto q : used) {
    keep[q] = true;
  }

  // Old reference -> new reference, registers shrunk in place.
  std::map<BitRef, BitRef> rename;
  std::vector<QuantumRegister> qregs;
  std::size_t flat = 0;
  for (const auto& reg : src.qregs()) {
    std::size_t kept = 0;
    for (std::size_t i = 0; i < reg.size; ++i, ++flat) {
      if (keep[flat]) {
        rename.emplace(BitRef{reg.name, i}, BitRef{reg.name, kept++});
      }
    }
    if (kept > 0) {
      qregs.push_back({reg.name, kept});
    }
  }

  std::vector<GateInstruction> body;
  for (const auto& inst : src.instructions()) {
    std::vector<BitRef> qubits;
    for (const auto& ref : inst.qubits()) {
      if (auto it = rename.find(ref); it != rename.end()) {
        qubits.push_back(it->second);
      }
    }
    if (qubits.empty()) {
      continue; // barrier over removed qubits only
    }
    body.push_back(inst.with_qubits(std::move(qubits)));
  }

  Slice out;
  out.index = slice.index;
  out.mode = slice.mode;
  out.circuit = Circuit(std::move(qregs), src.cregs(), std::move(body), src.debug_mode());
  out.removed_qubits = slice.removed_qubits;
  for (std::size_t q = 0; q < src.num_qubits(); ++q) {
    if (keep[q]) {
      out.qubit_map.push_back(slice.qubit_map[q]);
    } else {
      out.removed_qubits.push_back(slice.qubit_map[q]);
    }
  }
  return out;
}

std::string_view to_string(Behaviour b) {
  return b == Behaviour::PseudoClassical ? "pseudo_classical" : "full_quantum";
}

std::string_view to_string(Complexity c) { return c == Complexity::Simple ? "simple" : "complex"; }

GateClass gate_class(GateKind kind) {
  switch (kind) {
  case GateKind::X:
  case GateKind::CX:
  case GateKind::Swap:
  case GateKind::CCX:
  case GateKind::MCX:
    return GateClass::Permutation;
  case GateKind::Z:
  case GateKind::S:
  case GateKind::Sdg:
  case GateKind::T:
  case GateKind::Tdg:
  case GateKind::RZ:
  case GateKind::P:
  case GateKind::CZ:
  case GateKind::CP:
    return GateClass::DiagonalPhase;
  case GateKind::H:
  case GateKind::Y:
  case GateKind::RX:
  case GateKind::RY:
  case GateKind::U:
    return GateClass::Mixing;
  case GateKind::Measure:
  case GateKind::Barrier:
  case GateKind::Breakbarrier:
    return GateClass::None;
  }
  return GateClass::None;
}

SliceCategory categorize(const Slice& slice, const Thresholds& thresholds) {
  if (thresholds.max_simple_qubits == 0 || thresholds.max_simple_gates == 0) {
    throw Error(ErrorCode::InvalidSpec, "categorization thresholds must be positive");
  }
  SliceCategory cat;
  for (const auto& inst : slice.circuit.instructions()) {
    switch (gate_class(inst.kind())) {
    case GateClass::Permutation: ++cat.evidence.permutation; break;
    case GateClass::DiagonalPhase: ++cat.evidence.diagonal_phase; break;
    case GateClass::Mixing: ++cat.evidence.mixing; break;
    case GateClass::None: break;
    }
  }
  cat.gate_count = cat.evidence.total();
  cat.used_qubits = used_qubits(slice.circuit).size();
  cat.behaviour = cat.evidence.mixing == 0 && cat.evidence.diagonal_phase == 0
                      ? Behaviour::PseudoClassical
                      : Behaviour::FullQuantum;
  cat.complexity = cat.used_qubits <= thresholds.max_simple_qubits &&
                           cat.gate_count <= thresholds.max_simple_gates
                       ? Complexity::Simple
                       : Complexity::Complex;
  return cat;
}

std::string slice_file_name(std::string_view stem, std::size_t index) {
  return fmt::format("{}.slice{}.qasm", stem, index);
}

std::string emit_slice(const Slice& slice) {
  qasm::EmitOptions opts;
  opts.header_comments.push_back(
      fmt::format("qcdb slice mode={} index={}", to_string(slice.mode), slice.index));
  std::string map = "qubit_map";
  const auto local = slice.circuit.all_qubits();
  for (std::size_t i = 0; i < slice.qubit_map.size(); ++i) {
    map += fmt::format(" {}->{}", slice.qubit_map[i].str(), local[i].str());
  }
  opts.header_comments.push_back(map);
  if (!slice.removed_qubits.empty()) {
    std::string removed = "removed";
    for (const auto& ref : slice.removed_qubits) {
      removed += " " + ref.str();
    }
    opts.header_comments.push_back(removed);
  }
  return qasm::emit(slice.circuit, opts);
}

} // namespace qcdb
