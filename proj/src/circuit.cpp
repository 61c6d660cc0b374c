#include "qcdb/circuit.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <array>
#include <limits>
#include <set>
#include <sstream>
#include <utility>

namespace qcdb {

std::string_view to_string(ErrorCode code) {
  switch (code) {
  case ErrorCode::InvalidInstruction: return "InvalidInstruction";
  case ErrorCode::InvalidCircuit: return "InvalidCircuit";
  case ErrorCode::DebugModeOff: return "DebugModeOff";
  case ErrorCode::PositionOutOfRange: return "PositionOutOfRange";
  case ErrorCode::UnknownGateKind: return "UnknownGateKind";
  case ErrorCode::ParseError: return "ParseError";
  case ErrorCode::MeasurementPresent: return "MeasurementPresent";
  case ErrorCode::QubitCountMismatch: return "QubitCountMismatch";
  case ErrorCode::CapExceeded: return "CapExceeded";
  case ErrorCode::MidCircuitMeasurement: return "MidCircuitMeasurement";
  case ErrorCode::NoMeasurements: return "NoMeasurements";
  case ErrorCode::InvalidSpec: return "InvalidSpec";
  case ErrorCode::InvalidCounts: return "InvalidCounts";
  case ErrorCode::SliceNotFound: return "SliceNotFound";
  case ErrorCode::PatternLengthMismatch: return "PatternLengthMismatch";
  case ErrorCode::DomainMismatch: return "DomainMismatch";
  case ErrorCode::InvalidTestCase: return "InvalidTestCase";
  case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

namespace {

constexpr std::size_t kVariadic = std::numeric_limits<std::size_t>::max();

struct KindInfo {
  GateKind kind;
  std::string_view name;
  GateArity arity;
};

constexpr std::array<KindInfo, 22> kKinds{{
    {GateKind::X, "x", {1, 1, 0}},
    {GateKind::Y, "y", {1, 1, 0}},
    {GateKind::Z, "z", {1, 1, 0}},
    {GateKind::H, "h", {1, 1, 0}},
    {GateKind::S, "s", {1, 1, 0}},
    {GateKind::Sdg, "sdg", {1, 1, 0}},
    {GateKind::T, "t", {1, 1, 0}},
    {GateKind::Tdg, "tdg", {1, 1, 0}},
    {GateKind::RX, "rx", {1, 1, 1}},
    {GateKind::RY, "ry", {1, 1, 1}},
    {GateKind::RZ, "rz", {1, 1, 1}},
    {GateKind::P, "p", {1, 1, 1}},
    {GateKind::U, "u", {1, 1, 3}},
    {GateKind::CX, "cx", {2, 2, 0}},
    {GateKind::CZ, "cz", {2, 2, 0}},
    {GateKind::CP, "cp", {2, 2, 1}},
    {GateKind::Swap, "swap", {2, 2, 0}},
    {GateKind::CCX, "ccx", {3, 3, 0}},
    {GateKind::MCX, "mcx", {2, kVariadic, 0}},
    {GateKind::Measure, "measure", {1, 1, 0}},
    {GateKind::Barrier, "barrier", {1, kVariadic, 0}},
    {GateKind::Breakbarrier, "breakbarrier", {1, kVariadic, 0}},
}};

constexpr std::array<GateKind, 22> kAllKinds = [] {
  std::array<GateKind, 22> out{};
  for (std::size_t i = 0; i < kKinds.size(); ++i) {
    out[i] = kKinds[i].kind;
  }
  return out;
}();

const KindInfo& info(GateKind kind) { return kKinds[static_cast<std::size_t>(kind)]; }

std::string format_param(double v) { return fmt::format("{}", v); }

} // namespace

std::span<const GateKind> all_gate_kinds() { return kAllKinds; }

std::string_view gate_name(GateKind kind) { return info(kind).name; }

std::optional<GateKind> gate_kind_from_name(std::string_view name) {
  for (const auto& k : kKinds) {
    if (k.name == name) {
      return k.kind;
    }
  }
  return std::nullopt;
}

GateArity arity(GateKind kind) { return info(kind).arity; }

bool is_unitary(GateKind kind) {
  return kind != GateKind::Measure && kind != GateKind::Barrier &&
         kind != GateKind::Breakbarrier;
}

std::string BitRef::str() const { return fmt::format("{}[{}]", reg, index); }

Provenance Provenance::label(std::string text) {
  Provenance p;
  p.file = "<builder>";
  p.context = std::move(text);
  return p;
}

std::string Provenance::tag() const { return fmt::format("{}:{}:{}", file, line, column); }

// --- GateInstruction -------------------------------------------------------

GateInstruction::GateInstruction(GateKind kind, std::vector<double> params,
                                 std::vector<BitRef> qubits, std::vector<BitRef> clbits,
                                 Provenance provenance)
    : kind_(kind), params_(std::move(params)), qubits_(std::move(qubits)),
      clbits_(std::move(clbits)), provenance_(std::move(provenance)) {
  const auto a = arity(kind_);
  const auto name = gate_name(kind_);
  if (qubits_.size() < a.min_qubits || qubits_.size() > a.max_qubits) {
    throw Error(ErrorCode::InvalidInstruction,
                fmt::format("{} takes {} qubit operand(s), got {}", name,
                            a.max_qubits == a.min_qubits
                                ? std::to_string(a.min_qubits)
                                : fmt::format("at least {}", a.min_qubits),
                            qubits_.size()));
  }
  if (params_.size() != a.params) {
    throw Error(ErrorCode::InvalidInstruction,
                fmt::format("{} takes {} parameter(s), got {}", name, a.params,
                            params_.size()));
  }
  std::set<BitRef> seen;
  for (const auto& q : qubits_) {
    if (!seen.insert(q).second) {
      throw Error(ErrorCode::InvalidInstruction,
                  fmt::format("duplicate qubit operand {} in {}", q.str(), name));
    }
  }
  if (kind_ == GateKind::Measure) {
    if (clbits_.size() != qubits_.size()) {
      throw Error(ErrorCode::InvalidInstruction,
                  "measure needs one classical bit per measured qubit");
    }
  } else if (!clbits_.empty()) {
    throw Error(ErrorCode::InvalidInstruction,
                fmt::format("{} does not take classical operands", name));
  }
}

GateInstruction GateInstruction::with_provenance(Provenance p) const {
  GateInstruction copy = *this;
  copy.provenance_ = std::move(p);
  return copy;
}

GateInstruction GateInstruction::with_qubits(std::vector<BitRef> qubits) const {
  return GateInstruction(kind_, params_, std::move(qubits), clbits_, provenance_);
}

bool GateInstruction::same_operation(const GateInstruction& other) const {
  return kind_ == other.kind_ && params_ == other.params_ && qubits_ == other.qubits_ &&
         clbits_ == other.clbits_;
}

std::string GateInstruction::to_qasm() const {
  std::string out{kind_ == GateKind::Breakbarrier ? "barrier" : gate_name(kind_)};
  if (!params_.empty()) {
    out += '(';
    for (std::size_t i = 0; i < params_.size(); ++i) {
      if (i != 0) {
        out += ',';
      }
      out += format_param(params_[i]);
    }
    out += ')';
  }
  out += ' ';
  for (std::size_t i = 0; i < qubits_.size(); ++i) {
    if (i != 0) {
      out += ',';
    }
    out += qubits_[i].str();
  }
  if (kind_ == GateKind::Measure) {
    // Register-level measure is expanded, so there is exactly one pair.
    out += " -> ";
    out += clbits_.front().str();
  }
  return out;
}

// --- Circuit ---------------------------------------------------------------

Circuit::Circuit(std::vector<QuantumRegister> qregs, std::vector<ClassicalRegister> cregs,
                 std::vector<GateInstruction> instructions, bool debug_mode)
    : qregs_(std::move(qregs)), cregs_(std::move(cregs)),
      instructions_(std::move(instructions)), debug_mode_(debug_mode) {
  std::set<std::string> names;
  for (const auto& r : qregs_) {
    if (r.size == 0) {
      throw Error(ErrorCode::InvalidCircuit, fmt::format("register {} has size 0", r.name));
    }
    if (!names.insert(r.name).second) {
      throw Error(ErrorCode::InvalidCircuit, fmt::format("duplicate register {}", r.name));
    }
    num_qubits_ += r.size;
  }
  for (const auto& r : cregs_) {
    if (r.size == 0) {
      throw Error(ErrorCode::InvalidCircuit, fmt::format("register {} has size 0", r.name));
    }
    if (!names.insert(r.name).second) {
      throw Error(ErrorCode::InvalidCircuit, fmt::format("duplicate register {}", r.name));
    }
    num_clbits_ += r.size;
  }
  for (const auto& inst : instructions_) {
    for (const auto& q : inst.qubits()) {
      (void)qubit_index(q);
    }
    for (const auto& c : inst.clbits()) {
      (void)clbit_index(c);
    }
    if (inst.kind() == GateKind::Breakbarrier) {
      if (inst.qubits() != all_qubits()) {
        throw Error(ErrorCode::InvalidCircuit, "breakbarrier must span every qubit");
      }
    }
  }
}

std::size_t Circuit::qubit_index(const BitRef& ref) const {
  std::size_t offset = 0;
  for (const auto& r : qregs_) {
    if (r.name == ref.reg) {
      if (ref.index >= r.size) {
        throw Error(ErrorCode::InvalidCircuit,
                    fmt::format("qubit index out of range: {} (size {})", ref.str(), r.size));
      }
      return offset + ref.index;
    }
    offset += r.size;
  }
  throw Error(ErrorCode::InvalidCircuit,
              fmt::format("undeclared quantum register {}", ref.reg));
}

std::size_t Circuit::clbit_index(const BitRef& ref) const {
  std::size_t offset = 0;
  for (const auto& r : cregs_) {
    if (r.name == ref.reg) {
      if (ref.index >= r.size) {
        throw Error(ErrorCode::InvalidCircuit,
                    fmt::format("bit index out of range: {} (size {})", ref.str(), r.size));
      }
      return offset + ref.index;
    }
    offset += r.size;
  }
  throw Error(ErrorCode::InvalidCircuit,
              fmt::format("undeclared classical register {}", ref.reg));
}

BitRef Circuit::qubit_at(std::size_t flat) const {
  for (const auto& r : qregs_) {
    if (flat < r.size) {
      return {r.name, flat};
    }
    flat -= r.size;
  }
  throw Error(ErrorCode::InvalidCircuit, "flat qubit index out of range");
}

BitRef Circuit::clbit_at(std::size_t flat) const {
  for (const auto& r : cregs_) {
    if (flat < r.size) {
      return {r.name, flat};
    }
    flat -= r.size;
  }
  throw Error(ErrorCode::InvalidCircuit, "flat clbit index out of range");
}

std::vector<BitRef> Circuit::all_qubits() const {
  std::vector<BitRef> out;
  out.reserve(num_qubits_);
  for (const auto& r : qregs_) {
    for (std::size_t i = 0; i < r.size; ++i) {
      out.push_back({r.name, i});
    }
  }
  return out;
}

const QuantumRegister* Circuit::find_qreg(std::string_view name) const {
  auto it = std::find_if(qregs_.begin(), qregs_.end(),
                         [&](const auto& r) { return r.name == name; });
  return it == qregs_.end() ? nullptr : &*it;
}

const ClassicalRegister* Circuit::find_creg(std::string_view name) const {
  auto it = std::find_if(cregs_.begin(), cregs_.end(),
                         [&](const auto& r) { return r.name == name; });
  return it == cregs_.end() ? nullptr : &*it;
}

std::vector<BreakbarrierMarker> Circuit::breakbarriers() const {
  std::vector<BreakbarrierMarker> out;
  for (std::size_t i = 0; i < instructions_.size(); ++i) {
    if (instructions_[i].kind() == GateKind::Breakbarrier) {
      out.push_back({i, instructions_[i].qubits()});
    }
  }
  return out;
}

bool Circuit::has_measurements() const {
  return std::any_of(instructions_.begin(), instructions_.end(),
                     [](const auto& i) { return i.kind() == GateKind::Measure; });
}

std::size_t Circuit::gate_count() const {
  return static_cast<std::size_t>(
      std::count_if(instructions_.begin(), instructions_.end(), [](const auto& i) {
        return i.kind() != GateKind::Barrier && i.kind() != GateKind::Breakbarrier;
      }));
}

Circuit Circuit::with_instructions(std::vector<GateInstruction> instructions) const {
  return Circuit(qregs_, cregs_, std::move(instructions), debug_mode_);
}

bool same_instructions(std::span<const GateInstruction> a,
                       std::span<const GateInstruction> b) {
  return std::equal(a.begin(), a.end(), b.begin(), b.end(),
                    [](const auto& x, const auto& y) { return x.same_operation(y); });
}

// --- operations ------------------------------------------------------------

Circuit start_debug(const Circuit& circuit) {
  if (circuit.debug_mode()) {
    return circuit;
  }
  return Circuit(circuit.qregs(), circuit.cregs(), circuit.instructions(), true);
}

Circuit insert_breakbarrier(const Circuit& circuit, std::size_t position,
                            Provenance provenance) {
  if (!circuit.debug_mode()) {
    throw Error(ErrorCode::DebugModeOff, "breakbarriers require debug mode (start_debug)");
  }
  const auto& insts = circuit.instructions();
  if (position > insts.size()) {
    throw Error(ErrorCode::PositionOutOfRange,
                fmt::format("position {} outside 0..{}", position, insts.size()));
  }
  std::vector<GateInstruction> out = insts;
  out.insert(out.begin() + static_cast<std::ptrdiff_t>(position),
             GateInstruction(GateKind::Breakbarrier, {}, circuit.all_qubits(), {},
                             std::move(provenance)));
  return circuit.with_instructions(std::move(out));
}

Circuit remove_breakbarrier(const Circuit& circuit, std::size_t k) {
  const auto markers = circuit.breakbarriers();
  if (k >= markers.size()) {
    throw Error(ErrorCode::PositionOutOfRange,
                fmt::format("no breakbarrier #{} (circuit has {})", k, markers.size()));
  }
  std::vector<GateInstruction> out = circuit.instructions();
  out.erase(out.begin() + static_cast<std::ptrdiff_t>(markers[k].position));
  return circuit.with_instructions(std::move(out));
}

Circuit strip_breakbarriers(const Circuit& circuit) {
  std::vector<GateInstruction> out;
  for (const auto& inst : circuit.instructions()) {
    if (inst.kind() != GateKind::Breakbarrier) {
      out.push_back(inst);
    }
  }
  return circuit.with_instructions(std::move(out));
}

GateInfo gate_info(const Circuit& circuit) {
  GateInfo result;
  for (const auto& inst : circuit.instructions()) {
    if (inst.kind() == GateKind::Breakbarrier) {
      continue;
    }
    auto& stats = result[inst.kind()];
    ++stats.total;
    auto site = std::find_if(stats.sites.begin(), stats.sites.end(), [&](const auto& s) {
      return s.site.same_site(inst.provenance());
    });
    if (site == stats.sites.end()) {
      stats.sites.push_back({inst.provenance(), 1});
    } else {
      ++site->occurrences;
    }
  }
  return result;
}

std::string gate_loc(const Circuit& circuit, std::string_view kind_name) {
  const auto kind = gate_kind_from_name(kind_name);
  if (!kind || *kind == GateKind::Breakbarrier) {
    throw Error(ErrorCode::UnknownGateKind, fmt::format("unknown gate kind '{}'", kind_name));
  }
  const auto info = gate_info(circuit);
  std::ostringstream out;
  out << "--------------------------\n";
  auto it = info.find(*kind);
  if (it == info.end()) {
    out << fmt::format("There are 0 occurrences of the {} gate in the circuit.\n", kind_name);
  } else {
    const auto& stats = it->second;
    out << fmt::format("There are {} times where the {} gate was added to the circuit "
                       "({} occurrences in total).\n",
                       stats.sites.size(), kind_name, stats.total);
    out << "It was added to the circuit in the following locations:\n";
    for (const auto& s : stats.sites) {
      const auto& p = s.site;
      out << fmt::format("File \"{}\", line {}, column {}", p.file, p.line, p.column);
      if (!p.context.empty()) {
        out << ", in " << p.context;
      }
      out << fmt::format(" ({} occurrence{})\n", s.occurrences, s.occurrences == 1 ? "" : "s");
      if (!p.snippet.empty()) {
        out << "    " << p.snippet << "\n";
      }
    }
  }
  out << "--------------------------\n";
  return out.str();
}

// --- CircuitBuilder --------------------------------------------------------

CircuitBuilder& CircuitBuilder::qreg(std::string name, std::size_t size) {
  qregs_.push_back({std::move(name), size});
  return *this;
}

CircuitBuilder& CircuitBuilder::creg(std::string name, std::size_t size) {
  cregs_.push_back({std::move(name), size});
  return *this;
}

CircuitBuilder& CircuitBuilder::start_debug() {
  debug_mode_ = true;
  return *this;
}

Provenance CircuitBuilder::resolve(std::optional<Provenance> provenance) const {
  // Only gates appended in debug mode keep real provenance.
  if (!debug_mode_ || !provenance) {
    return Provenance::unknown();
  }
  return std::move(*provenance);
}

std::size_t CircuitBuilder::qreg_size(const std::string& name) const {
  for (const auto& r : qregs_) {
    if (r.name == name) {
      return r.size;
    }
  }
  throw Error(ErrorCode::InvalidCircuit, fmt::format("undeclared quantum register {}", name));
}

CircuitBuilder& CircuitBuilder::gate(GateKind kind, std::vector<BitRef> qubits,
                                     std::vector<double> params,
                                     std::optional<Provenance> provenance) {
  if (kind == GateKind::Breakbarrier) {
    return breakbarrier(std::move(provenance));
  }
  if (kind == GateKind::Measure) {
    throw Error(ErrorCode::InvalidInstruction, "use measure() for measurements");
  }
  instructions_.emplace_back(kind, std::move(params), std::move(qubits),
                             std::vector<BitRef>{}, resolve(std::move(provenance)));
  return *this;
}

CircuitBuilder& CircuitBuilder::broadcast(GateKind kind, const std::string& reg,
                                          std::vector<double> params,
                                          std::optional<Provenance> provenance) {
  if (arity(kind).min_qubits != 1 || arity(kind).max_qubits != 1) {
    throw Error(ErrorCode::InvalidInstruction,
                fmt::format("{} cannot be applied register-wide", gate_name(kind)));
  }
  const auto site = resolve(std::move(provenance));
  const auto n = qreg_size(reg);
  for (std::size_t i = 0; i < n; ++i) {
    instructions_.emplace_back(kind, params, std::vector<BitRef>{{reg, i}},
                               std::vector<BitRef>{}, site);
  }
  return *this;
}

CircuitBuilder& CircuitBuilder::measure(BitRef qubit, BitRef clbit,
                                        std::optional<Provenance> provenance) {
  instructions_.emplace_back(GateKind::Measure, std::vector<double>{},
                             std::vector<BitRef>{std::move(qubit)},
                             std::vector<BitRef>{std::move(clbit)},
                             resolve(std::move(provenance)));
  return *this;
}

CircuitBuilder& CircuitBuilder::measure_register(const std::string& qreg,
                                                 const std::string& creg,
                                                 std::optional<Provenance> provenance) {
  const auto site = resolve(std::move(provenance));
  const auto n = qreg_size(qreg);
  for (std::size_t i = 0; i < n; ++i) {
    instructions_.emplace_back(GateKind::Measure, std::vector<double>{},
                               std::vector<BitRef>{{qreg, i}},
                               std::vector<BitRef>{{creg, i}}, site);
  }
  return *this;
}

CircuitBuilder& CircuitBuilder::barrier(std::vector<BitRef> qubits) {
  instructions_.emplace_back(GateKind::Barrier, std::vector<double>{}, std::move(qubits));
  return *this;
}

CircuitBuilder& CircuitBuilder::breakbarrier(std::optional<Provenance> provenance) {
  if (!debug_mode_) {
    throw Error(ErrorCode::DebugModeOff, "breakbarriers require debug mode (start_debug)");
  }
  std::vector<BitRef> all;
  for (const auto& r : qregs_) {
    for (std::size_t i = 0; i < r.size; ++i) {
      all.push_back({r.name, i});
    }
  }
  instructions_.emplace_back(GateKind::Breakbarrier, std::vector<double>{}, std::move(all),
                             std::vector<BitRef>{}, resolve(std::move(provenance)));
  return *this;
}

Circuit CircuitBuilder::build() const {
  return Circuit(qregs_, cregs_, instructions_, debug_mode_);
}

} // namespace qcdb
