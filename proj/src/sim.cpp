#include "qcdb/sim.hpp"

#include "qcdb/rng.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <numbers>
#include <sstream>
#include <utility>

namespace qcdb {

namespace {

using Mat2 = std::array<Complex, 4>; // row-major

constexpr Complex kI{0.0, 1.0};

Mat2 single_qubit_matrix(GateKind kind, const std::vector<double>& p) {
  const double r2 = 1.0 / std::numbers::sqrt2;
  switch (kind) {
  case GateKind::X: return {0, 1, 1, 0};
  case GateKind::Y: return {0, -kI, kI, 0};
  case GateKind::Z: return {1, 0, 0, -1};
  case GateKind::H: return {r2, r2, r2, -r2};
  case GateKind::S: return {1, 0, 0, kI};
  case GateKind::Sdg: return {1, 0, 0, -kI};
  case GateKind::T: return {1, 0, 0, std::polar(1.0, std::numbers::pi / 4)};
  case GateKind::Tdg: return {1, 0, 0, std::polar(1.0, -std::numbers::pi / 4)};
  case GateKind::RX: {
    const double c = std::cos(p[0] / 2), s = std::sin(p[0] / 2);
    return {c, -kI * s, -kI * s, c};
  }
  case GateKind::RY: {
    const double c = std::cos(p[0] / 2), s = std::sin(p[0] / 2);
    return {c, -s, s, c};
  }
  case GateKind::RZ:
    return {std::polar(1.0, -p[0] / 2), 0, 0, std::polar(1.0, p[0] / 2)};
  case GateKind::P: return {1, 0, 0, std::polar(1.0, p[0])};
  case GateKind::U: {
    const double c = std::cos(p[0] / 2), s = std::sin(p[0] / 2);
    return {c, -std::polar(s, p[2]), std::polar(s, p[1]), std::polar(c, p[1] + p[2])};
  }
  default: break;
  }
  throw Error(ErrorCode::InvalidInstruction,
              fmt::format("{} is not a single-qubit gate", gate_name(kind)));
}

// Applies m to `target` on every basis pair whose control bits are all set.
void apply_controlled(std::span<Complex> a, std::uint64_t target, std::uint64_t controls,
                      const Mat2& m) {
  const std::uint64_t bit = std::uint64_t{1} << target;
  const std::uint64_t n = a.size();
  for (std::uint64_t i = 0; i < n; ++i) {
    if ((i & bit) != 0 || (i & controls) != controls) {
      continue;
    }
    const std::uint64_t j = i | bit;
    const Complex a0 = a[i];
    const Complex a1 = a[j];
    a[i] = m[0] * a0 + m[1] * a1;
    a[j] = m[2] * a0 + m[3] * a1;
  }
}

void apply_x(std::span<Complex> a, std::uint64_t target, std::uint64_t controls) {
  const std::uint64_t bit = std::uint64_t{1} << target;
  const std::uint64_t n = a.size();
  for (std::uint64_t i = 0; i < n; ++i) {
    if ((i & bit) == 0 && (i & controls) == controls) {
      std::swap(a[i], a[i | bit]);
    }
  }
}

void apply_phase(std::span<Complex> a, std::uint64_t mask, Complex phase) {
  const std::uint64_t n = a.size();
  for (std::uint64_t i = 0; i < n; ++i) {
    if ((i & mask) == mask) {
      a[i] *= phase;
    }
  }
}

void check_cap(std::size_t n, std::size_t cap) {
  if (n > cap) {
    throw Error(ErrorCode::CapExceeded,
                fmt::format("{} qubits exceeds the simulator cap of {}", n, cap));
  }
}

void check_no_measurements(const Circuit& circuit) {
  if (circuit.has_measurements()) {
    throw Error(ErrorCode::MeasurementPresent,
                "circuit contains measurements; use sampling mode");
  }
}

void check_width(const Circuit& circuit, const StateVector& init) {
  if (init.num_qubits() != circuit.num_qubits()) {
    throw Error(ErrorCode::QubitCountMismatch,
                fmt::format("initial state has {} qubits, circuit has {}", init.num_qubits(),
                            circuit.num_qubits()));
  }
}

struct MeasureMap {
  std::vector<std::pair<std::size_t, std::size_t>> qubit_to_clbit;
};

MeasureMap terminal_measurements(const Circuit& circuit) {
  MeasureMap m;
  std::vector<bool> measured(circuit.num_qubits(), false);
  for (const auto& inst : circuit.instructions()) {
    if (inst.kind() == GateKind::Measure) {
      const auto q = circuit.qubit_index(inst.qubits().front());
      measured[q] = true;
      m.qubit_to_clbit.emplace_back(q, circuit.clbit_index(inst.clbits().front()));
      continue;
    }
    if (!is_unitary(inst.kind())) {
      continue;
    }
    for (const auto& ref : inst.qubits()) {
      if (measured[circuit.qubit_index(ref)]) {
        throw Error(ErrorCode::MidCircuitMeasurement,
                    fmt::format("{} acts on {} after it was measured", gate_name(inst.kind()),
                                ref.str()));
      }
    }
  }
  if (m.qubit_to_clbit.empty()) {
    throw Error(ErrorCode::NoMeasurements, "circuit has no measurements to sample");
  }
  return m;
}

StateVector run_unitary_part(const Circuit& circuit, const StateVector& init,
                             const SimOptions& options) {
  check_width(circuit, init);
  check_cap(circuit.num_qubits(), options.qubit_cap);
  StateVector state = init;
  for (const auto& inst : circuit.instructions()) {
    if (is_unitary(inst.kind())) {
      apply_instruction(circuit, inst, state);
    }
  }
  return state;
}

} // namespace

// --- StateVector -----------------------------------------------------------

StateVector::StateVector(std::size_t n) : n_(n), amps_(std::size_t{1} << n) { amps_[0] = 1.0; }

StateVector::StateVector(std::size_t n, std::vector<Complex> amps) : n_(n), amps_(std::move(amps)) {
  if (n >= 63 || amps_.size() != (std::size_t{1} << n)) {
    throw Error(ErrorCode::InvalidSpec,
                fmt::format("{} amplitudes given for {} qubits", amps_.size(), n));
  }
  const double norm = norm_squared();
  if (std::abs(norm - 1.0) > kNormTolerance) {
    throw Error(ErrorCode::InvalidSpec, fmt::format("state is not normalized (|psi|^2 = {})", norm));
  }
}

StateVector StateVector::basis(std::size_t n, std::uint64_t index) {
  StateVector s(n);
  if (index >= s.size()) {
    throw Error(ErrorCode::InvalidSpec, fmt::format("basis index {} out of range", index));
  }
  s.amps_[0] = 0.0;
  s.amps_[index] = 1.0;
  return s;
}

double StateVector::norm_squared() const {
  double total = 0.0;
  for (const auto& a : amps_) {
    total += std::norm(a);
  }
  return total;
}

StateVector StateVector::tensor(const StateVector& high) const {
  std::vector<Complex> out(amps_.size() * high.amps_.size());
  for (std::size_t h = 0; h < high.amps_.size(); ++h) {
    for (std::size_t l = 0; l < amps_.size(); ++l) {
      out[(h << n_) | l] = high.amps_[h] * amps_[l];
    }
  }
  StateVector s(0);
  s.n_ = n_ + high.n_;
  s.amps_ = std::move(out);
  return s;
}

// --- Matrix ----------------------------------------------------------------

Matrix Matrix::identity(std::size_t dim) {
  Matrix m(dim);
  for (std::size_t i = 0; i < dim; ++i) {
    m(i, i) = 1.0;
  }
  return m;
}

Matrix Matrix::adjoint() const {
  Matrix m(dim_);
  for (std::size_t r = 0; r < dim_; ++r) {
    for (std::size_t c = 0; c < dim_; ++c) {
      m(c, r) = std::conj((*this)(r, c));
    }
  }
  return m;
}

Matrix Matrix::operator*(const Matrix& rhs) const {
  Matrix m(dim_);
  for (std::size_t r = 0; r < dim_; ++r) {
    for (std::size_t k = 0; k < dim_; ++k) {
      const Complex a = (*this)(r, k);
      if (a == Complex{}) {
        continue;
      }
      for (std::size_t c = 0; c < dim_; ++c) {
        m(r, c) += a * rhs(k, c);
      }
    }
  }
  return m;
}

double Matrix::max_abs_diff(const Matrix& rhs) const {
  double worst = 0.0;
  for (std::size_t i = 0; i < data_.size(); ++i) {
    worst = std::max(worst, std::abs(data_[i] - rhs.data_[i]));
  }
  return worst;
}

// --- simulation ------------------------------------------------------------

std::size_t qubit_cap_from_env() {
  if (const char* v = std::getenv("QCDB_QUBIT_CAP")) {
    char* end = nullptr;
    const long cap = std::strtol(v, &end, 10);
    if (end != v && *end == '\0' && cap > 0 && cap < 63) {
      return static_cast<std::size_t>(cap);
    }
  }
  return kDefaultQubitCap;
}

void apply_instruction(const Circuit& circuit, const GateInstruction& inst, StateVector& state) {
  auto a = state.mutable_amplitudes();
  std::vector<std::uint64_t> q;
  q.reserve(inst.qubits().size());
  for (const auto& ref : inst.qubits()) {
    q.push_back(circuit.qubit_index(ref));
  }
  auto mask_of = [&](std::size_t first, std::size_t last) {
    std::uint64_t mask = 0;
    for (std::size_t i = first; i < last; ++i) {
      mask |= std::uint64_t{1} << q[i];
    }
    return mask;
  };
  switch (inst.kind()) {
  case GateKind::Barrier:
  case GateKind::Breakbarrier:
    return;
  case GateKind::Measure:
    throw Error(ErrorCode::MeasurementPresent, "measure cannot be applied as a unitary");
  case GateKind::X:
    apply_x(a, q[0], 0);
    return;
  case GateKind::Z:
  case GateKind::S:
  case GateKind::Sdg:
  case GateKind::T:
  case GateKind::Tdg:
  case GateKind::P: {
    const auto m = single_qubit_matrix(inst.kind(), inst.params());
    apply_phase(a, mask_of(0, 1), m[3]);
    return;
  }
  case GateKind::CX:
  case GateKind::CCX:
  case GateKind::MCX:
    apply_x(a, q.back(), mask_of(0, q.size() - 1));
    return;
  case GateKind::CZ:
    apply_phase(a, mask_of(0, 2), -1.0);
    return;
  case GateKind::CP:
    apply_phase(a, mask_of(0, 2), std::polar(1.0, inst.params()[0]));
    return;
  case GateKind::Swap: {
    const std::uint64_t b0 = std::uint64_t{1} << q[0];
    const std::uint64_t b1 = std::uint64_t{1} << q[1];
    for (std::uint64_t i = 0; i < a.size(); ++i) {
      if ((i & b0) != 0 && (i & b1) == 0) {
        std::swap(a[i], a[(i ^ b0) | b1]);
      }
    }
    return;
  }
  default:
    apply_controlled(a, q[0], 0, single_qubit_matrix(inst.kind(), inst.params()));
    return;
  }
}

StateVector run_statevector(const Circuit& circuit, const StateVector& init,
                            const SimOptions& options) {
  check_no_measurements(circuit);
  return run_unitary_part(circuit, init, options);
}

Distribution measurement_distribution(const Circuit& circuit, const StateVector& init,
                                      const SimOptions& options) {
  const auto measures = terminal_measurements(circuit);
  const auto state = run_unitary_part(circuit, init, options);
  std::map<std::uint64_t, double> by_value;
  const auto amps = state.amplitudes();
  for (std::uint64_t i = 0; i < amps.size(); ++i) {
    const double p = std::norm(amps[i]);
    if (p == 0.0) {
      continue;
    }
    std::uint64_t value = 0;
    for (const auto& [qubit, clbit] : measures.qubit_to_clbit) {
      const std::uint64_t bit = std::uint64_t{1} << clbit;
      value = ((i >> qubit) & 1U) != 0 ? (value | bit) : (value & ~bit);
    }
    by_value[value] += p;
  }
  Distribution out;
  for (const auto& [value, p] : by_value) {
    out[clbit_label(value, circuit)] += p;
  }
  return out;
}

CountsMap sample(const Circuit& circuit, const StateVector& init, std::uint64_t shots,
                 std::uint64_t seed, const SimOptions& options) {
  if (shots == 0) {
    throw Error(ErrorCode::InvalidSpec, "shots must be at least 1");
  }
  const auto dist = measurement_distribution(circuit, init, options);
  std::vector<std::pair<std::string, double>> cumulative;
  double acc = 0.0;
  for (const auto& [label, p] : dist) {
    acc += p;
    cumulative.emplace_back(label, acc);
  }
  Xoshiro256 rng(seed);
  CountsMap result;
  result.shots = shots;
  for (std::uint64_t s = 0; s < shots; ++s) {
    const double u = rng.uniform() * acc;
    auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u,
                               [](double v, const auto& entry) { return v < entry.second; });
    if (it == cumulative.end()) {
      it = std::prev(cumulative.end());
    }
    ++result.counts[it->first];
  }
  return result;
}

Matrix unitary_of(const Circuit& circuit) {
  check_no_measurements(circuit);
  check_cap(circuit.num_qubits(), kUnitaryQubitCap);
  const std::size_t dim = std::size_t{1} << circuit.num_qubits();
  Matrix u(dim);
  for (std::size_t col = 0; col < dim; ++col) {
    const auto out = run_unitary_part(circuit, StateVector::basis(circuit.num_qubits(), col),
                                      SimOptions{kUnitaryQubitCap});
    for (std::size_t row = 0; row < dim; ++row) {
      u(row, col) = out[row];
    }
  }
  return u;
}

std::string basis_label(std::uint64_t index, std::size_t n) {
  std::string s(n, '0');
  for (std::size_t q = 0; q < n; ++q) {
    if (((index >> q) & 1U) != 0) {
      s[n - 1 - q] = '1';
    }
  }
  return s;
}

std::string clbit_label(std::uint64_t value, const Circuit& circuit) {
  std::string out;
  std::size_t offset = 0;
  for (const auto& reg : circuit.cregs()) {
    if (!out.empty()) {
      out += ' ';
    }
    out += basis_label(value >> offset, reg.size);
    offset += reg.size;
  }
  return out;
}

std::string dump_statevector(const StateVector& state) {
  std::ostringstream out;
  const auto amps = state.amplitudes();
  for (std::uint64_t i = 0; i < amps.size(); ++i) {
    if (std::abs(amps[i]) < kDumpThreshold) {
      continue;
    }
    // Normalise negative zero so golden output is stable.
    const double re = amps[i].real() == 0.0 ? 0.0 : amps[i].real();
    const double im = amps[i].imag() == 0.0 ? 0.0 : amps[i].imag();
    out << fmt::format("{} {:.12f} {:.12f} {:.12f}\n", basis_label(i, state.num_qubits()), re,
                       im, std::norm(amps[i]));
  }
  return out.str();
}

std::string format_counts(const CountsMap& counts) {
  std::vector<std::pair<std::string, std::uint64_t>> rows(counts.counts.begin(),
                                                          counts.counts.end());
  std::stable_sort(rows.begin(), rows.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  std::ostringstream out;
  for (const auto& [label, n] : rows) {
    out << fmt::format("{} {}\n", label, n);
  }
  out << fmt::format("shots {}\n", counts.shots);
  return out.str();
}

} // namespace qcdb
