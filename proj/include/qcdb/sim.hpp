#pragma once

#include "qcdb/circuit.hpp"

#include <complex>
#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace qcdb {

using Complex = std::complex<double>;

inline constexpr std::size_t kDefaultQubitCap = 24;
inline constexpr std::size_t kUnitaryQubitCap = 10;
inline constexpr double kNormTolerance = 1e-10;
/// Amplitudes with magnitude below this are omitted from dumps.
inline constexpr double kDumpThreshold = 1e-12;

/// Dense pure state. Basis index i has qubit q set iff (i >> q) & 1
/// (qubit 0 is the least significant bit).
class StateVector {
public:
  /// |0...0> on n qubits.
  explicit StateVector(std::size_t n = 0);
  /// Throws Error(InvalidSpec) unless amps has 2^n entries with unit norm.
  StateVector(std::size_t n, std::vector<Complex> amps);

  static StateVector basis(std::size_t n, std::uint64_t index);

  [[nodiscard]] std::size_t num_qubits() const { return n_; }
  [[nodiscard]] std::size_t size() const { return amps_.size(); }
  [[nodiscard]] std::span<const Complex> amplitudes() const { return amps_; }
  [[nodiscard]] std::span<Complex> mutable_amplitudes() { return amps_; }
  [[nodiscard]] const Complex& operator[](std::size_t i) const { return amps_[i]; }
  [[nodiscard]] double norm_squared() const;

  /// |this> (x) |other>, with `other` occupying the high qubits.
  [[nodiscard]] StateVector tensor(const StateVector& high) const;

private:
  std::size_t n_ = 0;
  std::vector<Complex> amps_;
};

/// Dense row-major square matrix.
class Matrix {
public:
  explicit Matrix(std::size_t dim = 0) : dim_(dim), data_(dim * dim) {}

  [[nodiscard]] std::size_t dim() const { return dim_; }
  Complex& operator()(std::size_t r, std::size_t c) { return data_[r * dim_ + c]; }
  const Complex& operator()(std::size_t r, std::size_t c) const { return data_[r * dim_ + c]; }

  static Matrix identity(std::size_t dim);
  [[nodiscard]] Matrix adjoint() const;
  [[nodiscard]] Matrix operator*(const Matrix& rhs) const;
  /// max_ij |a_ij - b_ij|
  [[nodiscard]] double max_abs_diff(const Matrix& rhs) const;

private:
  std::size_t dim_;
  std::vector<Complex> data_;
};

struct CountsMap {
  std::uint64_t shots = 0;
  std::map<std::string, std::uint64_t> counts;
  bool operator==(const CountsMap&) const = default;
};

/// Outcome label -> probability.
using Distribution = std::map<std::string, double>;

struct SimOptions {
  std::size_t qubit_cap = kDefaultQubitCap;
};

/// kDefaultQubitCap unless QCDB_QUBIT_CAP holds a positive integer.
std::size_t qubit_cap_from_env();

/// U|init>. Errors: MeasurementPresent, QubitCountMismatch, CapExceeded.
StateVector run_statevector(const Circuit& circuit, const StateVector& init,
                            const SimOptions& options = {});

/// Applies one unitary instruction in place (barriers are no-ops).
void apply_instruction(const Circuit& circuit, const GateInstruction& inst, StateVector& state);

/// Exact distribution over the circuit's classical bits after running it with
/// terminal measurements. Errors: NoMeasurements, MidCircuitMeasurement, plus
/// the run_statevector errors other than MeasurementPresent.
Distribution measurement_distribution(const Circuit& circuit, const StateVector& init,
                                      const SimOptions& options = {});

/// Draws `shots` outcomes from measurement_distribution using Xoshiro256(seed).
CountsMap sample(const Circuit& circuit, const StateVector& init, std::uint64_t shots,
                 std::uint64_t seed, const SimOptions& options = {});

/// Full unitary, column j = U|j>. Errors: CapExceeded (n > 10), MeasurementPresent.
Matrix unitary_of(const Circuit& circuit);

/// n-character bitstring for a basis index, qubit 0 rightmost.
std::string basis_label(std::uint64_t index, std::size_t n);

/// Classical-bit label: registers in declaration order separated by spaces,
/// bit 0 of each register rightmost. `value` holds flat clbit k at bit k.
std::string clbit_label(std::uint64_t value, const Circuit& circuit);

/// One line per amplitude with |a| >= 1e-12: "bitstring re im prob", by basis index.
std::string dump_statevector(const StateVector& state);

/// Sorted by count (descending) then label.
std::string format_counts(const CountsMap& counts);

} // namespace qcdb
