#pragma once

// Slicing invariants phrased as numeric deviations, shared by the unit tests
// and the acceptance runner.

#include "qcdb/sim.hpp"
#include "qcdb/slicer.hpp"
#include "support/generators.hpp"

namespace qcdb::testing {

/// Worst per-amplitude gap between the marker-free circuit, the standalone
/// slices run back to back, and the last accumulated slice.
inline double reassembly_deviation(const Circuit& c, const StateVector& init) {
  const auto full = run_statevector(strip_breakbarriers(c), init);
  StateVector seq = init;
  for (const auto& s : vslice(c, SliceMode::Standalone).slices) {
    seq = run_statevector(s.circuit, seq);
  }
  const auto acc = vslice(c, SliceMode::Accumulated).slices.back();
  const auto last = run_statevector(acc.circuit, init);
  return std::max(max_amp_diff(full, seq), max_amp_diff(full, last));
}

/// Adds an untouched register "idle" of `k` qubits, keeping every
/// breakbarrier full width and at its original position.
inline Circuit inject_idle(const Circuit& c, std::size_t k) {
  auto regs = c.qregs();
  regs.push_back({"idle", k});
  Circuit out(regs, c.cregs(), strip_breakbarriers(c).instructions(), true);
  for (const auto& m : c.breakbarriers()) {
    out = insert_breakbarrier(out, m.position);
  }
  return out;
}

/// Runs slice s on |psi_used> (x) |phi_removed> and compares with
/// hslice(s) on |psi_used>, re-tensored with |phi_removed> under qubit_map.
inline double hslice_deviation(const Slice& s, Rng& rng) {
  const auto h = hslice(s);
  const Circuit& c = s.circuit;
  std::vector<std::size_t> kept;
  for (const auto& ref : h.qubit_map) {
    kept.push_back(c.qubit_index(ref));
  }
  std::vector<std::size_t> removed;
  for (const auto& ref : h.removed_qubits) {
    removed.push_back(c.qubit_index(ref));
  }
  auto gather = [](std::uint64_t i, const std::vector<std::size_t>& qubits) {
    std::uint64_t out = 0;
    for (std::size_t k = 0; k < qubits.size(); ++k) {
      out |= ((i >> qubits[k]) & 1U) << k;
    }
    return out;
  };
  const auto phi = random_state(rng, removed.size());
  auto combine = [&](const StateVector& used) {
    std::vector<Complex> amps(std::size_t{1} << c.num_qubits());
    for (std::uint64_t i = 0; i < amps.size(); ++i) {
      amps[i] = (kept.empty() ? Complex{1.0} : used[gather(i, kept)]) * phi[gather(i, removed)];
    }
    return StateVector(c.num_qubits(), std::move(amps));
  };
  if (kept.empty()) {
    // Nothing acts: the slice must leave every state alone.
    const auto in = combine(StateVector(0));
    return max_amp_diff(run_statevector(c, in), in);
  }
  const auto psi = random_state(rng, kept.size());
  const auto expected = combine(run_statevector(h.circuit, psi));
  const auto got = run_statevector(c, combine(psi));
  return max_amp_diff(got, expected);
}

/// True when the unitary is a 0/1 permutation matrix (exact comparison).
inline bool is_permutation_unitary(const Matrix& u) {
  for (std::size_t j = 0; j < u.dim(); ++j) {
    std::size_t ones = 0;
    for (std::size_t i = 0; i < u.dim(); ++i) {
      const Complex v = u(i, j);
      if (v == Complex(1.0, 0.0)) {
        ++ones;
      } else if (v != Complex(0.0, 0.0)) {
        return false;
      }
    }
    if (ones != 1) {
      return false;
    }
  }
  return true;
}

} // namespace qcdb::testing
