#include "qcdb/qasm.hpp"
#include "qcdb/sim.hpp"
#include "qcdb/slicer.hpp"
#include "support/generators.hpp"
#include "support/properties.hpp"

#include <gtest/gtest.h>

namespace qcdb {
namespace {

using testing::Rng;
using testing::uniform_int;

const char* kThreeSlices =
    "OPENQASM 2.0;\nqreg q[3];\nh q[0];\n//@break\nbarrier q;\ncx q[0],q[1];\nx q[2];\n"
    "//@break\nbarrier q;\nt q[1];\n";

std::vector<GateInstruction> concat_standalone(const VSliceResult& r) {
  std::vector<GateInstruction> out;
  for (const auto& s : r.slices) {
    out.insert(out.end(), s.circuit.instructions().begin(), s.circuit.instructions().end());
  }
  return out;
}

TEST(VSlice, CutsAtEveryBreakbarrier) {
  const auto c = qasm::parse_or_throw(kThreeSlices);
  const auto r = vslice(c, SliceMode::Standalone);
  ASSERT_EQ(r.slices.size(), 3U);
  EXPECT_TRUE(r.warnings.empty());
  EXPECT_EQ(r.slices[0].circuit.instructions().size(), 1U);
  EXPECT_EQ(r.slices[1].circuit.instructions().size(), 2U);
  EXPECT_EQ(r.slices[2].circuit.instructions()[0].kind(), GateKind::T);
  for (std::size_t k = 0; k < 3; ++k) {
    EXPECT_EQ(r.slices[k].index, k);
    EXPECT_EQ(r.slices[k].circuit.num_qubits(), 3U);
    EXPECT_TRUE(r.slices[k].removed_qubits.empty());
  }
}

TEST(VSlice, AccumulatedPrefixes) {
  const auto r = vslice(qasm::parse_or_throw(kThreeSlices), SliceMode::Accumulated);
  ASSERT_EQ(r.slices.size(), 3U);
  EXPECT_EQ(r.slices[0].circuit.instructions().size(), 1U);
  EXPECT_EQ(r.slices[1].circuit.instructions().size(), 3U);
  EXPECT_EQ(r.slices[2].circuit.instructions().size(), 4U);
  EXPECT_EQ(r.slices[2].mode, SliceMode::Accumulated);
}

TEST(VSlice, NoBreakbarrierIsOneSlice) {
  const auto c = qasm::parse_or_throw("OPENQASM 2.0; qreg q[1]; h q[0];");
  const auto r = vslice(c, SliceMode::Standalone);
  ASSERT_EQ(r.slices.size(), 1U);
  EXPECT_TRUE(r.warnings.empty());
}

TEST(VSlice, EmptySlicesWarn) {
  const auto c = qasm::parse_or_throw(
      "OPENQASM 2.0; qreg q[1];\n//@break\nbarrier q;\nh q[0];\n//@break\nbarrier q;\n//@break\nbarrier q;\n");
  const auto r = vslice(c, SliceMode::Standalone);
  ASSERT_EQ(r.slices.size(), 4U);
  EXPECT_EQ(r.warnings, (std::vector<std::string>{"slice 0 is empty", "slice 2 is empty",
                                                  "slice 3 is empty"}));
}

TEST(VSlice, ModeNames) {
  EXPECT_EQ(slice_mode_from_name("mini"), SliceMode::Standalone);
  EXPECT_EQ(slice_mode_from_name("standalone"), SliceMode::Standalone);
  EXPECT_EQ(slice_mode_from_name("accumulated"), SliceMode::Accumulated);
  EXPECT_THROW((void)slice_mode_from_name("both"), Error);
}

// Property: standalone slices reassemble into the breakbarrier-free circuit,
// and accumulated slice k equals the first k+1 standalone slices.
TEST(VSlice, ReassemblyAndAccumulation) {
  Rng rng(31);
  for (int trial = 0; trial < 200; ++trial) {
    const auto c = testing::random_circuit(rng);
    const auto standalone = vslice(c, SliceMode::Standalone);
    const auto accumulated = vslice(c, SliceMode::Accumulated);
    ASSERT_EQ(standalone.slices.size(), c.breakbarriers().size() + 1);
    ASSERT_EQ(accumulated.slices.size(), standalone.slices.size());
    ASSERT_TRUE(same_instructions(concat_standalone(standalone),
                                  strip_breakbarriers(c).instructions()));
    std::vector<GateInstruction> prefix;
    for (std::size_t k = 0; k < standalone.slices.size(); ++k) {
      const auto& part = standalone.slices[k].circuit.instructions();
      prefix.insert(prefix.end(), part.begin(), part.end());
      ASSERT_TRUE(same_instructions(prefix, accumulated.slices[k].circuit.instructions()));
      ASSERT_EQ(standalone.slices[k].circuit.qregs(), c.qregs());
    }
  }
}

// Property: numerically, sequential standalone slices and the last
// accumulated slice both reproduce the full circuit from random states.
TEST(VSlice, SequentialSimulationMatchesFull) {
  Rng rng(35);
  for (int trial = 0; trial < 200; ++trial) {
    const auto c = testing::random_circuit(rng);
    const auto init = testing::random_state(rng, c.num_qubits());
    ASSERT_LE(testing::reassembly_deviation(c, init), 1e-9) << qasm::emit(c);
  }
}

TEST(HSlice, DropsIdleQubitsAndRenumbers) {
  const auto c = qasm::parse_or_throw(
      "OPENQASM 2.0; qreg a[3]; qreg b[2]; creg m[1]; h a[0]; cx a[0],a[2]; barrier a,b; "
      "measure a[2] -> m[0];");
  const auto s = hslice(vslice(c, SliceMode::Standalone).slices[0]);
  EXPECT_EQ(s.circuit.qregs(), (std::vector<QuantumRegister>{{"a", 2}}));
  EXPECT_EQ(s.qubit_map, (std::vector<BitRef>{{"a", 0}, {"a", 2}}));
  EXPECT_EQ(s.removed_qubits, (std::vector<BitRef>{{"a", 1}, {"b", 0}, {"b", 1}}));
  const auto& in = s.circuit.instructions();
  ASSERT_EQ(in.size(), 4U);
  EXPECT_EQ(in[1].qubits()[1], (BitRef{"a", 1}));
  EXPECT_EQ(in[2].kind(), GateKind::Barrier);
  EXPECT_EQ(in[2].qubits().size(), 2U);
  EXPECT_EQ(s.circuit.cregs(), c.cregs());
  EXPECT_TRUE(in[0].provenance().same_site(c.instructions()[0].provenance()));
}

TEST(HSlice, FullyUsedSliceUnchanged) {
  const auto c = qasm::parse_or_throw("OPENQASM 2.0; qreg q[2]; h q;");
  const auto s = vslice(c, SliceMode::Standalone).slices[0];
  const auto h = hslice(s);
  EXPECT_EQ(h.qubit_map, s.qubit_map);
  EXPECT_TRUE(h.removed_qubits.empty());
}

TEST(HSlice, BarrierOnlyOnRemovedQubitsDisappears) {
  const auto c = qasm::parse_or_throw("OPENQASM 2.0; qreg q[2]; barrier q[1]; h q[0];");
  const auto h = hslice(vslice(c, SliceMode::Standalone).slices[0]);
  ASSERT_EQ(h.circuit.instructions().size(), 1U);
  EXPECT_EQ(h.circuit.instructions()[0].kind(), GateKind::H);
}

// Property: a slice's unitary factors as (hsliced unitary) (x) identity on the
// removed qubits, under the recorded qubit map.
TEST(HSlice, SoundOnRandomCircuits) {
  Rng rng(32);
  int with_removals = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const auto c = testing::random_circuit(rng, {.min_qubits = 2, .max_qubits = 6, .max_gates = 8});
    const auto slices = vslice(c, SliceMode::Standalone).slices;
    const auto& slice = slices[uniform_int(rng, 0, slices.size() - 1)];
    const auto h = hslice(slice);
    if (h.circuit.num_qubits() == 0) {
      continue;
    }
    with_removals += h.removed_qubits.empty() ? 0 : 1;
    ASSERT_EQ(h.qubit_map.size() + h.removed_qubits.size(), slice.circuit.num_qubits());
    const auto full = unitary_of(slice.circuit);
    const auto small = unitary_of(h.circuit);
    std::vector<std::size_t> kept;
    for (const auto& ref : h.qubit_map) {
      kept.push_back(slice.circuit.qubit_index(ref));
    }
    std::uint64_t removed_mask = 0;
    for (const auto& ref : h.removed_qubits) {
      removed_mask |= std::uint64_t{1} << slice.circuit.qubit_index(ref);
    }
    auto local = [&](std::uint64_t i) {
      std::uint64_t out = 0;
      for (std::size_t k = 0; k < kept.size(); ++k) {
        out |= ((i >> kept[k]) & 1U) << k;
      }
      return out;
    };
    for (std::uint64_t i = 0; i < full.dim(); ++i) {
      for (std::uint64_t j = 0; j < full.dim(); ++j) {
        const Complex want =
            (i & removed_mask) == (j & removed_mask) ? small(local(i), local(j)) : Complex{};
        ASSERT_LT(std::abs(full(i, j) - want), 1e-12) << "trial " << trial;
      }
    }
  }
  EXPECT_GT(with_removals, 30);
}

// Property: for product inputs |psi_used> (x) |phi_removed>, the hsliced
// slice reproduces the original on every slice of circuits with idle qubits.
TEST(HSlice, SoundOnProductStates) {
  Rng rng(36);
  for (int trial = 0; trial < 100; ++trial) {
    const auto base = testing::random_circuit(rng, {.max_qubits = 5, .max_gates = 20});
    const auto c = testing::inject_idle(base, uniform_int(rng, 1, 3));
    ASSERT_EQ(c.breakbarriers().size(), base.breakbarriers().size());
    for (const auto& slice : vslice(c, SliceMode::Standalone).slices) {
      const auto h = hslice(slice);
      ASSERT_LE(h.qubit_map.size(), base.num_qubits());
      ASSERT_LE(testing::hslice_deviation(slice, rng), 1e-9) << qasm::emit(c);
    }
  }
}

TEST(Categorize, Examples) {
  const auto perm = qasm::parse_or_throw("OPENQASM 2.0; qreg q[3]; x q[0]; cx q[0],q[1]; ccx q[0],q[1],q[2];");
  auto cat = categorize(vslice(perm, SliceMode::Standalone).slices[0]);
  EXPECT_EQ(cat.behaviour, Behaviour::PseudoClassical);
  EXPECT_EQ(cat.complexity, Complexity::Simple);
  EXPECT_EQ(cat.evidence.permutation, 3U);
  EXPECT_EQ(cat.used_qubits, 3U);

  const auto phase = qasm::parse_or_throw("OPENQASM 2.0; qreg q[2]; x q[0]; cz q[0],q[1];");
  cat = categorize(vslice(phase, SliceMode::Standalone).slices[0]);
  EXPECT_EQ(cat.behaviour, Behaviour::FullQuantum);
  EXPECT_EQ(cat.evidence.diagonal_phase, 1U);

  const auto wide = qasm::parse_or_throw("OPENQASM 2.0; qreg q[6]; creg c[6]; x q; measure q -> c;");
  cat = categorize(vslice(wide, SliceMode::Standalone).slices[0]);
  EXPECT_EQ(cat.complexity, Complexity::Complex);
  EXPECT_EQ(cat.gate_count, 6U);
  EXPECT_EQ(categorize(vslice(wide, SliceMode::Standalone).slices[0], {6, 20}).complexity,
            Complexity::Simple);
  EXPECT_EQ(categorize(vslice(wide, SliceMode::Standalone).slices[0], {6, 5}).complexity,
            Complexity::Complex);
  EXPECT_THROW((void)categorize(vslice(wide, SliceMode::Standalone).slices[0], {0, 5}), Error);
}

TEST(Categorize, GateClasses) {
  EXPECT_EQ(gate_class(GateKind::Swap), GateClass::Permutation);
  EXPECT_EQ(gate_class(GateKind::MCX), GateClass::Permutation);
  EXPECT_EQ(gate_class(GateKind::Tdg), GateClass::DiagonalPhase);
  EXPECT_EQ(gate_class(GateKind::CP), GateClass::DiagonalPhase);
  EXPECT_EQ(gate_class(GateKind::Y), GateClass::Mixing);
  EXPECT_EQ(gate_class(GateKind::U), GateClass::Mixing);
  EXPECT_EQ(gate_class(GateKind::Measure), GateClass::None);
  EXPECT_EQ(gate_class(GateKind::Breakbarrier), GateClass::None);
}

// Property: anything categorised pseudo-classical has a 0/1 permutation
// matrix as its unitary.
TEST(Categorize, PseudoClassicalIsPermutation) {
  Rng rng(33);
  int classical = 0;
  for (int trial = 0; trial < 300; ++trial) {
    const bool perm_only = trial % 2 == 0;
    const auto c = testing::random_circuit(
        rng, {.max_qubits = 8, .max_gates = perm_only ? 30u : 4u, .gates = {.permutation_only = perm_only}});
    for (const auto& slice : vslice(c, SliceMode::Standalone).slices) {
      if (categorize(slice).behaviour != Behaviour::PseudoClassical) {
        continue;
      }
      ++classical;
      ASSERT_TRUE(testing::is_permutation_unitary(unitary_of(slice.circuit)))
          << qasm::emit(slice.circuit);
    }
  }
  EXPECT_GT(classical, 150);
}

TEST(Export, RoundTripsThroughParser) {
  Rng rng(34);
  for (int trial = 0; trial < 50; ++trial) {
    const auto c = testing::random_circuit(rng);
    for (const auto mode : {SliceMode::Standalone, SliceMode::Accumulated}) {
      for (const auto& slice : vslice(c, mode).slices) {
        for (const auto& s : {slice, hslice(slice)}) {
          if (s.circuit.num_qubits() == 0) {
            continue;
          }
          const auto text = emit_slice(s);
          const auto back = qasm::parse_or_throw(text);
          ASSERT_TRUE(same_instructions(back.instructions(), s.circuit.instructions())) << text;
          ASSERT_EQ(back.qregs(), s.circuit.qregs());
        }
      }
    }
  }
}

TEST(Export, HeaderAndFileName) {
  const auto c = qasm::parse_or_throw("OPENQASM 2.0; qreg q[2]; h q[1];");
  const auto s = hslice(vslice(c, SliceMode::Accumulated).slices[0]);
  EXPECT_EQ(emit_slice(s),
            "OPENQASM 2.0;\n// qcdb slice mode=accumulated index=0\n// qubit_map q[1]->q[0]\n"
            "// removed q[0]\nqreg q[1];\nh q[0];\n");
  EXPECT_EQ(slice_file_name("grover", 2), "grover.slice2.qasm");
}

} // namespace
} // namespace qcdb
