#include "qcdb/stateprep.hpp"
#include "support/generators.hpp"

#include <gtest/gtest.h>

#include <bit>
#include <cmath>
#include <numeric>

namespace qcdb {
namespace {

using testing::Rng;
using testing::uniform_int;

double binomial(std::size_t n, std::size_t k) {
  double r = 1;
  for (std::size_t i = 1; i <= k; ++i) {
    r = r * static_cast<double>(n - k + i) / static_cast<double>(i);
  }
  return r;
}

// Oracle: Dicke amplitudes written straight from the definition.
std::vector<Complex> dicke_oracle(std::size_t n, std::size_t k) {
  std::vector<Complex> out(std::size_t{1} << n);
  const double a = 1 / std::sqrt(binomial(n, k));
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (static_cast<std::size_t>(std::popcount(i)) == k) {
      out[i] = a;
    }
  }
  return out;
}

std::vector<Complex> amps_of(const StateVector& s) {
  return {s.amplitudes().begin(), s.amplitudes().end()};
}

double max_diff(const StateVector& s, const std::vector<Complex>& v) {
  double worst = 0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    worst = std::max(worst, std::abs(s[i] - v[i]));
  }
  return worst;
}

TEST(StatePrep, Ghz3) {
  const auto s = make_state(StateSpec::ghz(3));
  const double r = 1 / std::sqrt(2.0);
  std::vector<Complex> want(8);
  want[0] = want[7] = r;
  EXPECT_LT(max_diff(s, want), 1e-12);
}

TEST(StatePrep, W3) {
  const auto s = make_state(StateSpec::w(3));
  const double r = 1 / std::sqrt(3.0);
  std::vector<Complex> want(8);
  want[1] = want[2] = want[4] = r;
  EXPECT_LT(max_diff(s, want), 1e-12);
}

TEST(StatePrep, Dicke42) {
  const auto s = make_state(StateSpec::dicke(4, 2));
  const double r = 1 / std::sqrt(6.0);
  std::vector<Complex> want(16);
  for (std::size_t i : {3, 5, 6, 9, 10, 12}) {
    want[i] = r;
  }
  EXPECT_LT(max_diff(s, want), 1e-12);
}

TEST(StatePrep, BasisBitOrder) {
  const auto s = make_state(StateSpec::basis("0110"));
  EXPECT_EQ(s.num_qubits(), 4U);
  EXPECT_EQ(s[6], Complex(1, 0));
}

TEST(StatePrep, Uniform) {
  const auto s = make_state(StateSpec::uniform(4));
  for (std::size_t i = 0; i < 16; ++i) {
    EXPECT_NEAR(s[i].real(), 0.25, 1e-15);
  }
}

TEST(StatePrep, DickeEdgeIdentities) {
  for (std::size_t n = 1; n <= 8; ++n) {
    EXPECT_LT(max_diff(make_state(StateSpec::dicke(n, 0)), amps_of(StateVector(n))), 1e-15);
    EXPECT_LT(max_diff(make_state(StateSpec::dicke(n, n)),
                       amps_of(StateVector::basis(n, (std::size_t{1} << n) - 1))),
              1e-15);
    EXPECT_LT(max_diff(make_state(StateSpec::dicke(n, 1)), amps_of(make_state(StateSpec::w(n)))),
              1e-15);
  }
}

TEST(StatePrep, DickeMatchesDefinition) {
  for (std::size_t n = 1; n <= 10; ++n) {
    for (std::size_t k = 0; k <= n; ++k) {
      const auto s = make_state(StateSpec::dicke(n, k));
      ASSERT_LT(max_diff(s, dicke_oracle(n, k)), 1e-12) << n << "," << k;
      ASSERT_NEAR(s.norm_squared(), 1.0, 1e-12);
    }
  }
}

// Property: ghz, w and dicke are symmetric under any permutation of qubits.
TEST(StatePrep, SymmetricUnderQubitPermutation) {
  Rng rng(21);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = uniform_int(rng, 1, 6);
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    const StateSpec specs[] = {StateSpec::ghz(n), StateSpec::w(n),
                               StateSpec::dicke(n, uniform_int(rng, 0, n))};
    for (const auto& spec : specs) {
      const auto s = make_state(spec);
      for (std::size_t i = 0; i < s.size(); ++i) {
        std::size_t j = 0;
        for (std::size_t q = 0; q < n; ++q) {
          if ((i >> q) & 1U) {
            j |= std::size_t{1} << perm[q];
          }
        }
        ASSERT_EQ(s[i], s[j]);
      }
    }
  }
}

TEST(StatePrep, InvalidSpecs) {
  const StateSpec bad[] = {StateSpec::dicke(3, 4), StateSpec::basis("01x"), StateSpec::basis(""),
                           StateSpec::ghz(0),      StateSpec::uniform(31),
                           StateSpec::explicit_amps(1, {{1, 0}, {1, 0}}),
                           StateSpec::explicit_amps(2, {{1, 0}})};
  for (const auto& spec : bad) {
    try {
      (void)make_state(spec);
      ADD_FAILURE() << to_json(spec).dump();
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::InvalidSpec);
    }
  }
}

TEST(StatePrep, Explicit) {
  const double r = 1 / std::sqrt(2.0);
  const auto s = make_state(StateSpec::explicit_amps(1, {{r, 0}, {0, -r}}));
  EXPECT_EQ(s[1], Complex(0, -r));
}

TEST(StateJson, ParsesEveryKind) {
  using nlohmann::json;
  EXPECT_EQ(state_spec_from_json(json::parse(R"({"kind":"dicke","n":4,"k":2})")).k, 2U);
  EXPECT_EQ(state_spec_from_json(json::parse(R"({"kind":"basis","bits":"0111"})")).bits, "0111");
  const auto e = state_spec_from_json(json::parse(R"({"kind":"explicit","n":1,"amps":[[0,0],[0,1]]})"));
  EXPECT_EQ(e.amps[1], Complex(0, 1));
  const auto real = state_spec_from_json(json::parse(R"({"kind":"explicit","n":1,"amps":[0,1]})"));
  EXPECT_EQ(real.amps[1], Complex(1, 0));
  EXPECT_EQ(state_spec_from_json(json::parse(R"({"kind":"ghz","n":3})")).kind, StateKind::Ghz);
}

TEST(StateJson, RoundTrip) {
  const StateSpec specs[] = {StateSpec::basis("101"), StateSpec::uniform(3), StateSpec::ghz(2),
                             StateSpec::w(4), StateSpec::dicke(5, 2),
                             StateSpec::explicit_amps(1, {{0.6, 0}, {0, 0.8}})};
  for (const auto& spec : specs) {
    const auto again = state_spec_from_json(to_json(spec));
    const auto a = make_state(spec);
    const auto b = make_state(again);
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
      EXPECT_EQ(a[i], b[i]);
    }
  }
}

TEST(StateJson, Rejects) {
  const char* bad[] = {R"({"kind":"nope","n":2})", R"({"n":2})", R"([1,2])",
                       R"({"kind":"dicke","n":"4","k":2})", R"({"kind":"ghz","n":-3})", R"({"kind":"explicit","n":1,"amps":[[1,0,0],[0,0]]})"};
  for (const char* text : bad) {
    try {
      (void)state_spec_from_json(nlohmann::json::parse(text));
      ADD_FAILURE() << text;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::InvalidSpec) << text;
    }
  }
}

TEST(StateNames, Shorthands) {
  EXPECT_EQ(named_state_spec("zero", 3).bits, "000");
  EXPECT_EQ(named_state_spec("uniform", 3).kind, StateKind::Uniform);
  EXPECT_EQ(named_state_spec("dicke:2", 4).k, 2U);
  EXPECT_EQ(named_state_spec("basis:0101", 9).bits, "0101");
  EXPECT_EQ(parse_state_arg(R"({"kind":"w","n":3})", 9).n, 3U);
  EXPECT_EQ(parse_state_arg("ghz", 5).n, 5U);
  EXPECT_THROW((void)named_state_spec("dicke:x", 4), Error);
  EXPECT_THROW((void)named_state_spec("cat", 4), Error);
  EXPECT_THROW((void)parse_state_arg("{not json", 4), Error);
}

} // namespace
} // namespace qcdb
