#pragma once

#include "qcdb/sim.hpp"

#include <json.hpp>

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace qcdb {

enum class StateKind { Basis, Uniform, Ghz, W, Dicke, Explicit };

std::string_view to_string(StateKind kind);

/// Description of a test input state. Only the payload field matching `kind`
/// is read: `bits` for basis, `k` for dicke, `amps` for explicit.
struct StateSpec {
  StateKind kind = StateKind::Basis;
  std::size_t n = 0;
  std::string bits;          // qubit 0 rightmost
  std::size_t k = 0;
  std::vector<Complex> amps; // length 2^n

  static StateSpec basis(std::string bits);
  static StateSpec uniform(std::size_t n);
  static StateSpec ghz(std::size_t n);
  static StateSpec w(std::size_t n);
  static StateSpec dicke(std::size_t n, std::size_t k);
  static StateSpec explicit_amps(std::size_t n, std::vector<Complex> amps);
};

/// Amplitude vector for the spec. Throws Error(InvalidSpec).
StateVector make_state(const StateSpec& spec);

/// {"kind":"dicke","n":4,"k":2}, {"kind":"basis","n":4,"bits":"0111"},
/// {"kind":"explicit","n":2,"amps":[[re,im],...]}. Throws Error(InvalidSpec).
StateSpec state_spec_from_json(const nlohmann::json& j);
nlohmann::json to_json(const StateSpec& spec);

/// Shorthand used by the shell: zero, uniform, ghz, w, dicke:K, basis:BITS.
/// `n` supplies the width for every form except basis. Throws Error(InvalidSpec).
StateSpec named_state_spec(std::string_view name, std::size_t n);

/// Accepts either a JSON object or a shorthand name.
StateSpec parse_state_arg(std::string_view text, std::size_t n);

} // namespace qcdb
