#include "qcdb/stateprep.hpp"

#include <fmt/format.h>

#include <bit>
#include <cmath>
#include <cstdlib>

namespace qcdb {

namespace {

constexpr std::size_t kMaxSpecQubits = 30;

[[noreturn]] void invalid(const std::string& message) {
  throw Error(ErrorCode::InvalidSpec, message);
}

void check_width(std::size_t n) {
  if (n == 0) {
    invalid("a state spec needs n >= 1");
  }
  if (n > kMaxSpecQubits) {
    invalid(fmt::format("n = {} is too large for a state spec", n));
  }
}

// Equal superposition over all basis indices of Hamming weight k.
StateVector weight_superposition(std::size_t n, std::size_t k) {
  const std::uint64_t dim = std::uint64_t{1} << n;
  std::size_t count = 0;
  for (std::uint64_t i = 0; i < dim; ++i) {
    count += static_cast<std::size_t>(std::popcount(i)) == k ? 1 : 0;
  }
  const double a = 1.0 / std::sqrt(static_cast<double>(count));
  std::vector<Complex> amps(dim);
  for (std::uint64_t i = 0; i < dim; ++i) {
    if (static_cast<std::size_t>(std::popcount(i)) == k) {
      amps[i] = a;
    }
  }
  return StateVector(n, std::move(amps));
}

std::size_t unsigned_field(const nlohmann::json& v, const char* what) {
  if (!v.is_number_unsigned()) {
    invalid(fmt::format("'{}' must be a non-negative integer", what));
  }
  return v.get<std::size_t>();
}

StateKind kind_from_name(std::string_view name) {
  if (name == "basis") return StateKind::Basis;
  if (name == "uniform") return StateKind::Uniform;
  if (name == "ghz") return StateKind::Ghz;
  if (name == "w") return StateKind::W;
  if (name == "dicke") return StateKind::Dicke;
  if (name == "explicit") return StateKind::Explicit;
  invalid(fmt::format("unknown state kind '{}'", name));
}

} // namespace

std::string_view to_string(StateKind kind) {
  switch (kind) {
  case StateKind::Basis: return "basis";
  case StateKind::Uniform: return "uniform";
  case StateKind::Ghz: return "ghz";
  case StateKind::W: return "w";
  case StateKind::Dicke: return "dicke";
  case StateKind::Explicit: return "explicit";
  }
  return "?";
}

StateSpec StateSpec::basis(std::string bits) {
  StateSpec s;
  s.kind = StateKind::Basis;
  s.n = bits.size();
  s.bits = std::move(bits);
  return s;
}

StateSpec StateSpec::uniform(std::size_t n) { return {StateKind::Uniform, n, {}, 0, {}}; }
StateSpec StateSpec::ghz(std::size_t n) { return {StateKind::Ghz, n, {}, 0, {}}; }
StateSpec StateSpec::w(std::size_t n) { return {StateKind::W, n, {}, 0, {}}; }
StateSpec StateSpec::dicke(std::size_t n, std::size_t k) { return {StateKind::Dicke, n, {}, k, {}}; }

StateSpec StateSpec::explicit_amps(std::size_t n, std::vector<Complex> amps) {
  return {StateKind::Explicit, n, {}, 0, std::move(amps)};
}

StateVector make_state(const StateSpec& spec) {
  check_width(spec.n);
  const std::size_t n = spec.n;
  switch (spec.kind) {
  case StateKind::Basis: {
    if (spec.bits.size() != n) {
      invalid(fmt::format("basis bits '{}' have length {}, expected {}", spec.bits,
                          spec.bits.size(), n));
    }
    std::uint64_t index = 0;
    for (std::size_t pos = 0; pos < n; ++pos) {
      const char c = spec.bits[n - 1 - pos];
      if (c != '0' && c != '1') {
        invalid(fmt::format("basis bits '{}' must be 0/1", spec.bits));
      }
      index |= static_cast<std::uint64_t>(c == '1') << pos;
    }
    return StateVector::basis(n, index);
  }
  case StateKind::Uniform: {
    const std::size_t dim = std::size_t{1} << n;
    const double a = 1.0 / std::sqrt(static_cast<double>(dim));
    return StateVector(n, std::vector<Complex>(dim, a));
  }
  case StateKind::Ghz: {
    std::vector<Complex> amps(std::size_t{1} << n);
    amps.front() = amps.back() = 1.0 / std::sqrt(2.0);
    return StateVector(n, std::move(amps));
  }
  case StateKind::W:
    return weight_superposition(n, 1);
  case StateKind::Dicke:
    if (spec.k > n) {
      invalid(fmt::format("dicke k = {} exceeds n = {}", spec.k, n));
    }
    return weight_superposition(n, spec.k);
  case StateKind::Explicit:
    if (spec.amps.size() != (std::size_t{1} << n)) {
      invalid(fmt::format("explicit state has {} amplitudes, expected {}", spec.amps.size(),
                          std::size_t{1} << n));
    }
    return StateVector(n, spec.amps);
  }
  invalid("unhandled state kind");
}

StateSpec state_spec_from_json(const nlohmann::json& j) {
  if (!j.is_object()) {
    invalid("state spec must be a JSON object");
  }
  try {
    StateSpec s;
    s.kind = kind_from_name(j.at("kind").get<std::string>());
    if (s.kind == StateKind::Basis) {
      s.bits = j.at("bits").get<std::string>();
      s.n = j.contains("n") ? unsigned_field(j.at("n"), "n") : s.bits.size();
    } else {
      s.n = unsigned_field(j.at("n"), "n");
    }
    if (s.kind == StateKind::Dicke) {
      s.k = unsigned_field(j.at("k"), "k");
    }
    if (s.kind == StateKind::Explicit) {
      for (const auto& a : j.at("amps")) {
        if (a.is_number()) {
          s.amps.emplace_back(a.get<double>(), 0.0);
        } else if (a.is_array() && a.size() == 2) {
          s.amps.emplace_back(a[0].get<double>(), a[1].get<double>());
        } else {
          invalid("explicit amplitudes must be numbers or [re, im] pairs");
        }
      }
    }
    return s;
  } catch (const nlohmann::json::exception& e) {
    invalid(fmt::format("malformed state spec: {}", e.what()));
  }
}

nlohmann::json to_json(const StateSpec& spec) {
  nlohmann::json j{{"kind", to_string(spec.kind)}, {"n", spec.n}};
  switch (spec.kind) {
  case StateKind::Basis: j["bits"] = spec.bits; break;
  case StateKind::Dicke: j["k"] = spec.k; break;
  case StateKind::Explicit: {
    auto amps = nlohmann::json::array();
    for (const auto& a : spec.amps) {
      amps.push_back({a.real(), a.imag()});
    }
    j["amps"] = std::move(amps);
    break;
  }
  default: break;
  }
  return j;
}

StateSpec named_state_spec(std::string_view name, std::size_t n) {
  if (name == "zero") return StateSpec::basis(std::string(n, '0'));
  if (name == "uniform") return StateSpec::uniform(n);
  if (name == "ghz") return StateSpec::ghz(n);
  if (name == "w") return StateSpec::w(n);
  if (name.starts_with("basis:")) return StateSpec::basis(std::string(name.substr(6)));
  if (name.starts_with("dicke:")) {
    const std::string k(name.substr(6));
    char* end = nullptr;
    const unsigned long v = std::strtoul(k.c_str(), &end, 10);
    if (k.empty() || *end != '\0') {
      invalid(fmt::format("bad dicke excitation count '{}'", k));
    }
    return StateSpec::dicke(n, v);
  }
  invalid(fmt::format("unknown state name '{}' (zero, uniform, ghz, w, dicke:K, basis:BITS)",
                      name));
}

StateSpec parse_state_arg(std::string_view text, std::size_t n) {
  const auto first = text.find_first_not_of(" \t");
  if (first != std::string_view::npos && text[first] == '{') {
    const auto j = nlohmann::json::parse(text, nullptr, false);
    if (j.is_discarded()) {
      invalid("state spec is not valid JSON");
    }
    return state_spec_from_json(j);
  }
  return named_state_spec(text, n);
}

} // namespace qcdb
