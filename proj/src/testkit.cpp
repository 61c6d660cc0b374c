#include "qcdb/testkit.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <future>
#include <numbers>
#include <sstream>

namespace qcdb {

namespace {

using nlohmann::json;

[[noreturn]] void bad_case(const std::string& message) {
  throw Error(ErrorCode::InvalidTestCase, message);
}

std::uint64_t unsigned_field(const json& v, const char* what) {
  if (!v.is_number_unsigned()) {
    bad_case(fmt::format("'{}' must be a non-negative integer", what));
  }
  return v.get<std::uint64_t>();
}

double max_deviation_at(const Matrix& u, const Matrix& d, double phi) {
  const Complex phase = std::polar(1.0, phi);
  double worst = 0.0;
  for (std::size_t r = 0; r < u.dim(); ++r) {
    for (std::size_t c = 0; c < u.dim(); ++c) {
      worst = std::max(worst, std::abs(u(r, c) - phase * d(r, c)));
    }
  }
  return worst;
}

Complex complex_from_json(const json& v) {
  if (v.is_number()) {
    return {v.get<double>(), 0.0};
  }
  if (v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number()) {
    return {v[0].get<double>(), v[1].get<double>()};
  }
  bad_case("amplitude must be a number or a [re, im] pair");
}

json counts_json(const CountsMap& counts) {
  json j = json::object();
  for (const auto& [label, n] : counts.counts) {
    j[label] = n;
  }
  return {{"shots", counts.shots}, {"counts", std::move(j)}};
}

// Appends register-wide measurements into fresh classical registers m_<reg>.
Circuit with_measurements(const Circuit& circuit, const std::vector<std::string>& regs) {
  if (circuit.has_measurements()) {
    bad_case("'measure' given for a slice that already measures");
  }
  std::vector<ClassicalRegister> cregs;
  auto body = circuit.instructions();
  for (const auto& name : regs) {
    const auto* reg = circuit.find_qreg(name);
    if (reg == nullptr) {
      bad_case(fmt::format("'measure' names unknown register '{}'", name));
    }
    const std::string cname = "m_" + name;
    cregs.push_back({cname, reg->size});
    for (std::size_t i = 0; i < reg->size; ++i) {
      body.emplace_back(GateKind::Measure, std::vector<double>{},
                        std::vector<BitRef>{{name, i}}, std::vector<BitRef>{{cname, i}});
    }
  }
  return Circuit(circuit.qregs(), std::move(cregs), std::move(body), circuit.debug_mode());
}

Distribution basis_distribution(const StateVector& state) {
  Distribution d;
  const auto amps = state.amplitudes();
  for (std::uint64_t i = 0; i < amps.size(); ++i) {
    const double p = std::norm(amps[i]);
    if (p > 0.0) {
      d[basis_label(i, state.num_qubits())] = p;
    }
  }
  return d;
}

json distribution_json(const Distribution& d) {
  json j = json::object();
  for (const auto& [label, p] : d) {
    j[label] = p;
  }
  return j;
}

Slice resolve_slice(const Circuit& circuit, const std::vector<Slice>& slices,
                    const TestCase& test) {
  if (!test.slice) {
    return Slice{0, SliceMode::Standalone, strip_breakbarriers(circuit), circuit.all_qubits(), {}};
  }
  std::vector<Slice> own;
  const std::vector<Slice>* source = &slices;
  if (test.mode && (slices.empty() || slices.front().mode != *test.mode)) {
    own = vslice(circuit, *test.mode).slices;
    source = &own;
  }
  if (*test.slice >= source->size()) {
    throw Error(ErrorCode::SliceNotFound,
                fmt::format("slice {} does not exist ({} slices)", *test.slice, source->size()));
  }
  return (*source)[*test.slice];
}

void evaluate(const TestCase& test, const Slice& slice, const SimOptions& options,
              TestReport& report) {
  if (const auto* exp = std::get_if<DiffusionExpectation>(&test.expect)) {
    const auto d = diffusion_check(slice, exp->tolerance);
    report.deviation = d.deviation;
    report.tolerance = exp->tolerance;
    report.observed = {{"qubits", d.qubits}, {"phase", d.phase}};
    report.status = d.pass ? TestStatus::Pass : TestStatus::Fail;
    return;
  }

  if (!test.init) {
    bad_case("'init' is required for this expectation");
  }
  const StateVector init = make_state(*test.init);
  if (init.num_qubits() != slice.circuit.num_qubits()) {
    throw Error(ErrorCode::QubitCountMismatch,
                fmt::format("init has {} qubits but the slice has {}", init.num_qubits(),
                            slice.circuit.num_qubits()));
  }
  const Circuit circuit =
      test.measure.empty() ? slice.circuit : with_measurements(slice.circuit, test.measure);
  const auto* sampling = std::get_if<SamplingRun>(&test.run);

  if (const auto* exp = std::get_if<ExactAmplitudes>(&test.expect)) {
    if (sampling != nullptr) {
      bad_case("exact_amplitudes needs statevector mode");
    }
    const auto state = run_statevector(circuit, init, options);
    const std::size_t n = state.num_qubits();
    std::vector<Complex> expected(state.size());
    for (const auto& [label, amp] : exp->amplitudes) {
      if (label.size() != n || label.find_first_not_of("01") != std::string::npos) {
        bad_case(fmt::format("amplitude label '{}' is not a {}-bit string", label, n));
      }
      expected[std::stoull(label, nullptr, 2)] = amp;
    }
    double worst = 0.0;
    json observed = json::object();
    for (std::uint64_t i = 0; i < state.size(); ++i) {
      worst = std::max(worst, std::abs(state[i] - expected[i]));
      if (std::abs(state[i]) >= kDumpThreshold) {
        observed[basis_label(i, n)] = {state[i].real(), state[i].imag()};
      }
    }
    report.observed = std::move(observed);
    report.deviation = worst;
    report.tolerance = exp->tolerance;
    report.status = worst <= exp->tolerance ? TestStatus::Pass : TestStatus::Fail;
    return;
  }

  if (const auto* exp = std::get_if<DistributionExpectation>(&test.expect)) {
    Distribution observed;
    if (sampling != nullptr) {
      const auto counts = sample(circuit, init, sampling->shots, sampling->seed, options);
      observed = frequencies(counts);
      report.observed = counts_json(counts);
    } else {
      observed = circuit.has_measurements()
                     ? measurement_distribution(circuit, init, options)
                     : basis_distribution(run_statevector(circuit, init, options));
      report.observed = distribution_json(observed);
    }
    report.deviation = tvd(observed, exp->distribution);
    report.tolerance = exp->tvd_tolerance;
    report.status = report.deviation <= exp->tvd_tolerance ? TestStatus::Pass : TestStatus::Fail;
    return;
  }

  const auto* present = std::get_if<PatternPresent>(&test.expect);
  const auto* absent = std::get_if<PatternAbsent>(&test.expect);
  const OutcomePattern& pattern = present != nullptr ? present->pattern : absent->pattern;
  if (sampling == nullptr) {
    bad_case("pattern expectations need sampling mode");
  }
  const auto counts = sample(circuit, init, sampling->shots, sampling->seed, options);
  const auto hits = filter_counts(counts, pattern);
  report.observed = counts_json(counts);
  for (const auto& [label, n] : hits.counts) {
    report.matched_outcomes.push_back(label);
  }
  report.deviation = static_cast<double>(hits.shots) / static_cast<double>(counts.shots);
  const bool ok = present != nullptr ? hits.shots > 0 : hits.shots == 0;
  report.status = ok ? TestStatus::Pass : TestStatus::Fail;
}

std::string utf8_middle_dot() { return "\xC2\xB7"; }

} // namespace

IterationEstimate opt_iterations(std::uint64_t N, std::uint64_t m) {
  if (m < 1 || m > N) {
    throw Error(ErrorCode::InvalidCounts,
                fmt::format("need N >= m >= 1, got N = {}, m = {}", N, m));
  }
  const double ratio = static_cast<double>(N) / static_cast<double>(m);
  const auto iters = static_cast<std::uint64_t>(std::floor(std::numbers::pi / 4 * std::sqrt(ratio)));
  return {N, m, iters};
}

OutcomePattern::OutcomePattern(std::string_view text) {
  const std::string dot = utf8_middle_dot();
  for (std::size_t i = 0; i < text.size();) {
    if (text.substr(i, dot.size()) == dot) {
      mask_ += '.';
      i += dot.size();
      continue;
    }
    const char c = text[i++];
    if (c != '0' && c != '1' && c != '.' && c != ' ') {
      throw Error(ErrorCode::InvalidSpec,
                  fmt::format("pattern '{}' may only contain 0, 1, '.', '·' and spaces", text));
    }
    mask_ += c;
  }
}

bool OutcomePattern::matches(std::string_view outcome) const {
  if (outcome.size() != mask_.size()) {
    return false;
  }
  for (std::size_t i = 0; i < mask_.size(); ++i) {
    if (mask_[i] != '.' && mask_[i] != outcome[i]) {
      return false;
    }
  }
  return true;
}

CountsMap filter_counts(const CountsMap& counts, const OutcomePattern& pattern) {
  CountsMap out;
  for (const auto& [label, n] : counts.counts) {
    if (label.size() != pattern.str().size()) {
      throw Error(ErrorCode::PatternLengthMismatch,
                  fmt::format("pattern '{}' has length {} but outcome '{}' has length {}",
                              pattern.str(), pattern.str().size(), label, label.size()));
    }
    if (pattern.matches(label)) {
      out.counts.emplace(label, n);
      out.shots += n;
    }
  }
  return out;
}

double tvd(const Distribution& p, const Distribution& q) {
  std::optional<std::size_t> width;
  auto check = [&](const std::string& label) {
    if (width && *width != label.size()) {
      throw Error(ErrorCode::DomainMismatch,
                  fmt::format("outcome '{}' does not match the {}-character domain", label,
                              *width));
    }
    width = label.size();
  };
  double total = 0.0;
  for (const auto& [label, pv] : p) {
    check(label);
    const auto it = q.find(label);
    total += std::abs(pv - (it == q.end() ? 0.0 : it->second));
  }
  for (const auto& [label, qv] : q) {
    check(label);
    if (!p.contains(label)) {
      total += std::abs(qv);
    }
  }
  return total / 2;
}

Distribution frequencies(const CountsMap& counts) {
  Distribution d;
  for (const auto& [label, n] : counts.counts) {
    d[label] = static_cast<double>(n) / static_cast<double>(counts.shots);
  }
  return d;
}

DiffusionReport diffusion_check(const Circuit& circuit, double tolerance) {
  const Matrix u = unitary_of(circuit);
  const std::size_t dim = u.dim();
  Matrix d(dim);
  const double s = 2.0 / static_cast<double>(dim);
  for (std::size_t r = 0; r < dim; ++r) {
    for (std::size_t c = 0; c < dim; ++c) {
      d(r, c) = r == c ? s - 1.0 : s;
    }
  }

  // Least-squares phase arg tr(D^dagger U) is exact when U = e^{i phi} D.
  // Otherwise the max-norm can bottom out elsewhere, so a coarse scan of the
  // circle picks a bracket and golden-section search refines it.
  Complex overlap{};
  for (std::size_t r = 0; r < dim; ++r) {
    for (std::size_t c = 0; c < dim; ++c) {
      overlap += std::conj(d(r, c)) * u(r, c);
    }
  }
  const double phi0 = std::abs(overlap) > 1e-12 ? std::arg(overlap) : 0.0;
  constexpr int kScan = 1024;
  const double step = 2 * std::numbers::pi / kScan;
  double best_phi = phi0;
  double best = max_deviation_at(u, d, phi0);
  for (int i = 0; i < kScan; ++i) {
    const double phi = phi0 + i * step;
    if (const double f = max_deviation_at(u, d, phi); f < best) {
      best = f;
      best_phi = phi;
    }
  }
  double lo = best_phi - step;
  double hi = best_phi + step;
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = hi - g * (hi - lo);
  double b = lo + g * (hi - lo);
  double fa = max_deviation_at(u, d, a);
  double fb = max_deviation_at(u, d, b);
  for (int it = 0; it < 60; ++it) {
    if (fa < fb) {
      hi = b;
      b = a;
      fb = fa;
      a = hi - g * (hi - lo);
      fa = max_deviation_at(u, d, a);
    } else {
      lo = a;
      a = b;
      fa = fb;
      b = lo + g * (hi - lo);
      fb = max_deviation_at(u, d, b);
    }
  }
  DiffusionReport report;
  report.qubits = circuit.num_qubits();
  report.phase = best_phi;
  report.deviation = best;
  const double mid = (lo + hi) / 2;
  if (const double fm = max_deviation_at(u, d, mid); fm < report.deviation) {
    report.deviation = fm;
    report.phase = mid;
  }
  report.phase = std::remainder(report.phase, 2 * std::numbers::pi);
  report.pass = report.deviation <= tolerance;
  return report;
}

DiffusionReport diffusion_check(const Slice& slice, double tolerance) {
  return diffusion_check(slice.circuit, tolerance);
}

std::string_view to_string(TestStatus s) {
  switch (s) {
  case TestStatus::Pass: return "pass";
  case TestStatus::Fail: return "fail";
  case TestStatus::Error: return "error";
  }
  return "?";
}

TestReport run_test(const Circuit& circuit, const std::vector<Slice>& slices,
                    const TestCase& test, const SimOptions& options) {
  TestReport report;
  report.name = test.name;
  try {
    Slice slice = resolve_slice(circuit, slices, test);
    if (test.hslice) {
      slice = hslice(slice);
    }
    evaluate(test, slice, options, report);
  } catch (const Error& e) {
    report.status = TestStatus::Error;
    report.message = fmt::format("{}: {}", to_string(e.code()), e.what());
  }
  return report;
}

TestCase test_case_from_json(const json& j) {
  if (!j.is_object()) {
    bad_case("test case must be a JSON object");
  }
  try {
    TestCase t;
    t.name = j.at("name").get<std::string>();
    const auto& slice = j.at("slice");
    if (slice.is_string()) {
      if (slice.get<std::string>() != "full") {
        bad_case(fmt::format("case '{}': slice must be an index or \"full\"", t.name));
      }
    } else {
      t.slice = unsigned_field(slice, "slice");
    }
    if (j.contains("mode")) {
      t.mode = slice_mode_from_name(j.at("mode").get<std::string>());
    }
    t.hslice = j.value("hslice", false);
    if (j.contains("init")) {
      t.init = state_spec_from_json(j.at("init"));
    }
    if (j.contains("run")) {
      const auto& run = j.at("run");
      const auto mode = run.at("mode").get<std::string>();
      if (mode == "sampling") {
        SamplingRun s;
        s.shots = unsigned_field(run.at("shots"), "shots");
        if (run.contains("seed")) {
          s.seed = unsigned_field(run.at("seed"), "seed");
        }
        if (s.shots == 0) {
          bad_case(fmt::format("case '{}': shots must be positive", t.name));
        }
        t.run = s;
      } else if (mode != "statevector") {
        bad_case(fmt::format("case '{}': unknown run mode '{}'", t.name, mode));
      }
    }
    if (j.contains("measure")) {
      t.measure = j.at("measure").get<std::vector<std::string>>();
    }

    const auto& e = j.at("expect");
    if (!e.is_object() || e.size() == 0) {
      bad_case(fmt::format("case '{}': 'expect' must be a non-empty object", t.name));
    }
    if (e.contains("exact_amplitudes")) {
      ExactAmplitudes x;
      for (const auto& [label, v] : e.at("exact_amplitudes").items()) {
        x.amplitudes[label] = complex_from_json(v);
      }
      x.tolerance = e.value("tolerance", 1e-9);
      if (!(x.tolerance > 0)) {
        bad_case(fmt::format("case '{}': tolerance must be positive", t.name));
      }
      t.expect = std::move(x);
    } else if (e.contains("distribution")) {
      DistributionExpectation x;
      double sum = 0.0;
      for (const auto& [label, v] : e.at("distribution").items()) {
        x.distribution[label] = v.get<double>();
        sum += x.distribution[label];
      }
      if (std::abs(sum - 1.0) > 1e-9) {
        bad_case(fmt::format("case '{}': distribution sums to {}, not 1", t.name, sum));
      }
      x.tvd_tolerance = e.value("tvd_tolerance", 0.01);
      if (!(x.tvd_tolerance > 0)) {
        bad_case(fmt::format("case '{}': tvd_tolerance must be positive", t.name));
      }
      t.expect = std::move(x);
    } else if (e.contains("pattern_present")) {
      t.expect = PatternPresent{OutcomePattern(e.at("pattern_present").get<std::string>())};
    } else if (e.contains("pattern_absent")) {
      t.expect = PatternAbsent{OutcomePattern(e.at("pattern_absent").get<std::string>())};
    } else if (e.contains("diffusion")) {
      DiffusionExpectation x;
      x.tolerance = e.value("tolerance", kDiffusionTolerance);
      if (!(x.tolerance > 0)) {
        bad_case(fmt::format("case '{}': tolerance must be positive", t.name));
      }
      t.expect = x;
    } else {
      bad_case(fmt::format("case '{}': unknown expectation", t.name));
    }
    return t;
  } catch (const json::exception& ex) {
    bad_case(fmt::format("malformed test case: {}", ex.what()));
  } catch (const Error& ex) {
    if (ex.code() == ErrorCode::InvalidTestCase) {
      throw;
    }
    bad_case(ex.what());
  }
}

TestSuite suite_from_json(const json& j, const std::filesystem::path& base_dir) {
  if (!j.is_object()) {
    bad_case("suite must be a JSON object");
  }
  try {
    TestSuite s;
    const std::filesystem::path circuit = j.at("circuit").get<std::string>();
    s.circuit = circuit.is_absolute() ? circuit : base_dir / circuit;
    s.mode = slice_mode_from_name(j.value("mode", std::string("standalone")));
    for (const auto& c : j.at("cases")) {
      s.cases.push_back(test_case_from_json(c));
    }
    return s;
  } catch (const json::exception& ex) {
    bad_case(fmt::format("malformed suite: {}", ex.what()));
  } catch (const Error& ex) {
    if (ex.code() == ErrorCode::InvalidTestCase) {
      throw;
    }
    bad_case(ex.what());
  }
}

TestSuite load_suite(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorCode::IoError, fmt::format("cannot read suite '{}'", path.string()));
  }
  const auto j = json::parse(in, nullptr, false);
  if (j.is_discarded()) {
    bad_case(fmt::format("suite '{}' is not valid JSON", path.string()));
  }
  return suite_from_json(j, path.parent_path());
}

bool SuiteReport::all_passed() const {
  return std::all_of(reports.begin(), reports.end(),
                     [](const TestReport& r) { return r.status == TestStatus::Pass; });
}

SuiteReport run_suite(const Circuit& circuit, const TestSuite& suite, const SimOptions& options) {
  const auto slices = vslice(circuit, suite.mode).slices;
  std::vector<std::future<TestReport>> pending;
  pending.reserve(suite.cases.size());
  for (const auto& test : suite.cases) {
    pending.push_back(std::async(std::launch::async, [&, test] {
      return run_test(circuit, slices, test, options);
    }));
  }
  SuiteReport out;
  for (auto& f : pending) {
    out.reports.push_back(f.get());
  }
  std::stable_sort(out.reports.begin(), out.reports.end(),
                   [](const TestReport& a, const TestReport& b) { return a.name < b.name; });
  return out;
}

std::string render_table(const SuiteReport& report) {
  std::size_t width = 4;
  for (const auto& r : report.reports) {
    width = std::max(width, r.name.size());
  }
  std::ostringstream out;
  out << fmt::format("{:<{}}  {:<6} {:>12} {:>12}  detail\n", "case", width, "status",
                     "deviation", "tolerance");
  std::size_t passed = 0;
  for (const auto& r : report.reports) {
    std::string detail = r.message;
    if (detail.empty() && !r.matched_outcomes.empty()) {
      detail = "matched";
      for (const auto& m : r.matched_outcomes) {
        detail += " " + m;
      }
    }
    // Pattern checks and errors have no numeric tolerance.
    const bool pattern = r.tolerance == 0.0;
    std::string line = fmt::format("{:<{}}  {:<6} {:>12.4g} {:>12}  {}", r.name, width,
                                   to_string(r.status), r.deviation,
                                   pattern ? std::string("-") : fmt::format("{:.4g}", r.tolerance),
                                   detail);
    line.erase(line.find_last_not_of(' ') + 1);
    out << line << "\n";
    passed += r.status == TestStatus::Pass ? 1 : 0;
  }
  out << fmt::format("{}/{} passed\n", passed, report.reports.size());
  return out.str();
}

json to_json(const TestReport& r) {
  return json{{"name", r.name},
              {"status", to_string(r.status)},
              {"observed", r.observed},
              {"deviation", r.deviation},
              {"tolerance", r.tolerance},
              {"matched_outcomes", r.matched_outcomes},
              {"message", r.message}};
}

json to_json(const SuiteReport& report) {
  json cases = json::array();
  for (const auto& r : report.reports) {
    cases.push_back(to_json(r));
  }
  const auto passed = std::count_if(report.reports.begin(), report.reports.end(),
                                    [](const auto& r) { return r.status == TestStatus::Pass; });
  return json{{"passed", report.all_passed()},
              {"passed_count", passed},
              {"total", report.reports.size()},
              {"cases", std::move(cases)}};
}

} // namespace qcdb
