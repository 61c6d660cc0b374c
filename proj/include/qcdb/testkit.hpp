#pragma once

#include "qcdb/slicer.hpp"
#include "qcdb/sim.hpp"
#include "qcdb/stateprep.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace qcdb {

struct IterationEstimate {
  std::uint64_t N = 0;
  std::uint64_t m = 0;
  std::uint64_t opt_iter = 0;
};

/// floor(pi/4 * sqrt(N/m)). Throws Error(InvalidCounts) unless N >= m >= 1.
IterationEstimate opt_iterations(std::uint64_t N, std::uint64_t m);

/// Fixed-width mask over displayed outcome characters: '0', '1', '.' (wildcard)
/// and ' ' (register separator, must match). The middle dot U+00B7 is accepted
/// as a wildcard and normalised to '.'.
class OutcomePattern {
public:
  explicit OutcomePattern(std::string_view text);

  [[nodiscard]] const std::string& str() const { return mask_; }
  [[nodiscard]] bool matches(std::string_view outcome) const;

private:
  std::string mask_;
};

/// Throws Error(PatternLengthMismatch) if any outcome differs in length.
CountsMap filter_counts(const CountsMap& counts, const OutcomePattern& pattern);

/// 1/2 sum |p_i - q_i| with missing outcomes treated as 0.
/// Throws Error(DomainMismatch) when outcome labels differ in length.
double tvd(const Distribution& p, const Distribution& q);

/// Empirical frequencies count/shots.
Distribution frequencies(const CountsMap& counts);

inline constexpr double kDiffusionTolerance = 1e-6;

struct DiffusionReport {
  bool pass = false;
  /// min over phi of max_ij |U - e^{i phi} D_ref|
  double deviation = 0.0;
  double phase = 0.0;
  std::size_t qubits = 0;
};

/// Compares the slice's unitary with 2|s><s| - I on its own qubits, up to a
/// global phase. Errors: CapExceeded, MeasurementPresent.
DiffusionReport diffusion_check(const Circuit& circuit, double tolerance = kDiffusionTolerance);
DiffusionReport diffusion_check(const Slice& slice, double tolerance = kDiffusionTolerance);

struct StatevectorRun {};
struct SamplingRun {
  std::uint64_t shots = 1024;
  std::uint64_t seed = 0;
};
using RunMode = std::variant<StatevectorRun, SamplingRun>;

struct ExactAmplitudes {
  std::map<std::string, Complex> amplitudes; // unlisted basis states expect 0
  double tolerance = 1e-9;
};
struct DistributionExpectation {
  Distribution distribution;
  double tvd_tolerance = 0.01;
};
struct PatternPresent {
  OutcomePattern pattern;
};
struct PatternAbsent {
  OutcomePattern pattern;
};
struct DiffusionExpectation {
  double tolerance = kDiffusionTolerance;
};
using Expectation = std::variant<ExactAmplitudes, DistributionExpectation, PatternPresent,
                                 PatternAbsent, DiffusionExpectation>;

struct TestCase {
  std::string name;
  std::optional<std::size_t> slice; // nullopt = full circuit
  /// Overrides the suite's slicing mode for this case.
  std::optional<SliceMode> mode;
  bool hslice = false;
  std::optional<StateSpec> init; // not needed for diffusion checks
  RunMode run = StatevectorRun{};
  /// Quantum registers to measure (into fresh classical registers, in this
  /// order) before sampling. Empty = use the circuit's own measurements.
  std::vector<std::string> measure;
  Expectation expect = ExactAmplitudes{};
};

enum class TestStatus { Pass, Fail, Error };
std::string_view to_string(TestStatus s);

struct TestReport {
  std::string name;
  TestStatus status = TestStatus::Error;
  nlohmann::json observed;
  double deviation = 0.0;
  double tolerance = 0.0;
  std::vector<std::string> matched_outcomes;
  std::string message;
};

/// Executes one case. Mismatches give status Fail; execution errors (unknown
/// slice, wrong init width, simulator errors) give status Error.
TestReport run_test(const Circuit& circuit, const std::vector<Slice>& slices,
                    const TestCase& test, const SimOptions& options = {});

/// Throws Error(InvalidTestCase).
TestCase test_case_from_json(const nlohmann::json& j);

struct TestSuite {
  std::filesystem::path circuit; // resolved against the suite file's directory
  SliceMode mode = SliceMode::Standalone;
  std::vector<TestCase> cases;
};

/// Throws Error(IoError) or Error(InvalidTestCase).
TestSuite load_suite(const std::filesystem::path& path);
TestSuite suite_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir);

struct SuiteReport {
  std::vector<TestReport> reports; // sorted by case name
  [[nodiscard]] bool all_passed() const;
};

SuiteReport run_suite(const Circuit& circuit, const TestSuite& suite,
                      const SimOptions& options = {});

std::string render_table(const SuiteReport& report);
nlohmann::json to_json(const TestReport& report);
nlohmann::json to_json(const SuiteReport& report);

} // namespace qcdb
