#include "qcdb/session.hpp"

#include <fmt/format.h>

#include <algorithm>

#include <charconv>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace qcdb {

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::uint64_t parse_number(const std::string& text, std::string_view what) {
  std::uint64_t v = 0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc{} || ptr != end) {
    throw UsageError(fmt::format("{} must be a non-negative integer, got '{}'", what, text));
  }
  return v;
}

std::optional<std::size_t> parse_slice_ref(const std::string& text) {
  if (text == "full") {
    return std::nullopt;
  }
  return static_cast<std::size_t>(parse_number(text, "slice"));
}

std::string slice_summary(const Session& s, const Slice& slice) {
  const auto cat = categorize(slice, s.config().thresholds);
  return fmt::format("slice {}: {} gates, {} qubits ({} used), {}/{}", slice.index,
                     cat.gate_count, slice.circuit.num_qubits(), cat.used_qubits,
                     to_string(cat.behaviour), to_string(cat.complexity));
}

std::string render_slices(const Session& s) {
  std::string out = fmt::format("{} slice{} ({})\n", s.slices().size(),
                                s.slices().size() == 1 ? "" : "s", to_string(s.mode()));
  for (const auto& slice : s.slices()) {
    out += slice_summary(s, slice) + "\n";
  }
  for (const auto& w : s.slice_warnings()) {
    out += "warning: " + w + "\n";
  }
  return out;
}

std::string render_refs(const std::vector<BitRef>& refs) {
  std::string out;
  for (const auto& r : refs) {
    out += (out.empty() ? "" : " ") + r.str();
  }
  return out;
}

std::string render_run(const std::optional<std::size_t>& slice, const RunResult& result,
                       const RunRequest& req, const SessionConfig& config) {
  const std::string what = slice ? fmt::format("slice {}", *slice) : std::string("full circuit");
  if (const auto* state = std::get_if<StateVector>(&result)) {
    return fmt::format("{}, statevector ({} qubits):\n{}", what, state->num_qubits(),
                       dump_statevector(*state));
  }
  const auto& counts = std::get<CountsMap>(result);
  return fmt::format("{}, {} shots, seed {}:\n{}", what, counts.shots,
                     req.seed.value_or(config.seed), format_counts(counts));
}

// Options after the positional arguments: --name value pairs.
struct Options {
  std::vector<std::string> positional;
  std::map<std::string, std::string> named;

  [[nodiscard]] std::optional<std::string> get(const std::string& key) const {
    auto it = named.find(key);
    return it == named.end() ? std::nullopt : std::optional(it->second);
  }
};

Options parse_options(const std::vector<std::string>& tokens, std::size_t first,
                      std::initializer_list<std::string_view> allowed) {
  Options o;
  for (std::size_t i = first; i < tokens.size(); ++i) {
    const auto& t = tokens[i];
    if (t.starts_with("--")) {
      const std::string key = t.substr(2);
      if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
        throw UsageError(fmt::format("unknown option '{}'", t));
      }
      if (i + 1 >= tokens.size()) {
        throw UsageError(fmt::format("option '{}' needs a value", t));
      }
      o.named[key] = tokens[++i];
    } else {
      o.positional.push_back(t);
    }
  }
  return o;
}

void expect_positional(const Options& o, std::size_t n, std::string_view usage) {
  if (o.positional.size() != n) {
    throw UsageError(fmt::format("usage: {}", usage));
  }
}

std::string dispatch(Session& s, const std::vector<std::string>& tok, bool& quit) {
  const std::string& cmd = tok[0];
  if (cmd == "help") {
    return help_text();
  }
  if (cmd == "quit" || cmd == "exit") {
    quit = true;
    return "";
  }
  if (cmd == "load") {
    const auto o = parse_options(tok, 1, {});
    expect_positional(o, 1, "load <file>");
    const auto warnings = s.load_file(o.positional[0]);
    std::string out;
    for (const auto& w : warnings) {
      out += w.str() + "\n";
    }
    const auto& c = s.circuit();
    out += fmt::format("loaded {}: {} qubits, {} clbits, {} instructions, {} breakbarriers\n",
                       o.positional[0], c.num_qubits(), c.num_clbits(), c.instructions().size(),
                       c.breakbarriers().size());
    return out + render_slices(s);
  }
  if (cmd == "list") {
    return render_listing(s.circuit());
  }
  if (cmd == "break") {
    if (tok.size() < 2) {
      throw UsageError("usage: break add <pos> | break rm <k> | break list");
    }
    const auto o = parse_options(tok, 2, {});
    if (tok[1] == "list") {
      expect_positional(o, 0, "break list");
      const auto markers = s.circuit().breakbarriers();
      std::string positions;
      for (const auto& m : markers) {
        positions += (positions.empty() ? "" : ", ") + std::to_string(m.position);
      }
      return render_listing(s.circuit()) +
             fmt::format("{} breakbarriers{}\n", markers.size(),
                         markers.empty() ? "" : " at " + positions);
    }
    if (tok[1] == "add") {
      expect_positional(o, 1, "break add <pos>");
      const auto pos = parse_number(o.positional[0], "position");
      s.add_breakbarrier(pos);
      return fmt::format("breakbarrier inserted at {}\n", pos) + render_slices(s);
    }
    if (tok[1] == "rm") {
      expect_positional(o, 1, "break rm <k>");
      const auto k = parse_number(o.positional[0], "breakbarrier number");
      s.remove_breakbarrier(k);
      return fmt::format("breakbarrier {} removed\n", k) + render_slices(s);
    }
    throw UsageError("usage: break add <pos> | break rm <k> | break list");
  }
  if (cmd == "slice") {
    const auto o = parse_options(tok, 1, {"mode"});
    expect_positional(o, 0, "slice [--mode standalone|accumulated]");
    if (const auto mode = o.get("mode")) {
      SliceMode m{};
      try {
        m = slice_mode_from_name(*mode);
      } catch (const Error& e) {
        throw UsageError(e.what());
      }
      s.set_mode(m);
    } else {
      (void)s.circuit();
    }
    return render_slices(s);
  }
  if (cmd == "hslice") {
    const auto o = parse_options(tok, 1, {});
    expect_positional(o, 1, "hslice <k>");
    const std::size_t k = parse_number(o.positional[0], "slice");
    const std::size_t before = s.slice(k).circuit.num_qubits();
    const auto& sl = s.hslice(k);
    return fmt::format("slice {}: {} -> {} qubits\nqubit_map {}\nremoved {}\n", k, before,
                       sl.circuit.num_qubits(), render_refs(sl.qubit_map),
                       sl.removed_qubits.empty() ? "-" : render_refs(sl.removed_qubits));
  }
  if (cmd == "run" || cmd == "state") {
    const bool is_run = cmd == "run";
    const auto o = is_run ? parse_options(tok, 1, {"init", "shots", "seed"})
                          : parse_options(tok, 1, {"init"});
    expect_positional(o, 1,
                      is_run ? "run <k|full> --init <spec> [--shots S --seed R]"
                             : "state <k|full> [--init <spec>]");
    RunRequest req;
    req.slice = parse_slice_ref(o.positional[0]);
    const std::size_t n = s.target(req.slice).num_qubits();
    const auto init = o.get("init");
    if (is_run && !init) {
      throw UsageError("usage: run <k|full> --init <spec> [--shots S --seed R]");
    }
    req.init = parse_state_arg(init.value_or("zero"), n);
    if (const auto shots = o.get("shots")) {
      req.shots = parse_number(*shots, "shots");
    }
    if (const auto seed = o.get("seed")) {
      req.seed = parse_number(*seed, "seed");
    }
    if (!is_run && s.target(req.slice).has_measurements()) {
      throw Error(ErrorCode::MeasurementPresent,
                  "state needs a slice without measurements; use run for sampling");
    }
    const auto result = s.run(req);
    if (!is_run) {
      return dump_statevector(std::get<StateVector>(result));
    }
    return render_run(req.slice, result, req, s.config());
  }
  if (cmd == "cat") {
    const auto o = parse_options(tok, 1, {});
    expect_positional(o, 1, "cat <k>");
    const std::size_t k = parse_number(o.positional[0], "slice");
    const auto c = s.categorize(k);
    return fmt::format(
        "slice {}: {}, {}\n  used qubits {}, gates {} (simple if <= {} qubits and <= {} gates)\n"
        "  permutation {}, diagonal-phase {}, mixing {}\n",
        k, to_string(c.behaviour), to_string(c.complexity), c.used_qubits, c.gate_count,
        s.config().thresholds.max_simple_qubits, s.config().thresholds.max_simple_gates,
        c.evidence.permutation, c.evidence.diagonal_phase, c.evidence.mixing);
  }
  if (cmd == "diffusion") {
    const auto o = parse_options(tok, 1, {});
    expect_positional(o, 1, "diffusion <k>");
    const std::size_t k = parse_number(o.positional[0], "slice");
    const auto r = s.diffusion(k);
    return fmt::format("slice {}: diffusion check {} on {} qubits (deviation {:.3e}, phase {:.6f})\n",
                       k, r.pass ? "pass" : "fail", r.qubits, r.deviation, r.phase);
  }
  if (cmd == "where") {
    const auto o = parse_options(tok, 1, {});
    expect_positional(o, 1, "where <gate>");
    return gate_loc(s.circuit(), o.positional[0]);
  }
  if (cmd == "export") {
    const auto o = parse_options(tok, 1, {});
    expect_positional(o, 1, "export <dir>");
    std::string out;
    for (const auto& path : s.export_slices(o.positional[0])) {
      out += "wrote " + path + "\n";
    }
    return out;
  }
  if (cmd == "set") {
    if (tok.size() < 3) {
      throw UsageError("usage: set seed|shots|cap <n> | set thresholds <qubits> <gates>");
    }
    auto& cfg = s.config();
    if (tok[1] == "thresholds" && tok.size() == 4) {
      Thresholds t{parse_number(tok[2], "qubits"), parse_number(tok[3], "gates")};
      if (t.max_simple_qubits == 0 || t.max_simple_gates == 0) {
        throw UsageError("thresholds must be positive");
      }
      cfg.thresholds = t;
    } else if (tok.size() != 3) {
      throw UsageError("usage: set seed|shots|cap <n> | set thresholds <qubits> <gates>");
    } else if (tok[1] == "seed") {
      cfg.seed = parse_number(tok[2], "seed");
    } else if (tok[1] == "shots") {
      cfg.shots = parse_number(tok[2], "shots");
      if (cfg.shots == 0) {
        throw UsageError("shots must be positive");
      }
    } else if (tok[1] == "cap") {
      cfg.qubit_cap = parse_number(tok[2], "cap");
    } else {
      throw UsageError("usage: set seed|shots|cap <n> | set thresholds <qubits> <gates>");
    }
    return "";
  }
  if (cmd == "config") {
    const auto& cfg = s.config();
    return fmt::format("seed {}\nshots {}\ncap {}\nthresholds {} {}\n", cfg.seed, cfg.shots,
                       cfg.qubit_cap, cfg.thresholds.max_simple_qubits,
                       cfg.thresholds.max_simple_gates);
  }
  throw UsageError(fmt::format("unknown command '{}'; type help", cmd));
}

} // namespace

// --- Session ---------------------------------------------------------------

Session::Session() { config_.qubit_cap = qubit_cap_from_env(); }

std::vector<qasm::ParseDiagnostic> Session::load_source(std::string_view text, std::string name) {
  auto result = qasm::parse(text, name);
  if (!result.ok()) {
    std::string message;
    for (const auto& d : result.errors()) {
      message += (message.empty() ? "" : "\n") + d.str();
    }
    throw Error(ErrorCode::ParseError, message);
  }
  circuit_ = std::move(*result.circuit);
  name_ = std::move(name);
  last_result_.reset();
  reslice();
  return result.warnings();
}

std::vector<qasm::ParseDiagnostic> Session::load_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorCode::IoError, fmt::format("cannot read '{}'", path));
  }
  std::stringstream buf;
  buf << in.rdbuf();
  return load_source(buf.str(), path);
}

const Circuit& Session::circuit() const {
  if (!circuit_) {
    throw Error(ErrorCode::InvalidCircuit, "no circuit loaded (use load <file>)");
  }
  return *circuit_;
}

void Session::add_breakbarrier(std::size_t position) {
  circuit_ = insert_breakbarrier(circuit(), position, Provenance::label("shell"));
  reslice();
}

void Session::remove_breakbarrier(std::size_t k) {
  circuit_ = qcdb::remove_breakbarrier(circuit(), k);
  reslice();
}

void Session::set_mode(SliceMode mode) {
  (void)circuit();
  mode_ = mode;
  reslice();
}

void Session::reslice() {
  auto r = vslice(*circuit_, mode_);
  slices_ = std::move(r.slices);
  warnings_ = std::move(r.warnings);
}

const Slice& Session::slice(std::size_t k) const {
  (void)circuit();
  if (k >= slices_.size()) {
    throw Error(ErrorCode::SliceNotFound,
                fmt::format("slice {} does not exist ({} slices)", k, slices_.size()));
  }
  return slices_[k];
}

const Slice& Session::hslice(std::size_t k) {
  slices_[k] = qcdb::hslice(slice(k));
  return slices_[k];
}

SliceCategory Session::categorize(std::size_t k) const {
  return qcdb::categorize(slice(k), config_.thresholds);
}

DiffusionReport Session::diffusion(std::size_t k) const { return diffusion_check(slice(k)); }

Circuit Session::target(std::optional<std::size_t> k) const {
  return k ? slice(*k).circuit : strip_breakbarriers(circuit());
}

RunResult Session::run(const RunRequest& request) {
  const Circuit c = target(request.slice);
  const StateVector init = make_state(request.init);
  const SimOptions opts{config_.qubit_cap};
  RunResult result;
  if (request.shots || c.has_measurements()) {
    result = sample(c, init, request.shots.value_or(config_.shots),
                    request.seed.value_or(config_.seed), opts);
  } else {
    result = run_statevector(c, init, opts);
  }
  last_result_ = result;
  return result;
}

std::vector<std::string> Session::export_slices(const std::string& dir) const {
  (void)circuit();
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  const std::string stem = name_.empty() ? "circuit" : std::filesystem::path(name_).stem().string();
  std::vector<std::string> written;
  for (const auto& sl : slices_) {
    const auto path = (std::filesystem::path(dir) / slice_file_name(stem, sl.index)).string();
    std::ofstream out(path, std::ios::binary);
    if (!out || !(out << emit_slice(sl))) {
      throw Error(ErrorCode::IoError, fmt::format("cannot write '{}'", path));
    }
    written.push_back(path);
  }
  return written;
}

// --- commands --------------------------------------------------------------

std::vector<std::string> tokenize_command(std::string_view line) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i])) != 0) {
      ++i;
    }
    if (i >= line.size()) {
      break;
    }
    std::string tok;
    if (line[i] == '{') {
      int depth = 0;
      bool in_string = false;
      for (; i < line.size(); ++i) {
        const char c = line[i];
        tok += c;
        if (in_string) {
          if (c == '\\' && i + 1 < line.size()) {
            tok += line[++i];
          } else if (c == '"') {
            in_string = false;
          }
        } else if (c == '"') {
          in_string = true;
        } else if (c == '{' || c == '[') {
          ++depth;
        } else if ((c == '}' || c == ']') && --depth == 0) {
          ++i;
          break;
        }
      }
    } else {
      while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i])) == 0) {
        const char c = line[i];
        if (c == '\'' || c == '"') {
          const auto close = line.find(c, i + 1);
          const auto end = close == std::string_view::npos ? line.size() : close;
          tok += line.substr(i + 1, end - i - 1);
          i = end == line.size() ? end : end + 1;
        } else {
          tok += c;
          ++i;
        }
      }
    }
    out.push_back(std::move(tok));
  }
  return out;
}

CommandResult execute_command(Session& session, std::string_view line) {
  const auto tokens = tokenize_command(line);
  CommandResult result;
  if (tokens.empty() || tokens[0].starts_with('#')) {
    return result;
  }
  Session work = session;
  try {
    result.output = dispatch(work, tokens, result.quit);
    session = std::move(work);
  } catch (const UsageError& e) {
    result.output = fmt::format("{}\n", e.what());
    result.status = 2;
  } catch (const Error& e) {
    result.output = fmt::format("error: {}: {}\n", to_string(e.code()), e.what());
    result.status = 1;
  } catch (const std::exception& e) {
    result.output = fmt::format("error: {}\n", e.what());
    result.status = 1;
  }
  return result;
}

std::string help_text() {
  return R"(commands:
  load <file>                      parse a .qasm file (replaces the session circuit)
  list                             numbered instruction listing
  break add <pos>                  insert a breakbarrier before instruction <pos>
  break rm <k>                     remove the k-th breakbarrier
  break list                       listing plus breakbarrier positions
  slice [--mode standalone|accumulated]
                                   re-slice and summarise (mini = standalone)
  hslice <k>                       drop unused qubits from slice k
  run <k|full> --init <spec> [--shots S] [--seed R]
                                   simulate; sampling if --shots is given or the target measures
  state <k|full> [--init <spec>]   amplitude dump (default init: zero)
  cat <k>                          categorise slice k
  diffusion <k>                    compare slice k with 2|s><s| - I up to global phase
  where <gate>                     provenance report for a gate kind
  export <dir>                     write <name>.slice<k>.qasm for every slice
  set seed|shots|cap <n>           session configuration
  set thresholds <qubits> <gates>  simple/complex boundary
  config                           show configuration
  help, quit
init specs: zero, uniform, ghz, w, dicke:K, basis:BITS or JSON such as
  {"kind":"dicke","n":4,"k":2}
bitstrings show qubit 0 rightmost; counts list classical registers in declaration order.
)";
}

std::string render_listing(const Circuit& circuit) {
  std::string out;
  std::size_t marker = 0;
  const auto& insts = circuit.instructions();
  std::size_t width = 0;
  for (const auto& inst : insts) {
    width = std::max(width, inst.to_qasm().size());
  }
  for (std::size_t i = 0; i < insts.size(); ++i) {
    const auto& inst = insts[i];
    if (inst.kind() == GateKind::Breakbarrier) {
      out += fmt::format("{:>4}  ---- breakbarrier {} ----\n", i, marker++);
      continue;
    }
    const auto& p = inst.provenance();
    if (p.is_synthetic()) {
      out += fmt::format("{:>4}  {}\n", i, inst.to_qasm());
    } else {
      out += fmt::format("{:>4}  {:<{}}  {}\n", i, inst.to_qasm(), width, p.tag());
    }
  }
  return out;
}

} // namespace qcdb
