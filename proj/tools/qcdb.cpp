// qcdb command-line entry point. Every one-shot subcommand is translated into
// the equivalent REPL command lines and run through execute_command, so the
// two interfaces print identical output.
#include "qcdb/service.hpp"
#include "qcdb/session.hpp"
#include "qcdb/testkit.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>

#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <unistd.h>

namespace {

struct Common {
  std::string circuit;
  std::vector<std::size_t> breaks;
  std::string mode = "standalone";
};

void add_common(CLI::App* app, Common& c) {
  app->add_option("--circuit", c.circuit, "QASM file")->required()->check(CLI::ExistingFile);
  app->add_option("--break", c.breaks, "insert a breakbarrier at this instruction index");
  app->add_option("--mode", c.mode, "standalone | accumulated")
      ->check(CLI::IsMember({"standalone", "mini", "accumulated"}));
}

// Runs setup commands quietly, then the final command with its output shown.
int run_lines(const Common& c, const std::vector<std::string>& setup, const std::string& last) {
  qcdb::Session session;
  std::vector<std::string> lines{"load " + c.circuit};
  for (auto pos : c.breaks) {
    lines.push_back(fmt::format("break add {}", pos));
  }
  lines.push_back("slice --mode " + c.mode);
  lines.insert(lines.end(), setup.begin(), setup.end());
  for (const auto& line : lines) {
    const auto r = qcdb::execute_command(session, line);
    if (r.status != 0) {
      std::cerr << r.output;
      return r.status;
    }
  }
  const auto r = qcdb::execute_command(session, last);
  (r.status == 0 ? std::cout : std::cerr) << r.output;
  return r.status;
}

int repl(const std::string& circuit) {
  qcdb::Session session;
  if (!circuit.empty()) {
    std::cout << qcdb::execute_command(session, "load " + circuit).output;
  }
  const bool interactive = isatty(0) != 0;
  int status = 0;
  std::string line;
  while (true) {
    if (interactive) {
      std::cout << "qcdb> " << std::flush;
    }
    if (!std::getline(std::cin, line)) {
      break;
    }
    const auto r = qcdb::execute_command(session, line);
    std::cout << r.output << std::flush;
    status = r.status != 0 ? r.status : status;
    if (r.quit) {
      break;
    }
  }
  // Scripted sessions (stdin not a terminal) report the worst status seen.
  return interactive ? 0 : status;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"qcdb - quantum circuit debugger"};
  app.require_subcommand(1);

  std::string repl_circuit;
  auto* repl_cmd = app.add_subcommand("repl", "interactive debugger (reads commands from stdin)");
  repl_cmd->add_option("--circuit", repl_circuit, "QASM file to load first");

  Common run_c;
  std::string run_slice = "full";
  std::string run_init;
  std::optional<std::uint64_t> shots;
  std::optional<std::uint64_t> seed;
  bool run_hslice = false;
  auto* run_cmd = app.add_subcommand("run", "simulate a slice or the full circuit");
  add_common(run_cmd, run_c);
  run_cmd->add_option("--slice", run_slice, "slice index or 'full'");
  run_cmd->add_option("--init", run_init, "state spec (name or JSON)")->required();
  run_cmd->add_option("--shots", shots, "sample this many shots");
  run_cmd->add_option("--seed", seed, "sampling seed");
  run_cmd->add_flag("--hslice", run_hslice, "horizontally slice first");

  Common slice_c;
  auto* slice_cmd = app.add_subcommand("slice", "summarise the slices");
  add_common(slice_cmd, slice_c);

  Common where_c;
  std::string gate;
  auto* where_cmd = app.add_subcommand("where", "gate provenance report");
  add_common(where_cmd, where_c);
  where_cmd->add_option("--gate", gate, "gate kind")->required();

  Common k_c;
  std::size_t k = 0;
  bool k_hslice = false;
  auto* cat_cmd = app.add_subcommand("cat", "categorise a slice");
  auto* state_cmd = app.add_subcommand("state", "amplitude dump of a slice from |0...0>");
  auto* hslice_cmd = app.add_subcommand("hslice", "horizontally slice a slice");
  auto* diffusion_cmd = app.add_subcommand("diffusion", "diffusion-operator check on a slice");
  for (auto* cmd : {cat_cmd, state_cmd, hslice_cmd, diffusion_cmd}) {
    add_common(cmd, k_c);
    cmd->add_option("--slice", k, "slice index")->required();
    if (cmd != hslice_cmd) {
      cmd->add_flag("--hslice", k_hslice, "horizontally slice first");
    }
  }

  Common export_c;
  std::string dir;
  auto* export_cmd = app.add_subcommand("export", "write every slice as QASM");
  add_common(export_cmd, export_c);
  export_cmd->add_option("--dir", dir, "output directory")->required();

  Common list_c;
  auto* list_cmd = app.add_subcommand("list", "numbered instruction listing");
  add_common(list_cmd, list_c);

  std::string suite_path;
  std::string suite_circuit;
  std::string suite_json;
  auto* test_cmd = app.add_subcommand("test", "run a JSON test suite");
  test_cmd->add_option("--suite", suite_path, "suite file")->required()->check(CLI::ExistingFile);
  test_cmd->add_option("--circuit", suite_circuit, "override the suite's circuit");
  test_cmd->add_option("--json", suite_json, "also write the machine-readable report here");

  qcdb::ServeOptions serve_opts;
  bool open_host = false;
  auto* serve_cmd = app.add_subcommand("serve", "HTTP/JSON debug service");
  serve_cmd->add_option("--port", serve_opts.port, "port")->capture_default_str();
  serve_cmd->add_flag("--open", open_host, "listen on all interfaces instead of localhost");
  serve_cmd->add_option("--static", serve_opts.static_dir, "directory served at /");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  if (*repl_cmd) {
    return repl(repl_circuit);
  }
  if (*run_cmd) {
    std::string line = fmt::format("run {} --init '{}'", run_slice, run_init);
    if (shots) line += fmt::format(" --shots {}", *shots);
    if (seed) line += fmt::format(" --seed {}", *seed);
    std::vector<std::string> setup;
    if (run_hslice && run_slice != "full") {
      setup.push_back("hslice " + run_slice);
    }
    return run_lines(run_c, setup, line);
  }
  if (*slice_cmd) {
    return run_lines(slice_c, {}, "slice");
  }
  if (*where_cmd) {
    return run_lines(where_c, {}, "where " + gate);
  }
  if (*list_cmd) {
    return run_lines(list_c, {}, "list");
  }
  if (*export_cmd) {
    return run_lines(export_c, {}, "export '" + dir + "'");
  }
  for (auto* cmd : {cat_cmd, state_cmd, hslice_cmd, diffusion_cmd}) {
    if (*cmd) {
      std::vector<std::string> setup;
      if (k_hslice) {
        setup.push_back(fmt::format("hslice {}", k));
      }
      return run_lines(k_c, setup, fmt::format("{} {}", cmd->get_name(), k));
    }
  }
  if (*test_cmd) {
    try {
      const auto suite = qcdb::load_suite(suite_path);
      const std::string path =
          suite_circuit.empty() ? suite.circuit.lexically_normal().string() : suite_circuit;
      const auto circuit = qcdb::qasm::load_file(path);
      qcdb::SimOptions opts{qcdb::qubit_cap_from_env()};
      const auto report = qcdb::run_suite(circuit, suite, opts);
      std::cout << "suite " << suite_path << " on " << path << "\n" << qcdb::render_table(report);
      if (!suite_json.empty()) {
        std::ofstream out(suite_json);
        out << qcdb::to_json(report).dump(2) << "\n";
      }
      return report.all_passed() ? 0 : 1;
    } catch (const qcdb::Error& e) {
      std::cerr << "error: " << qcdb::to_string(e.code()) << ": " << e.what() << "\n";
      return 2;
    }
  }
  if (*serve_cmd) {
    if (open_host) {
      serve_opts.host = "0.0.0.0";
    }
    qcdb::ServiceOptions service_opts;
    service_opts.id_seed = (std::uint64_t{std::random_device{}()} << 32) | std::random_device{}();
    qcdb::DebugService service(service_opts);
    return qcdb::serve(service, serve_opts);
  }
  return 2;
}
