#include "qcdb/service.hpp"

#include "qcdb/rng.hpp"

#include <fmt/format.h>
#include <fmt/ranges.h>
#include <httplib.h>
#include <json.hpp>

#include <charconv>
#include <filesystem>
#include <vector>

namespace qcdb {

namespace {

using nlohmann::json;

struct HttpError : std::runtime_error {
  HttpError(int status, std::string code, const std::string& message)
      : std::runtime_error(message), status(status), code(std::move(code)) {}
  int status;
  std::string code;
};

[[noreturn]] void bad_request(const std::string& message) {
  throw HttpError(400, "BadRequest", message);
}

HttpResponse reply(int status, const json& body) { return {status, body.dump(), "application/json"}; }

HttpResponse error_reply(int status, std::string_view code, std::string_view message) {
  return reply(status, json{{"error", {{"code", code}, {"message", message}}}});
}

std::vector<std::string> split_path(std::string_view path) {
  if (const auto q = path.find('?'); q != std::string_view::npos) {
    path = path.substr(0, q);
  }
  std::vector<std::string> parts;
  std::size_t i = 0;
  while (i < path.size()) {
    if (path[i] == '/') {
      ++i;
      continue;
    }
    const auto end = std::min(path.find('/', i), path.size());
    parts.emplace_back(path.substr(i, end - i));
    i = end;
  }
  return parts;
}

json parse_body(std::string_view body) {
  if (body.empty()) {
    return json::object();
  }
  auto j = json::parse(body, nullptr, false);
  if (j.is_discarded() || !j.is_object()) {
    bad_request("request body must be a JSON object");
  }
  return j;
}

std::size_t index_from(const std::string& text, std::string_view what) {
  std::size_t v = 0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc{} || ptr != end) {
    bad_request(fmt::format("{} must be a non-negative integer", what));
  }
  return v;
}

std::size_t required_index(const json& body, const char* key) {
  if (!body.contains(key) || !body[key].is_number_unsigned()) {
    bad_request(fmt::format("'{}' must be a non-negative integer", key));
  }
  return body[key].get<std::size_t>();
}

template <typename T>
void update_unsigned(const json& body, const char* key, T& field) {
  if (!body.contains(key)) {
    return;
  }
  if (!body[key].is_number_unsigned()) {
    bad_request(fmt::format("'{}' must be a non-negative integer", key));
  }
  field = body[key].get<T>();
}

std::optional<std::size_t> slice_ref(const json& body) {
  if (!body.contains("slice")) {
    bad_request("'slice' is required (index or \"full\")");
  }
  const auto& v = body["slice"];
  if (v.is_string() && v.get<std::string>() == "full") {
    return std::nullopt;
  }
  if (!v.is_number_unsigned()) {
    bad_request("'slice' must be an index or \"full\"");
  }
  return v.get<std::size_t>();
}

json ref_json(const Circuit& c, const BitRef& r, bool quantum) {
  return {{"reg", r.reg},
          {"index", r.index},
          {"flat", quantum ? c.qubit_index(r) : c.clbit_index(r)}};
}

json provenance_json(const Provenance& p) {
  return {{"file", p.file},     {"line", p.line},       {"column", p.column},
          {"context", p.context}, {"snippet", p.snippet}, {"tag", p.tag()}};
}

json summary_json(const Session& s) {
  const auto& c = s.circuit();
  json bb = json::array();
  for (const auto& m : c.breakbarriers()) {
    bb.push_back(m.position);
  }
  return {{"name", s.name()},
          {"num_qubits", c.num_qubits()},
          {"num_clbits", c.num_clbits()},
          {"instructions", c.instructions().size()},
          {"gate_count", c.gate_count()},
          {"breakbarriers", std::move(bb)}};
}

json circuit_json(const Session& s) {
  const auto& c = s.circuit();
  json j = summary_json(s);
  json qregs = json::array();
  for (const auto& r : c.qregs()) {
    qregs.push_back({{"name", r.name}, {"size", r.size}});
  }
  json cregs = json::array();
  for (const auto& r : c.cregs()) {
    cregs.push_back({{"name", r.name}, {"size", r.size}});
  }
  json insts = json::array();
  for (std::size_t i = 0; i < c.instructions().size(); ++i) {
    const auto& inst = c.instructions()[i];
    json qubits = json::array();
    for (const auto& r : inst.qubits()) {
      qubits.push_back(ref_json(c, r, true));
    }
    json clbits = json::array();
    for (const auto& r : inst.clbits()) {
      clbits.push_back(ref_json(c, r, false));
    }
    insts.push_back({{"index", i},
                     {"kind", gate_name(inst.kind())},
                     {"params", inst.params()},
                     {"qubits", std::move(qubits)},
                     {"clbits", std::move(clbits)},
                     {"text", inst.to_qasm()},
                     {"provenance", provenance_json(inst.provenance())}});
  }
  j["qregs"] = std::move(qregs);
  j["cregs"] = std::move(cregs);
  j["debug_mode"] = c.debug_mode();
  j["instructions"] = std::move(insts);
  return j;
}

json refs_json(const std::vector<BitRef>& refs) {
  json j = json::array();
  for (const auto& r : refs) {
    j.push_back(r.str());
  }
  return j;
}

json slice_json(const Session& s, const Slice& slice) {
  const auto cat = categorize(slice, s.config().thresholds);
  return {{"index", slice.index},
          {"mode", to_string(slice.mode)},
          {"num_qubits", slice.circuit.num_qubits()},
          {"instructions", slice.circuit.instructions().size()},
          {"gate_count", cat.gate_count},
          {"has_measurements", slice.circuit.has_measurements()},
          {"qubit_map", refs_json(slice.qubit_map)},
          {"removed_qubits", refs_json(slice.removed_qubits)},
          {"category",
           {{"behaviour", to_string(cat.behaviour)},
            {"complexity", to_string(cat.complexity)},
            {"used_qubits", cat.used_qubits},
            {"gate_count", cat.gate_count},
            {"evidence",
             {{"permutation", cat.evidence.permutation},
              {"diagonal_phase", cat.evidence.diagonal_phase},
              {"mixing", cat.evidence.mixing}}}}}};
}

json slices_json(const Session& s) {
  json list = json::array();
  for (const auto& sl : s.slices()) {
    list.push_back(slice_json(s, sl));
  }
  return {{"mode", to_string(s.mode())}, {"slices", std::move(list)},
          {"warnings", s.slice_warnings()}};
}

json run_json(std::optional<std::size_t> slice, const RunResult& result, std::uint64_t seed) {
  json j;
  j["slice"] = slice ? json(*slice) : json("full");
  if (const auto* state = std::get_if<StateVector>(&result)) {
    json amps = json::array();
    for (std::uint64_t i = 0; i < state->size(); ++i) {
      const auto a = (*state)[i];
      if (std::abs(a) < kDumpThreshold) {
        continue;
      }
      amps.push_back({{"bitstring", basis_label(i, state->num_qubits())},
                      {"index", i},
                      {"re", a.real()},
                      {"im", a.imag()},
                      {"prob", std::norm(a)}});
    }
    j["kind"] = "statevector";
    j["num_qubits"] = state->num_qubits();
    j["amplitudes"] = std::move(amps);
    return j;
  }
  const auto& counts = std::get<CountsMap>(result);
  json c = json::object();
  for (const auto& [label, n] : counts.counts) {
    c[label] = n;
  }
  j["kind"] = "counts";
  j["shots"] = counts.shots;
  j["seed"] = seed;
  j["counts"] = std::move(c);
  return j;
}

json gate_json(const Circuit& c, const std::string& kind) {
  std::string report = gate_loc(c, kind); // validates kind
  const auto info = gate_info(c);
  json sites = json::array();
  std::size_t total = 0;
  if (auto it = info.find(*gate_kind_from_name(kind)); it != info.end()) {
    total = it->second.total;
    for (const auto& site : it->second.sites) {
      auto p = provenance_json(site.site);
      p["occurrences"] = site.occurrences;
      sites.push_back(std::move(p));
    }
  }
  return {{"kind", kind}, {"total", total}, {"sites", std::move(sites)},
          {"report", std::move(report)}};
}

json config_json(const SessionConfig& cfg) {
  return {{"seed", cfg.seed},
          {"shots", cfg.shots},
          {"qubit_cap", cfg.qubit_cap},
          {"thresholds",
           {{"max_simple_qubits", cfg.thresholds.max_simple_qubits},
            {"max_simple_gates", cfg.thresholds.max_simple_gates}}}};
}

// Per-session routes: parts = {"sessions", id, ...}.
HttpResponse session_route(Session& s, std::string_view method,
                           const std::vector<std::string>& parts, const json& body) {
  const std::string_view m = method;
  const std::string res = parts.size() > 2 ? parts[2] : "";
  const std::size_t depth = parts.size();

  if (depth == 3 && res == "circuit" && m == "GET") {
    return reply(200, circuit_json(s));
  }
  if (res == "breakbarriers") {
    if (depth == 3 && m == "POST") {
      s.add_breakbarrier(required_index(body, "position"));
      return reply(200, {{"circuit", summary_json(s)}, {"slices", slices_json(s)}});
    }
    if (depth == 4 && m == "DELETE") {
      s.remove_breakbarrier(index_from(parts[3], "breakbarrier"));
      return reply(200, {{"circuit", summary_json(s)}, {"slices", slices_json(s)}});
    }
  }
  if (res == "slices") {
    if (depth == 3 && m == "POST") {
      SliceMode mode = s.mode();
      if (body.contains("mode")) {
        if (!body["mode"].is_string()) {
          bad_request("'mode' must be a string");
        }
        try {
          mode = slice_mode_from_name(body["mode"].get<std::string>());
        } catch (const Error& e) {
          bad_request(e.what());
        }
      }
      s.set_mode(mode);
      return reply(200, slices_json(s));
    }
    if (depth == 3 && m == "GET") {
      (void)s.circuit();
      return reply(200, slices_json(s));
    }
    if (depth == 5 && parts[4] == "qasm" && m == "GET") {
      const auto& sl = s.slice(index_from(parts[3], "slice"));
      const std::string stem =
          s.name().empty() ? "circuit" : std::filesystem::path(s.name()).stem().string();
      return reply(200, {{"file", slice_file_name(stem, sl.index)}, {"qasm", emit_slice(sl)}});
    }
  }
  if (depth == 3 && res == "hslice" && m == "POST") {
    return reply(200, slice_json(s, s.hslice(required_index(body, "slice"))));
  }
  if (depth == 3 && res == "diffusion" && m == "POST") {
    const auto r = s.diffusion(required_index(body, "slice"));
    return reply(200, {{"pass", r.pass},
                       {"deviation", r.deviation},
                       {"phase", r.phase},
                       {"qubits", r.qubits},
                       {"tolerance", kDiffusionTolerance}});
  }
  if (depth == 3 && res == "run" && m == "POST") {
    RunRequest req;
    req.slice = slice_ref(body);
    const Circuit target = s.target(req.slice);
    if (!body.contains("init")) {
      bad_request("'init' is required");
    }
    const auto& init = body["init"];
    if (init.is_string()) {
      req.init = named_state_spec(init.get<std::string>(), target.num_qubits());
    } else {
      req.init = state_spec_from_json(init);
    }
    const std::string mode = body.value("run_mode", std::string());
    if (!mode.empty() && mode != "statevector" && mode != "sampling") {
      bad_request("'run_mode' must be \"statevector\" or \"sampling\"");
    }
    if (mode == "statevector" && target.has_measurements()) {
      throw Error(ErrorCode::MeasurementPresent,
                  "target has measurements; use run_mode \"sampling\"");
    }
    if (body.contains("shots")) {
      if (!body["shots"].is_number_unsigned()) {
        bad_request("'shots' must be a positive integer");
      }
      req.shots = body["shots"].get<std::uint64_t>();
    }
    if (body.contains("seed")) {
      if (!body["seed"].is_number_unsigned()) {
        bad_request("'seed' must be a non-negative integer");
      }
      req.seed = body["seed"].get<std::uint64_t>();
    }
    if (mode == "sampling" && !req.shots) {
      req.shots = s.config().shots;
    }
    if (mode == "statevector") {
      req.shots.reset();
    }
    const auto result = s.run(req);
    return reply(200, run_json(req.slice, result, req.seed.value_or(s.config().seed)));
  }
  if (res == "gates" && m == "GET") {
    const auto& c = s.circuit();
    if (depth == 4) {
      return reply(200, gate_json(c, parts[3]));
    }
    if (depth == 3) {
      json all = json::object();
      for (const auto& [kind, stats] : gate_info(c)) {
        all[std::string(gate_name(kind))] = {{"total", stats.total},
                                             {"sites", stats.sites.size()}};
      }
      return reply(200, all);
    }
  }
  if (depth == 3 && res == "config") {
    if (m == "GET") {
      return reply(200, config_json(s.config()));
    }
    if (m == "POST") {
      auto cfg = s.config();
      update_unsigned(body, "seed", cfg.seed);
      update_unsigned(body, "shots", cfg.shots);
      update_unsigned(body, "qubit_cap", cfg.qubit_cap);
      if (body.contains("thresholds")) {
        const auto& t = body["thresholds"];
        if (!t.is_object()) {
          bad_request("'thresholds' must be an object");
        }
        update_unsigned(t, "max_simple_qubits", cfg.thresholds.max_simple_qubits);
        update_unsigned(t, "max_simple_gates", cfg.thresholds.max_simple_gates);
      }
      if (cfg.shots == 0 || cfg.qubit_cap == 0 || cfg.thresholds.max_simple_qubits == 0 ||
          cfg.thresholds.max_simple_gates == 0) {
        bad_request("shots, qubit_cap and thresholds must be positive");
      }
      s.config() = cfg;
      return reply(200, config_json(cfg));
    }
  }
  throw HttpError(404, "NotFound", fmt::format("no route for {} /{}", method, fmt::join(parts, "/")));
}

int status_for(ErrorCode code) { return code == ErrorCode::SliceNotFound ? 404 : 422; }

} // namespace

DebugService::DebugService(ServiceOptions options)
    : options_(std::move(options)), id_state_(options_.id_seed) {}

std::size_t DebugService::session_count() const {
  std::lock_guard lock(registry_mutex_);
  return sessions_.size();
}

void DebugService::expire_idle() {
  const auto now = options_.clock();
  std::lock_guard lock(registry_mutex_);
  for (auto it = sessions_.begin(); it != sessions_.end();) {
    std::unique_lock entry_lock(it->second->mutex, std::try_to_lock);
    if (entry_lock.owns_lock() && now - it->second->last_used > options_.idle_ttl) {
      entry_lock.unlock();
      it = sessions_.erase(it);
    } else {
      ++it;
    }
  }
}

std::shared_ptr<DebugService::Entry> DebugService::find(const std::string& id) {
  std::lock_guard lock(registry_mutex_);
  const auto it = sessions_.find(id);
  return it == sessions_.end() ? nullptr : it->second;
}

std::string DebugService::create(Session session) {
  auto entry = std::make_shared<Entry>();
  entry->session = std::move(session);
  entry->last_used = options_.clock();
  std::lock_guard lock(registry_mutex_);
  std::string id;
  do {
    id = fmt::format("{:016x}", splitmix64(id_state_));
  } while (sessions_.contains(id));
  sessions_.emplace(id, std::move(entry));
  return id;
}

bool DebugService::erase(const std::string& id) {
  std::lock_guard lock(registry_mutex_);
  return sessions_.erase(id) > 0;
}

HttpResponse DebugService::handle(std::string_view method, std::string_view path,
                                  std::string_view body) {
  try {
    expire_idle();
    const auto parts = split_path(path);
    if (parts.size() == 1 && parts[0] == "health" && method == "GET") {
      return reply(200, {{"status", "ok"}, {"sessions", session_count()}});
    }
    if (parts.size() == 1 && parts[0] == "filter" && method == "POST") {
      const auto j = parse_body(body);
      if (!j.contains("counts") || !j["counts"].is_object() || !j.contains("pattern") ||
          !j["pattern"].is_string()) {
        bad_request("expected {\"counts\": {...}, \"pattern\": \"...\"}");
      }
      CountsMap counts;
      for (const auto& [label, n] : j["counts"].items()) {
        if (!n.is_number_unsigned()) {
          bad_request("counts must be non-negative integers");
        }
        counts.counts[label] = n.get<std::uint64_t>();
        counts.shots += n.get<std::uint64_t>();
      }
      const auto filtered = filter_counts(counts, OutcomePattern(j["pattern"].get<std::string>()));
      json c = json::object();
      for (const auto& [label, n] : filtered.counts) {
        c[label] = n;
      }
      return reply(200, {{"shots", filtered.shots}, {"counts", std::move(c)}});
    }
    if (parts.empty() || parts[0] != "sessions") {
      throw HttpError(404, "NotFound", fmt::format("no route for {} {}", method, path));
    }
    if (parts.size() == 1 && method == "POST") {
      const auto j = parse_body(body);
      if (!j.contains("qasm") || !j["qasm"].is_string()) {
        bad_request("expected {\"qasm\": \"...\"}");
      }
      Session session;
      const auto warnings =
          session.load_source(j["qasm"].get<std::string>(), j.value("name", std::string("<api>")));
      json w = json::array();
      for (const auto& d : warnings) {
        w.push_back(d.str());
      }
      json out{{"circuit", summary_json(session)}, {"warnings", std::move(w)},
               {"slices", slices_json(session)}};
      out["id"] = create(std::move(session));
      return reply(201, out);
    }
    if (parts.size() < 2) {
      throw HttpError(404, "NotFound", fmt::format("no route for {} {}", method, path));
    }
    if (parts.size() == 2 && method == "DELETE") {
      if (!erase(parts[1])) {
        throw HttpError(404, "UnknownSession", fmt::format("no session '{}'", parts[1]));
      }
      return reply(200, {{"deleted", parts[1]}});
    }
    const auto entry = find(parts[1]);
    if (!entry) {
      throw HttpError(404, "UnknownSession", fmt::format("no session '{}'", parts[1]));
    }
    std::lock_guard lock(entry->mutex);
    entry->last_used = options_.clock();
    const auto j = parse_body(body);
    // Work on a copy so a failing request leaves the session untouched.
    Session work = entry->session;
    auto response = session_route(work, method, parts, j);
    entry->session = std::move(work);
    return response;
  } catch (const HttpError& e) {
    return error_reply(e.status, e.code, e.what());
  } catch (const Error& e) {
    return error_reply(status_for(e.code()), to_string(e.code()), e.what());
  } catch (const nlohmann::json::exception& e) {
    return error_reply(400, "BadRequest", e.what());
  } catch (const std::exception& e) {
    return error_reply(500, "Internal", e.what());
  }
}

int serve(DebugService& service, const ServeOptions& options) {
  httplib::Server server;
  if (options.static_dir && !server.set_mount_point("/", *options.static_dir)) {
    fmt::print(stderr, "static directory '{}' not found\n", *options.static_dir);
    return 1;
  }
  const auto forward = [&service](const httplib::Request& req, httplib::Response& res) {
    const auto r = service.handle(req.method, req.path, req.body);
    res.status = r.status;
    res.set_content(r.body, r.content_type);
  };
  server.Get(R"(/.*)", forward);
  server.Post(R"(/.*)", forward);
  server.Delete(R"(/.*)", forward);
  int port = options.port;
  if (port == 0) {
    port = server.bind_to_any_port(options.host);
  } else if (!server.bind_to_port(options.host, port)) {
    port = -1;
  }
  if (port < 0) {
    fmt::print(stderr, "cannot bind {}:{}\n", options.host, options.port);
    return 1;
  }
  fmt::print("qcdb service listening on http://{}:{}\n", options.host, port);
  std::fflush(stdout);
  if (options.on_ready) {
    options.on_ready(port, [&server] { server.stop(); });
  }
  return server.listen_after_bind() ? 0 : 1;
}

} // namespace qcdb
