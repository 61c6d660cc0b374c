#include "qcdb/service.hpp"

#include <gtest/gtest.h>
#include <httplib.h>
#include <json.hpp>

#include <fstream>
#include <future>
#include <sstream>
#include <thread>

namespace qcdb {
namespace {

using nlohmann::json;

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

const std::string kCorpus = QCDB_SOURCE_DIR "/corpus/";

struct Reply {
  int status;
  json body;
};

struct Service : ::testing::Test {
  std::chrono::steady_clock::time_point now{};
  DebugService service{ServiceOptions{std::chrono::seconds(60), 1, [this] { return now; }}};

  Reply call(std::string_view method, const std::string& path, const json& body = nullptr) {
    const auto r = service.handle(method, path, body.is_null() ? "" : body.dump());
    EXPECT_EQ(r.content_type, "application/json");
    return {r.status, json::parse(r.body)};
  }

  std::string open(const std::string& file) {
    const auto r = call("POST", "/sessions", {{"qasm", read_file(kCorpus + file)}, {"name", file}});
    EXPECT_EQ(r.status, 201) << r.body.dump();
    return r.body["id"];
  }
};

TEST_F(Service, Health) {
  const auto r = call("GET", "/health");
  EXPECT_EQ(r.status, 200);
  EXPECT_EQ(r.body["status"], "ok");
}

TEST_F(Service, CreateGroverSessionGivesThreeSlices) {
  const auto r = call("POST", "/sessions",
                      {{"qasm", read_file(kCorpus + "grover_triangle_debug.qasm")}});
  ASSERT_EQ(r.status, 201);
  EXPECT_EQ(r.body["circuit"]["num_qubits"], 13);
  EXPECT_EQ(r.body["circuit"]["breakbarriers"], json::array({4, 22}));
  const std::string id = r.body["id"];
  const auto s = call("POST", "/sessions/" + id + "/slices", {{"mode", "standalone"}});
  ASSERT_EQ(s.status, 200);
  ASSERT_EQ(s.body["slices"].size(), 3U);
  const char* expected[] = {"full_quantum", "pseudo_classical", "full_quantum"};
  for (std::size_t k = 0; k < 3; ++k) {
    EXPECT_EQ(s.body["slices"][k]["category"]["behaviour"], expected[k]);
  }
}

TEST_F(Service, AddBreakbarriersThenSlice) {
  // The same program without its markers: the user places both cuts.
  std::string src = read_file(kCorpus + "grover_triangle_debug.qasm");
  for (std::size_t pos; (pos = src.find("//@break\n")) != std::string::npos;) {
    src.erase(pos, 9);
  }
  auto r = call("POST", "/sessions", {{"qasm", src}});
  ASSERT_EQ(r.status, 201);
  EXPECT_EQ(r.body["slices"]["slices"].size(), 1U);
  const std::string id = r.body["id"];
  // Ordinary barriers sit at 4 and 22; cut right after each.
  ASSERT_EQ(call("POST", "/sessions/" + id + "/breakbarriers", {{"position", 5}}).status, 200);
  r = call("POST", "/sessions/" + id + "/breakbarriers", {{"position", 24}});
  ASSERT_EQ(r.status, 200) << r.body.dump();
  ASSERT_EQ(r.body["slices"]["slices"].size(), 3U);
  EXPECT_EQ(r.body["slices"]["slices"][1]["category"]["behaviour"], "pseudo_classical");
  r = call("DELETE", "/sessions/" + id + "/breakbarriers/0");
  EXPECT_EQ(r.body["slices"]["slices"].size(), 2U);
}

TEST_F(Service, RunAfterHsliceGivesSixteenAmplitudes) {
  const auto id = open("grover_triangle_debug.qasm");
  auto r = call("POST", "/sessions/" + id + "/hslice", {{"slice", 0}});
  ASSERT_EQ(r.status, 200);
  EXPECT_EQ(r.body["num_qubits"], 4);
  EXPECT_EQ(r.body["removed_qubits"].size(), 9U);
  r = call("POST", "/sessions/" + id + "/run",
           {{"slice", 0}, {"init", {{"kind", "basis"}, {"n", 4}, {"bits", "0000"}}}});
  ASSERT_EQ(r.status, 200) << r.body.dump();
  EXPECT_EQ(r.body["kind"], "statevector");
  ASSERT_EQ(r.body["amplitudes"].size(), 16U);
  for (const auto& a : r.body["amplitudes"]) {
    EXPECT_NEAR(a["prob"].get<double>(), 0.0625, 1e-12);
    EXPECT_EQ(a["bitstring"].get<std::string>().size(), 4U);
  }
}

TEST_F(Service, SamplingIsDeterministicPerSeed) {
  const auto id = open("grover_triangle.qasm");
  const json req{{"slice", "full"}, {"init", "zero"}, {"run_mode", "sampling"},
                 {"shots", 500},    {"seed", 11}};
  const auto a = call("POST", "/sessions/" + id + "/run", req);
  const auto b = call("POST", "/sessions/" + id + "/run", req);
  ASSERT_EQ(a.status, 200) << a.body.dump();
  EXPECT_EQ(a.body, b.body);
  EXPECT_EQ(a.body["kind"], "counts");
  EXPECT_EQ(a.body["shots"], 500);
  EXPECT_GT(a.body["counts"]["0111"].get<int>(), 400);
  // A measured target cannot be dumped as a statevector.
  const auto sv = call("POST", "/sessions/" + id + "/run",
                       {{"slice", "full"}, {"init", "zero"}, {"run_mode", "statevector"}});
  EXPECT_EQ(sv.status, 422);
  EXPECT_EQ(sv.body["error"]["code"], "MeasurementPresent");
}

TEST_F(Service, GateProvenance) {
  const auto id = open("diffusion_buggy.qasm");
  auto r = call("GET", "/sessions/" + id + "/gates/x");
  ASSERT_EQ(r.status, 200);
  EXPECT_EQ(r.body["total"], 9);
  ASSERT_EQ(r.body["sites"].size(), 3U);
  EXPECT_EQ(r.body["sites"][2]["line"], 7);
  EXPECT_EQ(r.body["sites"][2]["context"], "grover_diff");
  EXPECT_NE(r.body["report"].get<std::string>().find("in the following locations"),
            std::string::npos);
  r = call("GET", "/sessions/" + id + "/gates/zz");
  EXPECT_EQ(r.status, 422);
  EXPECT_EQ(r.body["error"]["code"], "UnknownGateKind");
  r = call("GET", "/sessions/" + id + "/gates");
  EXPECT_EQ(r.body["x"]["sites"], 3);
}

TEST_F(Service, CircuitListingCarriesProvenance) {
  const auto id = open("qft3.qasm");
  const auto r = call("GET", "/sessions/" + id + "/circuit");
  ASSERT_EQ(r.status, 200);
  const auto& first = r.body["instructions"][0];
  EXPECT_EQ(first["kind"], "h");
  EXPECT_EQ(first["provenance"]["line"], 5);
  EXPECT_EQ(first["qubits"][0]["flat"], 2);
  EXPECT_EQ(r.body["instructions"][3]["kind"], "breakbarrier");
}

TEST_F(Service, DiffusionSliceQasmAndConfig) {
  const auto id = open("grover_triangle_debug.qasm");
  ASSERT_EQ(call("POST", "/sessions/" + id + "/hslice", {{"slice", 2}}).status, 200);
  auto r = call("POST", "/sessions/" + id + "/diffusion", {{"slice", 2}});
  EXPECT_EQ(r.body["pass"], true);
  r = call("GET", "/sessions/" + id + "/slices/2/qasm");
  EXPECT_EQ(r.body["file"], "grover_triangle_debug.slice2.qasm");
  EXPECT_NE(r.body["qasm"].get<std::string>().find("qreg nodes[4];"), std::string::npos);
  r = call("POST", "/sessions/" + id + "/config",
           {{"shots", 64}, {"thresholds", {{"max_simple_qubits", 20}}}});
  EXPECT_EQ(r.body["shots"], 64);
  r = call("GET", "/sessions/" + id + "/slices");
  EXPECT_EQ(r.body["slices"][1]["category"]["complexity"], "simple");
  EXPECT_EQ(call("POST", "/sessions/" + id + "/config", {{"shots", -5}}).status, 400);
  EXPECT_EQ(call("POST", "/sessions/" + id + "/config", {{"shots", 0}}).status, 400);
}

TEST_F(Service, FilterEndpoint) {
  const auto r = call("POST", "/filter",
                      {{"counts", {{"0101 000", 26}, {"0111 111", 33}, {"0110 000", 35}}},
                       {"pattern", "\xC2\xB7\xC2\xB7\xC2\xB7\xC2\xB7 111"}});
  ASSERT_EQ(r.status, 200);
  EXPECT_EQ(r.body["counts"], (json{{"0111 111", 33}}));
  EXPECT_EQ(call("POST", "/filter", {{"counts", {{"01", 1}}}, {"pattern", "0"}}).body["error"]["code"],
            "PatternLengthMismatch");
}

TEST_F(Service, ErrorMapping) {
  EXPECT_EQ(call("GET", "/sessions/nope/circuit").status, 404);
  EXPECT_EQ(call("GET", "/sessions/nope/circuit").body["error"]["code"], "UnknownSession");
  EXPECT_EQ(call("GET", "/nowhere").status, 404);
  EXPECT_EQ(service.handle("POST", "/sessions", "{not json").status, 400);
  EXPECT_EQ(call("POST", "/sessions", {{"text", "x"}}).status, 400);
  auto r = call("POST", "/sessions", {{"qasm", "OPENQASM 2.0; qreg q[1]; foo q[0];"}});
  EXPECT_EQ(r.status, 422);
  EXPECT_EQ(r.body["error"]["code"], "ParseError");
  const auto id = open("qft3.qasm");
  r = call("POST", "/sessions/" + id + "/run", {{"slice", 9}, {"init", "zero"}});
  EXPECT_EQ(r.status, 404);
  EXPECT_EQ(r.body["error"]["code"], "SliceNotFound");
  EXPECT_EQ(call("POST", "/sessions/" + id + "/run", {{"slice", -1}, {"init", "zero"}}).status, 400);
  EXPECT_EQ(call("POST", "/sessions/" + id + "/slices", {{"mode", "sideways"}}).status, 400);
  EXPECT_EQ(call("POST", "/sessions/" + id + "/breakbarriers", {{"position", 999}}).body["error"]["code"],
            "PositionOutOfRange");
  EXPECT_EQ(call("DELETE", "/sessions/" + id + "/breakbarriers/abc").status, 400);
  // Cap violations are domain errors.
  ASSERT_EQ(call("POST", "/sessions/" + id + "/config", {{"qubit_cap", 2}}).status, 200);
  r = call("POST", "/sessions/" + id + "/run", {{"slice", 0}, {"init", "zero"}});
  EXPECT_EQ(r.status, 422);
  EXPECT_EQ(r.body["error"]["code"], "CapExceeded");
}

TEST_F(Service, FailedRequestsLeaveSessionUnchanged) {
  const auto id = open("qft3.qasm");
  const auto before = call("GET", "/sessions/" + id + "/circuit").body;
  EXPECT_NE(call("POST", "/sessions/" + id + "/breakbarriers", {{"position", 999}}).status, 200);
  EXPECT_NE(call("DELETE", "/sessions/" + id + "/breakbarriers/9").status, 200);
  EXPECT_EQ(call("GET", "/sessions/" + id + "/circuit").body, before);
}

TEST_F(Service, SessionsAreIsolated) {
  const auto a = open("qft3.qasm");
  const auto b = open("qft3.qasm");
  EXPECT_NE(a, b);
  ASSERT_EQ(call("POST", "/sessions/" + a + "/breakbarriers", {{"position", 1}}).status, 200);
  ASSERT_EQ(call("POST", "/sessions/" + a + "/slices", {{"mode", "accumulated"}}).status, 200);
  const auto sb = call("GET", "/sessions/" + b + "/slices").body;
  EXPECT_EQ(sb["slices"].size(), 4U);
  EXPECT_EQ(sb["mode"], "standalone");
  EXPECT_EQ(call("GET", "/sessions/" + a + "/slices").body["slices"].size(), 5U);
  EXPECT_EQ(call("DELETE", "/sessions/" + a).status, 200);
  EXPECT_EQ(call("GET", "/sessions/" + a + "/slices").status, 404);
  EXPECT_EQ(call("GET", "/sessions/" + b + "/slices").status, 200);
}

TEST_F(Service, IdleSessionsExpire) {
  const auto a = open("qft3.qasm");
  now += std::chrono::seconds(50);
  const auto b = open("qft3.qasm");
  now += std::chrono::seconds(30); // a idle 80s, b idle 30s
  EXPECT_EQ(call("GET", "/sessions/" + a + "/circuit").status, 404);
  EXPECT_EQ(call("GET", "/sessions/" + b + "/circuit").status, 200);
  EXPECT_EQ(service.session_count(), 1U);
}

TEST_F(Service, ConcurrentSessions) {
  std::vector<std::string> ids;
  for (int i = 0; i < 4; ++i) {
    ids.push_back(open("grover_triangle.qasm"));
  }
  std::vector<std::future<json>> runs;
  for (int i = 0; i < 16; ++i) {
    runs.push_back(std::async(std::launch::async, [&, i] {
      return json::parse(service
                             .handle("POST", "/sessions/" + ids[i % 4] + "/run",
                                     json{{"slice", "full"}, {"init", "zero"}, {"shots", 300}, {"seed", 4}}.dump())
                             .body);
    }));
  }
  const auto first = runs[0].get();
  for (std::size_t i = 1; i < runs.size(); ++i) {
    EXPECT_EQ(runs[i].get(), first);
  }
}

TEST(Serve, LiveHttpRoundTrip) {
  DebugService service;
  std::promise<std::pair<int, std::function<void()>>> ready;
  ServeOptions opts;
  opts.port = 0;
  opts.on_ready = [&](int port, std::function<void()> stop) {
    ready.set_value({port, std::move(stop)});
  };
  std::thread server([&] { serve(service, opts); });
  auto [port, stop] = ready.get_future().get();
  httplib::Client client("127.0.0.1", port);
  auto health = client.Get("/health");
  ASSERT_TRUE(health);
  EXPECT_EQ(health->status, 200);
  auto created = client.Post("/sessions", json{{"qasm", read_file(kCorpus + "qft3.qasm")}}.dump(),
                             "application/json");
  ASSERT_TRUE(created);
  EXPECT_EQ(created->status, 201);
  const std::string id = json::parse(created->body)["id"];
  auto gates = client.Get("/sessions/" + id + "/gates/zz");
  ASSERT_TRUE(gates);
  EXPECT_EQ(gates->status, 422);
  auto del = client.Delete("/sessions/" + id);
  ASSERT_TRUE(del);
  EXPECT_EQ(del->status, 200);
  stop();
  server.join();
}

} // namespace
} // namespace qcdb
