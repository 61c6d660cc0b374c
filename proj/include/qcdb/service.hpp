#pragma once

#include "qcdb/session.hpp"

#include <chrono>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>

namespace qcdb {

struct HttpResponse {
  int status = 200;
  std::string body;
  std::string content_type = "application/json";
};

struct ServiceOptions {
  std::chrono::seconds idle_ttl{3600};
  /// Seed for session ids; ids are opaque either way.
  std::uint64_t id_seed = 0;
  /// Clock used for idle expiry (tests substitute a fake).
  std::function<std::chrono::steady_clock::time_point()> clock = [] {
    return std::chrono::steady_clock::now();
  };
};

/// JSON facade over Session. handle() is a pure request -> response mapping
/// that the HTTP binding forwards to. Requests on different sessions run in
/// parallel; requests on one session are serialised.
class DebugService {
public:
  explicit DebugService(ServiceOptions options = {});

  HttpResponse handle(std::string_view method, std::string_view path, std::string_view body);

  [[nodiscard]] std::size_t session_count() const;

private:
  struct Entry {
    std::mutex mutex;
    Session session;
    std::chrono::steady_clock::time_point last_used;
  };

  std::shared_ptr<Entry> find(const std::string& id);
  std::string create(Session session);
  bool erase(const std::string& id);
  void expire_idle();

  ServiceOptions options_;
  mutable std::mutex registry_mutex_;
  std::map<std::string, std::shared_ptr<Entry>> sessions_;
  std::uint64_t id_state_;
};

struct ServeOptions {
  std::string host = "127.0.0.1";
  int port = 7317; // 0 picks a free port
  /// Called once listening, with the bound port and a callable that stops
  /// the server from any thread.
  std::function<void(int port, std::function<void()> stop)> on_ready;
  /// Directory served at / (the browser UI build), if any.
  std::optional<std::string> static_dir;
};

/// Blocks serving HTTP until the process is stopped. Returns nonzero if the
/// socket could not be bound.
int serve(DebugService& service, const ServeOptions& options);

} // namespace qcdb
