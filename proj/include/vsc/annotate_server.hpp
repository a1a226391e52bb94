#pragma once

#include <filesystem>
#include <memory>
#include <string>
#include <thread>

#include "vsc/annotate.hpp"
#include "vsc/error.hpp"

namespace httplib {
class Server;
}

namespace vsc {

struct ServerOptions {
  std::string host = "127.0.0.1";
  int port = 8080;  // 0 picks a free port
  /// Served at "/" when set (the browser client's build output).
  std::filesystem::path static_dir;
};

/// HTTP JSON front end over an AnnotationStore.
///
///   POST /sessions                      {"expert_id", "test_fold"?, "seed"?}
///   GET  /sessions/{id}
///   GET  /sessions/{id}/items/{index}
///   POST /sessions/{id}/answers         {"index", "category"}
///   POST /sessions/{id}/finalize
///   GET  /images/{corpus_hash}/{name}
///
/// Errors come back as {"error": kind, "message": text}.
class AnnotationServer {
 public:
  AnnotationServer(AnnotationStore& store, ServerOptions options);
  ~AnnotationServer();

  /// Binds the socket; throws kConfig if the port is unavailable. Returns the
  /// bound port.
  int bind();
  /// Serves until stop(); call after bind().
  void listen();
  /// bind() then listen() on a background thread.
  int start();
  void stop();

 private:
  void install_routes();

  AnnotationStore& store_;
  ServerOptions options_;
  std::unique_ptr<httplib::Server> server_;
  std::thread thread_;
  int bound_port_ = -1;
};

/// HTTP status used for each error kind.
int http_status_for(ErrorKind kind);

}  // namespace vsc
