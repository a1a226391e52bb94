#include "vsc/annotate_server.hpp"

#include <httplib.h>

#include "vsc/error.hpp"
#include "vsc/report.hpp"

namespace vsc {

using nlohmann::json;

int http_status_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kNotFound: return 404;
    case ErrorKind::kState:
    case ErrorKind::kIncomplete: return 409;
    case ErrorKind::kIo: return 500;
    default: return 400;
  }
}

namespace {

void send_json(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_header("Cache-Control", "no-store");
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, ErrorKind kind, const std::string& message) {
  send_json(res, http_status_for(kind), {{"error", to_string(kind)}, {"message", message}});
}

json parse_body(const httplib::Request& req) {
  if (req.body.empty()) return json::object();
  try {
    json j = json::parse(req.body);
    if (!j.is_object()) throw Error(ErrorKind::kValidation, "request body must be a JSON object");
    return j;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kValidation, std::string("malformed JSON body: ") + e.what());
  }
}

template <typename Fn>
httplib::Server::Handler guarded(Fn fn) {
  return [fn](const httplib::Request& req, httplib::Response& res) {
    try {
      fn(req, res);
    } catch (const Error& e) {
      send_error(res, e.kind(), e.what());
    } catch (const json::exception& e) {
      send_error(res, ErrorKind::kValidation, e.what());
    } catch (const std::exception& e) {
      send_error(res, ErrorKind::kIo, e.what());
    }
  };
}

std::size_t parse_index(const std::string& s) {
  if (s.empty() || s.size() > 9 || s.find_first_not_of("0123456789") != std::string::npos) {
    throw Error(ErrorKind::kRange, "bad item index '" + s + "'");
  }
  return static_cast<std::size_t>(std::stoul(s));
}

}  // namespace

AnnotationServer::AnnotationServer(AnnotationStore& store, ServerOptions options)
    : store_(store), options_(std::move(options)), server_(std::make_unique<httplib::Server>()) {
  install_routes();
}

AnnotationServer::~AnnotationServer() { stop(); }

void AnnotationServer::install_routes() {
  auto& srv = *server_;

  srv.Post("/sessions", guarded([this](const httplib::Request& req, httplib::Response& res) {
    const json body = parse_body(req);
    const auto expert = body.value("expert_id", std::string());
    const int fold = body.value("test_fold", store_.config().test_fold);
    const auto seed = body.value("seed", store_.config().seed);
    const auto s = store_.create_session(expert, fold, store_.config().exemplars, seed);
    send_json(res, 201, store_.describe(s.session_id));
  }));

  srv.Get(R"(/sessions/([0-9a-f]+))",
          guarded([this](const httplib::Request& req, httplib::Response& res) {
            send_json(res, 200, store_.describe(req.matches[1]));
          }));

  srv.Get(R"(/sessions/([0-9a-f]+)/items/([^/]+))",
          guarded([this](const httplib::Request& req, httplib::Response& res) {
            send_json(res, 200, store_.get_item(req.matches[1], parse_index(req.matches[2])));
          }));

  srv.Post(R"(/sessions/([0-9a-f]+)/answers)",
           guarded([this](const httplib::Request& req, httplib::Response& res) {
             const json body = parse_body(req);
             if (!body.contains("index") || !body["index"].is_number_unsigned()) {
               throw Error(ErrorKind::kValidation, "answers need a non-negative integer 'index'");
             }
             if (!body.contains("category") || !body["category"].is_string()) {
               throw Error(ErrorKind::kValidation, "answers need a string 'category'");
             }
             const std::string id = req.matches[1];
             const auto answered = store_.submit_answer(id, body["index"].get<std::size_t>(),
                                                        body["category"].get<std::string>());
             const auto total = store_.get_session(id).total();
             send_json(res, 200, {{"progress", {{"answered", answered}, {"total", total}}}});
           }));

  srv.Post(R"(/sessions/([0-9a-f]+)/finalize)",
           guarded([this](const httplib::Request& req, httplib::Response& res) {
             const auto out = store_.finalize(req.matches[1]);
             send_json(res, 200,
                       {{"records", out.records},
                        {"result", out.result},
                        {"accuracy", out.result.accuracy_all}});
           }));

  srv.Get(R"(/images/([0-9a-f]+)/([0-9a-f]+\.png))",
          guarded([this](const httplib::Request& req, httplib::Response& res) {
            auto path = store_.image_path(req.matches[1], req.matches[2]);
            if (!path) throw Error(ErrorKind::kNotFound, "unknown image");
            res.status = 200;
            res.set_header("Cache-Control", "public, max-age=31536000, immutable");
            res.set_content(read_text_file(*path), "image/png");
          }));

  if (!options_.static_dir.empty()) {
    srv.set_mount_point("/", options_.static_dir.string());
  }
}

int AnnotationServer::bind() {
  server_->set_socket_options([](socket_t sock) {
    int yes = 1;
    ::setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, reinterpret_cast<const char*>(&yes), sizeof(yes));
  });
  if (options_.port == 0) {
    bound_port_ = server_->bind_to_any_port(options_.host);
  } else {
    bound_port_ = server_->bind_to_port(options_.host, options_.port) ? options_.port : -1;
  }
  if (bound_port_ < 0) {
    throw Error(ErrorKind::kConfig, "cannot bind " + options_.host + ":" + std::to_string(options_.port));
  }
  return bound_port_;
}

void AnnotationServer::listen() { server_->listen_after_bind(); }

int AnnotationServer::start() {
  const int port = bind();
  thread_ = std::thread([this] { listen(); });
  server_->wait_until_ready();
  return port;
}

void AnnotationServer::stop() {
  if (server_) server_->stop();
  if (thread_.joinable()) thread_.join();
}

}  // namespace vsc
