#include <httplib.h>

#include <spdlog/spdlog.h>

#include "tap/service.hpp"

namespace tap::service {

namespace {

void send(httplib::Response& res, int status, const Json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void fail(httplib::Response& res, int status, const std::string& kind, const std::string& message) {
  send(res, status, Json{{"error", kind}, {"message", message}});
}

Json body_json(const httplib::Request& req, bool allow_empty) {
  if (req.body.empty() && allow_empty) return Json::object();
  try {
    return Json::parse(req.body);
  } catch (const Json::parse_error& e) {
    throw ParseError(std::string("body: ") + e.what());
  }
}

/// Maps toolkit errors to HTTP statuses.
template <typename F>
httplib::Server::Handler guarded(F f) {
  return [f](const httplib::Request& req, httplib::Response& res) {
    try {
      f(req, res);
    } catch (const NotFound& e) {
      fail(res, 404, "not_found", e.what());
    } catch (const Busy& e) {
      send(res, 409, Json{{"error", "busy"}, {"message", e.what()}, {"progress", to_json(e.progress())}});
    } catch (const Stale& e) {
      fail(res, 409, "stale", e.what());
    } catch (const BadEdit& e) {
      fail(res, 400, "bad_edit", e.what());
    } catch (const ValidationError& e) {
      send(res, 400, Json{{"error", "validation"}, {"message", e.what()}, {"path", e.path()}});
    } catch (const ParseError& e) {
      fail(res, 400, "parse", e.what());
    } catch (const Error& e) {
      fail(res, 400, "invalid", e.what());
    } catch (const std::exception& e) {
      spdlog::error("{} {}: {}", req.method, req.path, e.what());
      fail(res, 500, "internal", e.what());
    }
  };
}

std::string sse(const std::string& event, const Json& data) {
  return "event: " + event + "\ndata: " + data.dump() + "\n\n";
}

}  // namespace

struct Server::Impl {
  Store& store;
  httplib::Server http;
  explicit Impl(Store& s) : store(s) {}
};

Server::Server(Store& store) : impl_(std::make_unique<Impl>(store)) {
  auto& http = impl_->http;
  Store& st = store;
  const std::string id = "/sessions/([^/]+)";

  http.Get("/sessions", guarded([&st](const httplib::Request&, httplib::Response& res) {
             send(res, 200, Json{{"sessions", st.ids()}});
           }));
  http.Post("/sessions", guarded([&st](const httplib::Request& req, httplib::Response& res) {
              const Instance inst = instance_from_json(body_json(req, false));
              const std::string sid = st.create(inst);
              spdlog::info("session {} created ({})", sid, inst.label());
              send(res, 201, Json{{"id", sid}, {"revision", 0}});
            }));
  http.Get(id, guarded([&st](const httplib::Request& req, httplib::Response& res) {
             send(res, 200, st.describe(req.matches[1]));
           }));
  http.Post(id + "/edits", guarded([&st](const httplib::Request& req, httplib::Response& res) {
              const int rev = st.apply_edit(req.matches[1], edit_from_json(body_json(req, false)));
              send(res, 200, Json{{"revision", rev}});
            }));
  http.Post(id + "/solve", guarded([&st](const httplib::Request& req, httplib::Response& res) {
              const std::string sid = req.matches[1];
              const int rev = st.start_solve(sid, config_from_json(body_json(req, true)));
              spdlog::info("session {} solving revision {}", sid, rev);
              if (req.has_param("wait") && req.get_param_value("wait") != "0") {
                st.wait(sid);
                send(res, 200, st.outcome(sid));
                return;
              }
              send(res, 202, Json{{"revision", rev}, {"state", "running"}});
            }));
  http.Get(id + "/outcome", guarded([&st](const httplib::Request& req, httplib::Response& res) {
             send(res, 200, st.outcome(req.matches[1]));
           }));
  http.Get(id + "/report", guarded([&st](const httplib::Request& req, httplib::Response& res) {
             send(res, 200, st.report(req.matches[1], std::nullopt));
           }));
  http.Post(id + "/report", guarded([&st](const httplib::Request& req, httplib::Response& res) {
              const std::string sid = req.matches[1];
              std::optional<Assignment> manual;
              if (!req.body.empty()) manual = read_solution(st.current_instance(sid), req.body);
              send(res, 200, st.report(sid, manual));
            }));
  http.Post(id + "/cancel", guarded([&st](const httplib::Request& req, httplib::Response& res) {
              send(res, 200, Json{{"cancelled", st.cancel(req.matches[1])}});
            }));
  http.Get(id + "/events", guarded([&st](const httplib::Request& req, httplib::Response& res) {
             const std::string sid = req.matches[1];
             st.describe(sid);  // 404 before the stream starts
             auto sent = std::make_shared<std::size_t>(0);
             res.set_chunked_content_provider(
                 "text/event-stream", [&st, sid, sent](std::size_t, httplib::DataSink& sink) {
                   bool finished = false;
                   auto batch = st.events(sid, *sent, finished);
                   if (batch.empty() && !finished) {
                     st.wait_event(sid, *sent, 1.0);
                     batch = st.events(sid, *sent, finished);
                   }
                   for (const auto& p : batch) {
                     const std::string chunk = sse("progress", to_json(p));
                     if (!sink.write(chunk.data(), chunk.size())) return false;
                   }
                   *sent += batch.size();
                   if (finished) {
                     const Json o = st.outcome(sid);
                     Json done{{"state", o["state"]}, {"revision", o["revision"]}};
                     if (!o["outcome"].is_null()) {
                       done["status"] = o["outcome"]["status"];
                       done["objective"] = o["outcome"]["objective"];
                     }
                     const std::string chunk = sse("done", done);
                     sink.write(chunk.data(), chunk.size());
                     sink.done();
                   }
                   return true;
                 });
           }));
}

Server::~Server() { stop(); }

bool Server::listen(const std::string& host, int port) { return impl_->http.listen(host, port); }

int Server::bind_any(const std::string& host) { return impl_->http.bind_to_any_port(host); }

bool Server::listen_after_bind() { return impl_->http.listen_after_bind(); }

void Server::stop() {
  if (impl_->http.is_running()) impl_->http.stop();
}

}  // namespace tap::service
