#include "dataclaw/gateway/http_server.hpp"

#include <httplib.h>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "dataclaw/core/error.hpp"
#include "dataclaw/stream/sse.hpp"

namespace dataclaw::gateway {

namespace {

constexpr auto kStreamPoll = std::chrono::milliseconds(200);

int http_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::NotFound:
    case ErrorCode::UnknownSession:
    case ErrorCode::UnknownHandle:
    case ErrorCode::UnknownReference:
      return 404;
    case ErrorCode::TurnInFlight:
      return 429;
    case ErrorCode::SessionClosed:
    case ErrorCode::DuplicateName:
      return 409;
    case ErrorCode::CapacityExceeded:
      return 503;
    case ErrorCode::PathEscape:
      return 403;
    case ErrorCode::InvalidConfig:
    case ErrorCode::ParseError:
    case ErrorCode::Precondition:
    case ErrorCode::BadQuery:
    case ErrorCode::BadOp:
    case ErrorCode::BadSpec:
    case ErrorCode::MissingField:
    case ErrorCode::MalformedSkill:
      return 400;
    default:
      return 500;
  }
}

void send_json(httplib::Response& res, int status, const Json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, std::string_view code, const std::string& message) {
  send_json(res, status, {{"error", code}, {"message", message}});
}

Json parse_body(const httplib::Request& req) {
  if (req.body.empty()) return Json::object();
  try {
    return Json::parse(req.body);
  } catch (const Json::parse_error& e) {
    throw Error(ErrorCode::ParseError, fmt::format("request body is not JSON: {}", e.what()));
  }
}

std::string body_string(const Json& body, const char* key) {
  if (!body.is_object() || !body.contains(key) || !body[key].is_string()) {
    throw Error(ErrorCode::Precondition, fmt::format("body needs a string '{}'", key));
  }
  return body[key].get<std::string>();
}

using Handler = std::function<void(const httplib::Request&, httplib::Response&)>;

// Maps runtime errors to JSON error responses.
Handler guarded(Handler h) {
  return [h = std::move(h)](const httplib::Request& req, httplib::Response& res) {
    try {
      h(req, res);
    } catch (const Error& e) {
      send_error(res, http_status(e.code()), to_string(e.code()), e.what());
    } catch (const std::exception& e) {
      spdlog::error("{} {} failed: {}", req.method, req.path, e.what());
      send_error(res, 500, "Internal", e.what());
    }
  };
}

int ingest_status(IngestOutcome::Status s) {
  switch (s) {
    case IngestOutcome::Status::accepted: return 202;
    case IngestOutcome::Status::unknown_channel:
    case IngestOutcome::Status::disabled: return 404;
    case IngestOutcome::Status::unauthorized: return 401;
    case IngestOutcome::Status::malformed: return 400;
    case IngestOutcome::Status::busy: return 429;
    case IngestOutcome::Status::over_capacity: return 503;
  }
  return 500;
}

std::int64_t last_event_id(const httplib::Request& req) {
  std::string raw;
  if (req.has_header("Last-Event-ID")) {
    raw = req.get_header_value("Last-Event-ID");
  } else if (req.has_param("last_event_id")) {
    raw = req.get_param_value("last_event_id");
  }
  if (raw.empty()) return 0;
  try {
    std::size_t used = 0;
    const auto v = std::stoll(raw, &used);
    if (used != raw.size() || v < 0) throw std::invalid_argument(raw);
    return v;
  } catch (const std::exception&) {
    throw Error(ErrorCode::Precondition, fmt::format("Last-Event-ID '{}' is not a sequence number", raw));
  }
}

}  // namespace

HttpServer::HttpServer(AgentService& service, ServerOptions options)
    : service_(service), options_(options), server_(std::make_unique<httplib::Server>()) {
  const auto threads = options_.threads;
  server_->new_task_queue = [threads] { return new httplib::ThreadPool(threads); };
  // No SO_REUSEPORT: a second server on the same port must fail to bind.
  server_->set_socket_options([](socket_t sock) {
    int yes = 1;
    setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, reinterpret_cast<const void*>(&yes), sizeof(yes));
  });
  install_routes();
}

HttpServer::~HttpServer() { stop(); }

bool HttpServer::bind(const std::string& host, int port) {
  if (port == 0) {
    port_ = server_->bind_to_any_port(host);
    return port_ > 0;
  }
  if (!server_->bind_to_port(host, port)) return false;
  port_ = port;
  return true;
}

void HttpServer::start() {
  thread_ = std::thread([this] { server_->listen_after_bind(); });
  server_->wait_until_ready();
}

void HttpServer::listen() { server_->listen_after_bind(); }

void HttpServer::stop() {
  if (stopping_.exchange(true)) return;
  {
    std::lock_guard lock(streams_mu_);
    for (auto& w : streams_) {
      if (auto s = w.lock()) s->cancel();
    }
  }
  server_->stop();
  if (thread_.joinable()) thread_.join();
}

void HttpServer::install_routes() {
  auto& svr = *server_;
  auto& svc = service_;

  // Channels
  svr.Post(R"(/api/channels/([^/]+)/webhook)", guarded([&svc](const auto& req, auto& res) {
             std::optional<std::string> secret;
             if (req.has_header("X-Telegram-Bot-Api-Secret-Token")) {
               secret = req.get_header_value("X-Telegram-Bot-Api-Secret-Token");
             }
             const auto out = svc.ingest_webhook(req.matches[1], req.body, secret);
             if (out.status == IngestOutcome::Status::accepted) {
               send_json(res, 202, {{"session_id", out.session_id}, {"message_id", out.message_id}});
             } else {
               send_error(res, ingest_status(out.status), to_string(out.status), out.message);
             }
           }));
  svr.Get("/api/channels", guarded([&svc](const auto&, auto& res) {
            Json list = Json::array();
            for (const auto& c : svc.channels()) list.push_back(to_json(c));
            send_json(res, 200, {{"channels", list}});
          }));
  svr.Post("/api/channels", guarded([&svc](const auto& req, auto& res) {
             auto c = channel_from_json(parse_body(req));
             if (svc.channel(c.channel_id)) {
               throw Error(ErrorCode::DuplicateName, fmt::format("channel '{}' already exists", c.channel_id));
             }
             svc.put_channel(c);
             send_json(res, 201, to_json(c));
           }));
  svr.Get(R"(/api/channels/([^/]+))", guarded([&svc](const auto& req, auto& res) {
            auto c = svc.channel(req.matches[1]);
            if (!c) throw Error(ErrorCode::NotFound, fmt::format("unknown channel '{}'", req.matches[1].str()));
            send_json(res, 200, to_json(*c));
          }));
  svr.Put(R"(/api/channels/([^/]+))", guarded([&svc](const auto& req, auto& res) {
            auto body = parse_body(req);
            const std::string id = req.matches[1];
            if (body.is_object() && !body.contains("channel_id")) body["channel_id"] = id;
            if (auto existing = svc.channel(id); existing && body.is_object()) {
              // Unspecified fields keep their current values.
              auto merged = to_json(*existing);
              for (const auto& [k, v] : body.items()) merged[k] = v;
              body = merged;
            }
            auto c = channel_from_json(body);
            if (c.channel_id != id) throw Error(ErrorCode::Precondition, "channel_id does not match the path");
            svc.put_channel(c);
            send_json(res, 200, to_json(c));
          }));
  svr.Delete(R"(/api/channels/([^/]+))", guarded([&svc](const auto& req, auto& res) {
               if (!svc.remove_channel(req.matches[1])) {
                 throw Error(ErrorCode::NotFound, fmt::format("unknown channel '{}'", req.matches[1].str()));
               }
               res.status = 204;
             }));
  svr.Get(R"(/api/channels/([^/]+)/outbox)", guarded([&svc](const auto& req, auto& res) {
            if (!svc.channel(req.matches[1])) {
              throw Error(ErrorCode::NotFound, fmt::format("unknown channel '{}'", req.matches[1].str()));
            }
            Json list = Json::array();
            for (const auto& r : svc.outbox(req.matches[1])) list.push_back(to_json(r));
            send_json(res, 200, {{"deliveries", list}});
          }));

  // Sessions
  svr.Get("/api/sessions", guarded([&svc](const auto&, auto& res) {
            Json list = Json::array();
            for (const auto& v : svc.sessions()) list.push_back(to_json(v));
            send_json(res, 200, {{"sessions", list}});
          }));
  svr.Post("/api/sessions", guarded([&svc](const auto& req, auto& res) {
             const auto body = parse_body(req);
             std::string channel = "console";
             if (body.contains("channel_id")) channel = body_string(body, "channel_id");
             const auto s = svc.create_session(channel);
             send_json(res, 201, to_json(*svc.session(s.id)));
           }));
  svr.Get(R"(/api/sessions/([^/]+))", guarded([&svc](const auto& req, auto& res) {
            auto v = svc.session(req.matches[1]);
            if (!v) throw Error(ErrorCode::UnknownSession, fmt::format("unknown session '{}'", req.matches[1].str()));
            send_json(res, 200, to_json(*v));
          }));
  svr.Delete(R"(/api/sessions/([^/]+))", guarded([&svc](const auto& req, auto& res) {
               svc.close_session(req.matches[1]);
               res.status = 204;
             }));
  svr.Post(R"(/api/sessions/([^/]+)/messages)", guarded([&svc](const auto& req, auto& res) {
             const auto body = parse_body(req);
             const auto handle = svc.submit(req.matches[1], body_string(body, "text"));
             send_json(res, 202, {{"session_id", handle.session_id}, {"message_id", handle.message_id}});
           }));
  svr.Post(R"(/api/sessions/([^/]+)/cancel)", guarded([&svc](const auto& req, auto& res) {
             send_json(res, 202, {{"cancelled", svc.cancel(req.matches[1])}});
           }));
  svr.Get(R"(/api/sessions/([^/]+)/trace)", guarded([&svc](const auto& req, auto& res) {
            if (!svc.session(req.matches[1])) {
              throw Error(ErrorCode::UnknownSession, fmt::format("unknown session '{}'", req.matches[1].str()));
            }
            auto t = svc.last_trace(req.matches[1]);
            if (!t) throw Error(ErrorCode::NotFound, "session has not run a turn yet");
            send_json(res, 200, to_json(*t));
          }));
  svr.Get(R"(/api/sessions/([^/]+)/events)", guarded([this, &svc](const auto& req, auto& res) {
            const std::string id = req.matches[1];
            auto verbosity = svc.config().agent.verbosity;
            if (req.has_param("verbosity")) {
              try {
                verbosity = verbosity_from_string(req.get_param_value("verbosity"));
              } catch (const Error& e) {
                throw Error(ErrorCode::Precondition, e.what());
              }
            }
            if (!svc.bus().has_session(id)) {
              throw Error(ErrorCode::UnknownSession, fmt::format("unknown session '{}'", id));
            }
            auto sub = svc.bus().subscribe(id, verbosity, last_event_id(req));
            {
              std::lock_guard lock(streams_mu_);
              std::erase_if(streams_, [](const auto& w) { return w.expired(); });
              streams_.push_back(sub);
            }
            res.set_header("Cache-Control", "no-cache");
            const auto heartbeat = options_.heartbeat;
            res.set_chunked_content_provider(
                "text/event-stream",
                [this, sub, heartbeat](std::size_t, httplib::DataSink& sink) {
                  auto quiet = std::chrono::milliseconds(0);
                  while (quiet < heartbeat) {
                    const auto slice = std::min(kStreamPoll, heartbeat - quiet);
                    if (auto e = sub->next(slice)) {
                      const auto frame = encode_sse(*e);
                      return sink.write(frame.data(), frame.size());
                    }
                    if (stopping_ || sub->cancelled() || !sink.is_writable()) return false;
                    quiet += slice;
                  }
                  return sink.write(kSseHeartbeat.data(), kSseHeartbeat.size());
                },
                [sub](bool) { sub->cancel(); });
          }));

  // Config
  svr.Get("/api/config", guarded([&svc](const auto&, auto& res) {
            const auto c = svc.config();
            send_json(res, 200,
                      {{"agent", to_json(c.agent)},
                       {"backend", {{"kind", c.backend.kind}, {"endpoint", c.backend.endpoint},
                                    {"model", c.backend.model}, {"script", c.backend.script}}}});
          }));
  svr.Put("/api/config", guarded([&svc](const auto& req, auto& res) {
            auto body = parse_body(req);
            if (body.is_object() && body.contains("agent")) body = body["agent"];
            send_json(res, 200, {{"agent", to_json(svc.update_config(body))}});
          }));

  // Skills
  svr.Get("/api/skills", guarded([&svc](const auto&, auto& res) {
            const auto snap = svc.skills();
            Json skills = Json::array();
            for (const auto& s : snap->skills) skills.push_back(to_json(*s));
            Json tools = Json::array();
            for (const auto& t : svc.tool_specs()) tools.push_back(to_json(t));
            send_json(res, 200, {{"version", snap->version}, {"skills", skills}, {"tools", tools}});
          }));
  svr.Post("/api/skills/rescan", guarded([&svc](const auto&, auto& res) {
             send_json(res, 200, to_json(svc.rescan_skills()));
           }));

  // Memory files
  svr.Get(R"(/api/memory/(memory|agents|souls))", guarded([&svc](const auto& req, auto& res) {
            const std::string name = req.matches[1];
            send_json(res, 200,
                      {{"name", name}, {"content", svc.global_memory().read(memory_file_from_string(name))}});
          }));
  svr.Put(R"(/api/memory/(memory|agents|souls))", guarded([&svc](const auto& req, auto& res) {
            const std::string name = req.matches[1];
            const auto content = body_string(parse_body(req), "content");
            svc.global_memory().write(memory_file_from_string(name), content);
            send_json(res, 200, {{"name", name}, {"content", content}});
          }));

  // Status and artifacts
  svr.Get("/api/status", guarded([&svc](const auto&, auto& res) { send_json(res, 200, svc.status()); }));
  svr.Get(R"(/api/artifacts/([^/]+))", guarded([&svc](const auto& req, auto& res) {
            auto a = svc.artifacts().find(req.matches[1]);
            if (!a) throw Error(ErrorCode::NotFound, fmt::format("unknown artifact '{}'", req.matches[1].str()));
            res.set_header("Content-Disposition",
                           fmt::format("inline; filename=\"{}\"",
                                       std::filesystem::path(a->relative_path).filename().string()));
            res.set_content(svc.artifacts().read(*a), a->media_type);
          }));

  svr.set_error_handler([](const httplib::Request&, httplib::Response& res) {
    if (res.body.empty()) {
      send_error(res, res.status, res.status == 404 ? "NotFound" : "HttpError", httplib::status_message(res.status));
    }
  });
}

}  // namespace dataclaw::gateway
