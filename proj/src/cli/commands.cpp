#include "dataclaw/cli/commands.hpp"

#include <iostream>
#include <thread>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "dataclaw/core/error.hpp"
#include "dataclaw/core/strings.hpp"
#include "dataclaw/gateway/http_server.hpp"
#include "dataclaw/gateway/service.hpp"
#include "dataclaw/persist/transcript.hpp"
#include "dataclaw/persist/workspace.hpp"
#include "dataclaw/stream/sse.hpp"

namespace dataclaw::cli {

namespace fs = std::filesystem;

namespace {

constexpr const char* kBackendKinds = "scripted, remote";

std::string indent_tail(const std::string& text) {
  std::string out;
  for (char c : text) {
    out += c;
    if (c == '\n') out += "    ";
  }
  return out;
}

std::string first_line(const std::string& text) {
  const auto nl = text.find('\n');
  if (nl == std::string::npos) return text;
  std::size_t extra = 0;
  for (std::size_t i = nl; i < text.size(); ++i) extra += text[i] == '\n';
  return fmt::format("{} (+{} lines)", text.substr(0, nl), extra);
}

std::string str(const Json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return "";
  return it->is_string() ? it->get<std::string>() : it->dump();
}

void apply_backend_flags(WorkspaceConfig& config, const std::optional<std::string>& backend,
                         const std::optional<std::string>& script) {
  if (backend) {
    if (*backend != "scripted" && *backend != "remote") {
      throw Error(ErrorCode::InvalidConfig,
                  fmt::format("unknown backend '{}' (valid kinds: {})", *backend, kBackendKinds));
    }
    config.backend.kind = *backend;
  }
  if (script) {
    config.backend.kind = "scripted";
    config.backend.script = fs::absolute(*script).string();
  }
}

}  // namespace

std::pair<std::string, int> parse_bind(const std::string& text) {
  const auto colon = text.rfind(':');
  if (colon == std::string::npos || colon == 0 || colon + 1 == text.size()) {
    throw Error(ErrorCode::InvalidConfig, fmt::format("bind address must be host:port, got '{}'", text));
  }
  const auto port_text = text.substr(colon + 1);
  int port = -1;
  if (port_text.size() <= 5 && port_text.find_first_not_of("0123456789") == std::string::npos) {
    port = std::stoi(port_text);
  }
  if (port < 0 || port > 65535) {
    throw Error(ErrorCode::InvalidConfig, fmt::format("bad port '{}'", port_text));
  }
  return {text.substr(0, colon), port};
}

WorkspaceConfig load_workspace_config(const fs::path& root, const EnvLookup& env) {
  const auto ws = open_workspace(root);
  return apply_env_overrides(parse_config(read_file(ws.config_file())), env);
}

int cmd_init(const fs::path& root, std::ostream& out, std::ostream& err) {
  try {
    const auto result = init_workspace(root);
    const auto& ws = result.layout;
    if (!result.created_anything) out << "already initialized: " << ws.root.string() << "\n";
    else out << "initialized workspace " << ws.root.string() << "\n";
    for (const auto& p : {ws.config_file(), ws.agents_md(), ws.souls_md(), ws.memory_md(), ws.skills_dir(),
                          ws.sessions_dir(), ws.artifacts_dir(), ws.data_dir()}) {
      out << "  " << ws.relative(p) << (fs::is_directory(p) ? "/" : "") << "\n";
    }
    return kExitOk;
  } catch (const std::exception& e) {
    err << "init failed: " << e.what() << "\n";
    return kExitFailure;
  }
}

int cmd_serve(const ServeOptions& options, const std::atomic<bool>& stop, std::ostream& out, std::ostream& err,
              const EnvLookup& env) {
  std::unique_ptr<gateway::AgentService> service;
  std::unique_ptr<gateway::HttpServer> server;
  try {
    const auto [host, port] = parse_bind(options.bind);
    auto config = load_workspace_config(options.workspace, env);
    apply_backend_flags(config, options.backend, options.script);
    const auto ws = open_workspace(options.workspace);
    service = std::make_unique<gateway::AgentService>(ws, config, gateway::ServiceOptions{});
    server = std::make_unique<gateway::HttpServer>(*service, gateway::ServerOptions{options.heartbeat, 64});
    if (!server->bind(host, port)) {
      err << fmt::format("cannot bind {}:{}\n", host, port);
      return kExitFailure;
    }
    std::vector<std::string> channels;
    for (const auto& c : service->channels()) {
      channels.push_back(fmt::format("{}({})", c.channel_id, gateway::to_string(c.kind)));
    }
    const auto skills = service->skills();
    out << fmt::format("dataclaw serving {}\n", ws.root.string());
    out << fmt::format("  backend: {}\n", config.backend.kind);
    out << fmt::format("  channels: {}\n", fmt::join(channels, ", "));
    out << fmt::format("  skills: {}\n", skills->skills.size());
    out << fmt::format("  capacity: {}\n", config.agent.max_concurrent_sessions);
    out << fmt::format("listening on http://{}:{}\n", host, server->port());
    out.flush();
    server->start();
  } catch (const std::exception& e) {
    err << "serve failed: " << e.what() << "\n";
    return kExitFailure;
  }
  while (!stop.load()) std::this_thread::sleep_for(std::chrono::milliseconds(50));
  server->stop();
  out << "stopped\n";
  return kExitOk;
}

int cmd_ask(const AskOptions& options, std::ostream& out, std::ostream& err, const EnvLookup& env) {
  try {
    auto config = load_workspace_config(options.workspace, env);
    apply_backend_flags(config, std::nullopt, options.script);
    const auto ws = open_workspace(options.workspace);
    gateway::AgentService service(ws, config, gateway::ServiceOptions{});
    const auto id = options.session ? service.chat_session("console", *options.session).id
                                    : service.create_session("console").id;
    const auto trace = service.run(id, options.text);
    if (!trace.final) {
      std::string detail;
      for (const auto& e : service.bus().history(id)) {
        if (e.kind == EventKind::error) detail = str(e.payload, "message");
      }
      err << fmt::format("aborted: {}{}{}\n", trace.abort_reason, detail.empty() ? "" : ": ", detail);
      return kExitAborted;
    }
    out << trace.final_text << "\n";
    for (const auto& a : trace.artifacts) out << a.relative_path << "\n";
    return kExitOk;
  } catch (const std::exception& e) {
    err << "ask failed: " << e.what() << "\n";
    return kExitFailure;
  }
}

std::string render_event(const AgentEvent& e, Verbosity verbosity) {
  if (!verbosity_allows(verbosity, e.kind)) return "";
  const auto& p = e.payload;
  const auto head = fmt::format("#{} {} ", e.seq, to_string(e.kind));
  switch (e.kind) {
    case EventKind::session_start:
      if (verbosity == Verbosity::final_only) return "";
      return head + fmt::format("user: {}\n", indent_tail(str(p, "text")));
    case EventKind::thinking:
    {
      const auto thought = str(p, "thought");
      if (thought.empty()) return head + fmt::format("[step {}]\n", str(p, "step"));
      return head + fmt::format("[step {}] {}\n", str(p, "step"), indent_tail(thought));
    }
    case EventKind::tool_call:
      return head + fmt::format("[step {}] {} {}\n", str(p, "step"), str(p, "tool"),
                                p.contains("args") ? p["args"].dump() : "{}");
    case EventKind::tool_result: {
      const bool ok = p.value("ok", true);
      return head + fmt::format("[step {}] {} {}: {}\n", str(p, "step"), str(p, "tool"), ok ? "ok" : "error",
                                first_line(str(p, "observation")));
    }
    case EventKind::message: {
      auto text = head + indent_tail(str(p, "text")) + "\n";
      if (p.contains("artifacts")) {
        for (const auto& a : p["artifacts"]) text += "    -> " + a.get<std::string>() + "\n";
      }
      return text;
    }
    case EventKind::artifact:
      return head + str(p, "path") + "\n";
    case EventKind::error:
      return head + fmt::format("{}: {}\n", str(p, "reason"), str(p, "message"));
    case EventKind::done:
      return head + fmt::format("{} after {} steps\n", str(p, "outcome"), str(p, "steps"));
  }
  return "";
}

int cmd_replay(const fs::path& transcript, Verbosity verbosity, std::ostream& out, std::ostream& err) {
  std::vector<AgentEvent> events;
  try {
    events = read_transcript(transcript);
  } catch (const std::exception& e) {
    err << "replay failed: " << e.what() << "\n";
    return kExitFailure;
  }
  for (const auto& e : events) out << render_event(e, verbosity);
  return kExitOk;
}

}  // namespace dataclaw::cli
