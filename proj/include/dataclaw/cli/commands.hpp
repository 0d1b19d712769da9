#pragma once

#include <atomic>
#include <chrono>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include "dataclaw/core/config.hpp"
#include "dataclaw/core/types.hpp"

namespace dataclaw::cli {

// Exit codes shared by every command.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitAborted = 2;

int cmd_init(const std::filesystem::path& root, std::ostream& out, std::ostream& err);

struct ServeOptions {
  std::filesystem::path workspace = ".";
  std::string bind = "127.0.0.1:8765";
  std::optional<std::string> backend;
  std::optional<std::string> script;
  std::chrono::milliseconds heartbeat{15000};
};

// Blocks until `stop` becomes true.
int cmd_serve(const ServeOptions& options, const std::atomic<bool>& stop, std::ostream& out, std::ostream& err,
              const EnvLookup& env = process_env);

struct AskOptions {
  std::filesystem::path workspace = ".";
  std::string text;
  std::optional<std::string> script;
  // Named sessions map to a stable id and keep their transcript across runs.
  std::optional<std::string> session;
};

int cmd_ask(const AskOptions& options, std::ostream& out, std::ostream& err, const EnvLookup& env = process_env);

int cmd_replay(const std::filesystem::path& transcript, Verbosity verbosity, std::ostream& out, std::ostream& err);

// One human-readable block per event; empty when the level hides it.
std::string render_event(const AgentEvent& event, Verbosity verbosity);

// host:port; InvalidConfig otherwise.
std::pair<std::string, int> parse_bind(const std::string& text);

// Loads <root>/config and applies DATACLAW_* overrides.
WorkspaceConfig load_workspace_config(const std::filesystem::path& root, const EnvLookup& env = process_env);

int run(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace dataclaw::cli
