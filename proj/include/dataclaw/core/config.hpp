#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>

#include "dataclaw/core/types.hpp"

namespace dataclaw {

struct AgentConfig {
  std::uint32_t max_iterations = 50;
  std::uint32_t context_window_tokens = 8192;
  double compaction_threshold = 0.8;
  Verbosity verbosity = Verbosity::progress;
  std::uint32_t max_concurrent_sessions = 50;
  std::uint32_t keep_recent_messages = 6;
  std::uint32_t parse_retry_limit = 3;

  bool operator==(const AgentConfig&) const = default;

  // Tokens the prompt needs before any conversation history: the agent
  // preamble plus the compaction reserve.
  static std::uint32_t minimum_prompt_overhead();

  // Throws InvalidConfig naming the offending field.
  void validate() const;

  // compaction_threshold * context_window_tokens
  double compaction_limit() const;
};

// Backend selection stored alongside the agent settings in the config file.
struct BackendSettings {
  std::string kind = "scripted";
  std::string endpoint;
  std::string model;
  std::string script;

  bool operator==(const BackendSettings&) const = default;
};

struct WorkspaceConfig {
  AgentConfig agent;
  BackendSettings backend;

  bool operator==(const WorkspaceConfig&) const = default;
};

/// `key = value` lines, `#` comments, fixed key order.
std::string serialize_config(const WorkspaceConfig& config);

/// Unknown keys and malformed values raise InvalidConfig with the line number.
WorkspaceConfig parse_config(std::string_view text);

using EnvLookup = std::function<std::optional<std::string>(const std::string&)>;

std::optional<std::string> process_env(const std::string& name);

/// Applies `DATACLAW_<KEY>` overrides (key upper-cased, dots become
/// underscores) on top of `config`, then validates.
WorkspaceConfig apply_env_overrides(WorkspaceConfig config, const EnvLookup& env = process_env);

// Sets one field from its textual value; used by the file parser, env
// overrides, and the management API.
void set_config_field(WorkspaceConfig& config, std::string_view key, std::string_view value);

Json to_json(const AgentConfig& config);
// Merges the fields present in `patch` into `base`; validates the result.
AgentConfig merge_config(const AgentConfig& base, const Json& patch);

}  // namespace dataclaw
