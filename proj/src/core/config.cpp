#include "dataclaw/core/config.hpp"

#include <cctype>
#include <charconv>
#include <cstdlib>
#include <limits>

#include <fmt/format.h>

#include "dataclaw/core/error.hpp"
#include "dataclaw/core/preamble.hpp"
#include "dataclaw/core/strings.hpp"
#include "dataclaw/llm/tokens.hpp"

namespace dataclaw {

namespace {

constexpr std::string_view kKeys[] = {
    "max_iterations",          "context_window_tokens", "compaction_threshold",
    "verbosity",               "max_concurrent_sessions", "keep_recent_messages",
    "parse_retry_limit",       "backend.kind",          "backend.endpoint",
    "backend.model",           "backend.script",
};

std::uint32_t parse_positive(std::string_view key, std::string_view value) {
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
  if (ec != std::errc{} || ptr != value.data() + value.size() || v == 0 ||
      v > std::numeric_limits<std::uint32_t>::max()) {
    throw Error(ErrorCode::InvalidConfig,
                fmt::format("{} must be a positive integer, got '{}'", key, value));
  }
  return static_cast<std::uint32_t>(v);
}

double parse_fraction(std::string_view key, std::string_view value) {
  double v = 0;
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
  if (ec != std::errc{} || ptr != value.data() + value.size()) {
    throw Error(ErrorCode::InvalidConfig, fmt::format("{} must be a number, got '{}'", key, value));
  }
  return v;
}

std::string json_scalar_text(const Json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_integer() || v.is_number_unsigned()) return v.dump();
  if (v.is_number_float()) return format_number(v.get<double>());
  throw Error(ErrorCode::InvalidConfig, "config values must be strings or numbers");
}

}  // namespace

std::uint32_t AgentConfig::minimum_prompt_overhead() {
  return static_cast<std::uint32_t>(estimate_tokens(kAgentPreamble)) + kCompactionReserveTokens;
}

double AgentConfig::compaction_limit() const {
  return compaction_threshold * static_cast<double>(context_window_tokens);
}

void AgentConfig::validate() const {
  auto require_positive = [](std::uint32_t v, const char* name) {
    if (v == 0) throw Error(ErrorCode::InvalidConfig, fmt::format("{} must be positive", name));
  };
  require_positive(max_iterations, "max_iterations");
  require_positive(context_window_tokens, "context_window_tokens");
  require_positive(max_concurrent_sessions, "max_concurrent_sessions");
  require_positive(keep_recent_messages, "keep_recent_messages");
  require_positive(parse_retry_limit, "parse_retry_limit");
  if (!(compaction_threshold > 0.0 && compaction_threshold <= 1.0)) {
    throw Error(ErrorCode::InvalidConfig,
                fmt::format("compaction_threshold must be in (0, 1], got {}",
                            format_number(compaction_threshold)));
  }
  if (!(compaction_limit() > minimum_prompt_overhead())) {
    throw Error(ErrorCode::InvalidConfig,
                fmt::format("compaction_threshold * context_window_tokens ({}) must exceed the "
                            "minimum prompt overhead of {} tokens",
                            format_number(compaction_limit()), minimum_prompt_overhead()));
  }
}

void set_config_field(WorkspaceConfig& config, std::string_view key, std::string_view value) {
  auto& a = config.agent;
  if (key == "max_iterations") {
    a.max_iterations = parse_positive(key, value);
  } else if (key == "context_window_tokens") {
    a.context_window_tokens = parse_positive(key, value);
  } else if (key == "compaction_threshold") {
    a.compaction_threshold = parse_fraction(key, value);
  } else if (key == "verbosity") {
    try {
      a.verbosity = verbosity_from_string(value);
    } catch (const Error&) {
      throw Error(ErrorCode::InvalidConfig,
                  fmt::format("verbosity must be final_only, progress or full_trace, got '{}'", value));
    }
  } else if (key == "max_concurrent_sessions") {
    a.max_concurrent_sessions = parse_positive(key, value);
  } else if (key == "keep_recent_messages") {
    a.keep_recent_messages = parse_positive(key, value);
  } else if (key == "parse_retry_limit") {
    a.parse_retry_limit = parse_positive(key, value);
  } else if (key == "backend.kind") {
    if (value != "scripted" && value != "remote") {
      throw Error(ErrorCode::InvalidConfig,
                  fmt::format("backend.kind must be scripted or remote, got '{}'", value));
    }
    config.backend.kind = std::string(value);
  } else if (key == "backend.endpoint") {
    config.backend.endpoint = std::string(value);
  } else if (key == "backend.model") {
    config.backend.model = std::string(value);
  } else if (key == "backend.script") {
    config.backend.script = std::string(value);
  } else {
    throw Error(ErrorCode::InvalidConfig, fmt::format("unknown config key '{}'", key));
  }
}

std::string serialize_config(const WorkspaceConfig& config) {
  const auto& a = config.agent;
  std::string out = "# DataClaw workspace configuration\n";
  out += fmt::format("max_iterations = {}\n", a.max_iterations);
  out += fmt::format("context_window_tokens = {}\n", a.context_window_tokens);
  out += fmt::format("compaction_threshold = {}\n", format_number(a.compaction_threshold));
  out += fmt::format("verbosity = {}\n", to_string(a.verbosity));
  out += fmt::format("max_concurrent_sessions = {}\n", a.max_concurrent_sessions);
  out += fmt::format("keep_recent_messages = {}\n", a.keep_recent_messages);
  out += fmt::format("parse_retry_limit = {}\n", a.parse_retry_limit);
  out += fmt::format("backend.kind = {}\n", config.backend.kind);
  out += fmt::format("backend.endpoint = {}\n", config.backend.endpoint);
  out += fmt::format("backend.model = {}\n", config.backend.model);
  out += fmt::format("backend.script = {}\n", config.backend.script);
  return out;
}

WorkspaceConfig parse_config(std::string_view text) {
  WorkspaceConfig config;
  int line_no = 0;
  for (auto raw : split_lines(text)) {
    ++line_no;
    auto line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw Error(ErrorCode::InvalidConfig, fmt::format("line {}: expected key = value", line_no));
    }
    try {
      set_config_field(config, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    } catch (const Error& e) {
      throw Error(ErrorCode::InvalidConfig, fmt::format("line {}: {}", line_no, e.what()));
    }
  }
  config.agent.validate();
  return config;
}

std::optional<std::string> process_env(const std::string& name) {
  if (const char* v = std::getenv(name.c_str())) return std::string(v);
  return std::nullopt;
}

WorkspaceConfig apply_env_overrides(WorkspaceConfig config, const EnvLookup& env) {
  for (auto key : kKeys) {
    std::string var = "DATACLAW_";
    for (char c : key) var += c == '.' ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    if (auto value = env(var)) {
      try {
        set_config_field(config, key, trim(*value));
        config.agent.validate();
      } catch (const Error& e) {
        throw Error(ErrorCode::InvalidConfig, fmt::format("{}: {}", var, e.what()));
      }
    }
  }
  config.agent.validate();
  return config;
}

Json to_json(const AgentConfig& a) {
  Json j;
  j["max_iterations"] = a.max_iterations;
  j["context_window_tokens"] = a.context_window_tokens;
  j["compaction_threshold"] = a.compaction_threshold;
  j["verbosity"] = to_string(a.verbosity);
  j["max_concurrent_sessions"] = a.max_concurrent_sessions;
  j["keep_recent_messages"] = a.keep_recent_messages;
  j["parse_retry_limit"] = a.parse_retry_limit;
  return j;
}

AgentConfig merge_config(const AgentConfig& base, const Json& patch) {
  if (!patch.is_object()) throw Error(ErrorCode::InvalidConfig, "config patch must be a JSON object");
  WorkspaceConfig staged;
  staged.agent = base;
  for (const auto& [key, value] : patch.items()) {
    if (key.rfind("backend.", 0) == 0) {
      throw Error(ErrorCode::InvalidConfig, "backend settings cannot be changed at runtime");
    }
    set_config_field(staged, key, json_scalar_text(value));
  }
  staged.agent.validate();
  return staged.agent;
}

}  // namespace dataclaw
