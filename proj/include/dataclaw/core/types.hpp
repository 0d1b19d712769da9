#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace dataclaw {

using Json = nlohmann::ordered_json;

enum class Role { user, agent, system, tool };

std::string_view to_string(Role role);
Role role_from_string(std::string_view s);

struct ChatMessage {
  std::string id;
  std::string session_id;
  std::string channel_id;
  Role role = Role::user;
  std::string text;
  std::vector<std::string> attachments;
  std::string timestamp;
  // Set for role=tool only.
  std::optional<std::string> tool_name;
  // Marks the synthetic summary entry produced by compaction.
  bool compacted = false;

  bool operator==(const ChatMessage&) const = default;
};

enum class SessionStatus { idle, running, closed };

std::string_view to_string(SessionStatus status);

struct Session {
  std::string id;
  std::string channel_id;
  SessionStatus status = SessionStatus::idle;
  std::string created_at;
  std::uint64_t turn_count = 0;
};

enum class EventKind {
  session_start,
  thinking,
  tool_call,
  tool_result,
  message,
  artifact,
  error,
  done,
};

std::string_view to_string(EventKind kind);
EventKind event_kind_from_string(std::string_view s);

struct AgentEvent {
  std::int64_t seq = 0;
  std::string session_id;
  EventKind kind = EventKind::message;
  Json payload = Json::object();
  std::string timestamp;

  bool operator==(const AgentEvent&) const = default;
};

/// Full event record: seq, session_id, kind, timestamp, payload (in that order).
Json to_json(const AgentEvent& event);
AgentEvent event_from_json(const Json& j);

struct Artifact {
  std::string id;
  std::string session_id;
  std::string relative_path;
  std::string media_type;
  std::uint64_t byte_length = 0;
  std::string created_at;
};

Json to_json(const Artifact& artifact);

enum class Verbosity { final_only, progress, full_trace };

std::string_view to_string(Verbosity v);
Verbosity verbosity_from_string(std::string_view s);

}  // namespace dataclaw
