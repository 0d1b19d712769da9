#include "dataclaw/core/types.hpp"

#include <array>
#include <utility>

#include "dataclaw/core/error.hpp"

namespace dataclaw {

namespace {

template <typename E, std::size_t N>
E lookup(const std::array<std::pair<E, std::string_view>, N>& table, std::string_view s,
         std::string_view what) {
  for (const auto& [value, name] : table) {
    if (name == s) return value;
  }
  throw Error(ErrorCode::ParseError, "unknown " + std::string(what) + " '" + std::string(s) + "'");
}

template <typename E, std::size_t N>
std::string_view name_of(const std::array<std::pair<E, std::string_view>, N>& table, E v) {
  for (const auto& [value, name] : table) {
    if (value == v) return name;
  }
  return "unknown";
}

constexpr std::array<std::pair<Role, std::string_view>, 4> kRoles{{
    {Role::user, "user"},
    {Role::agent, "agent"},
    {Role::system, "system"},
    {Role::tool, "tool"},
}};

constexpr std::array<std::pair<EventKind, std::string_view>, 8> kKinds{{
    {EventKind::session_start, "session_start"},
    {EventKind::thinking, "thinking"},
    {EventKind::tool_call, "tool_call"},
    {EventKind::tool_result, "tool_result"},
    {EventKind::message, "message"},
    {EventKind::artifact, "artifact"},
    {EventKind::error, "error"},
    {EventKind::done, "done"},
}};

constexpr std::array<std::pair<Verbosity, std::string_view>, 3> kVerbosity{{
    {Verbosity::final_only, "final_only"},
    {Verbosity::progress, "progress"},
    {Verbosity::full_trace, "full_trace"},
}};

}  // namespace

std::string_view to_string(Role role) { return name_of(kRoles, role); }
Role role_from_string(std::string_view s) { return lookup(kRoles, s, "role"); }

std::string_view to_string(SessionStatus status) {
  switch (status) {
    case SessionStatus::idle: return "idle";
    case SessionStatus::running: return "running";
    case SessionStatus::closed: return "closed";
  }
  return "unknown";
}

std::string_view to_string(EventKind kind) { return name_of(kKinds, kind); }
EventKind event_kind_from_string(std::string_view s) { return lookup(kKinds, s, "event kind"); }

std::string_view to_string(Verbosity v) { return name_of(kVerbosity, v); }
Verbosity verbosity_from_string(std::string_view s) { return lookup(kVerbosity, s, "verbosity"); }

Json to_json(const AgentEvent& event) {
  Json j;
  j["seq"] = event.seq;
  j["session_id"] = event.session_id;
  j["kind"] = to_string(event.kind);
  j["timestamp"] = event.timestamp;
  j["payload"] = event.payload;
  return j;
}

AgentEvent event_from_json(const Json& j) {
  if (!j.is_object()) throw Error(ErrorCode::ParseError, "event must be a JSON object");
  AgentEvent e;
  try {
    e.seq = j.at("seq").get<std::int64_t>();
    e.session_id = j.at("session_id").get<std::string>();
    e.kind = event_kind_from_string(j.at("kind").get<std::string>());
    e.timestamp = j.at("timestamp").get<std::string>();
    e.payload = j.at("payload");
  } catch (const Json::exception& ex) {
    throw Error(ErrorCode::ParseError, std::string("bad event record: ") + ex.what());
  }
  return e;
}

Json to_json(const Artifact& a) {
  Json j;
  j["id"] = a.id;
  j["session_id"] = a.session_id;
  j["path"] = a.relative_path;
  j["media_type"] = a.media_type;
  j["byte_length"] = a.byte_length;
  j["created_at"] = a.created_at;
  return j;
}

}  // namespace dataclaw
