#include "dataclaw/stream/sse.hpp"

namespace dataclaw {

bool verbosity_allows(Verbosity level, EventKind kind) {
  switch (kind) {
    case EventKind::session_start:
    case EventKind::message:
    case EventKind::artifact:
    case EventKind::error:
    case EventKind::done:
      return true;
    case EventKind::tool_call:
    case EventKind::tool_result:
      return level != Verbosity::final_only;
    case EventKind::thinking:
      return level == Verbosity::full_trace;
  }
  return false;
}

std::string encode_sse(const AgentEvent& event) {
  Json data;
  data["session_id"] = event.session_id;
  data["timestamp"] = event.timestamp;
  data["payload"] = event.payload;
  std::string out = "id: " + std::to_string(event.seq) + "\nevent: ";
  out += to_string(event.kind);
  out += "\ndata: ";
  out += data.dump(-1, ' ', false, Json::error_handler_t::replace);
  out += "\n\n";
  return out;
}

}  // namespace dataclaw
