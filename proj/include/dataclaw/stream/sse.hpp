#pragma once

#include <string>

#include "dataclaw/core/types.hpp"

namespace dataclaw {

/// final_only: session_start, message, artifact, error, done.
/// progress: also tool_call, tool_result. full_trace: everything.
bool verbosity_allows(Verbosity level, EventKind kind);

/// One SSE frame:
///   id: <seq>\nevent: <kind>\ndata: {"session_id":...,"timestamp":...,"payload":{...}}\n\n
std::string encode_sse(const AgentEvent& event);

inline constexpr std::string_view kSseHeartbeat = ": ping\n\n";

}  // namespace dataclaw
