#pragma once

#include <filesystem>
#include <vector>

#include "dataclaw/core/types.hpp"
#include "dataclaw/persist/workspace.hpp"

namespace dataclaw {

// One JSON object per line at sessions/<id>/transcript.jsonl. Flushed to disk
// (fsync) when the event closes a turn.
void log_event(const WorkspaceLayout& workspace, const AgentEvent& event);

// ParseError names the 1-based line that failed.
std::vector<AgentEvent> read_transcript(const std::filesystem::path& path);

}  // namespace dataclaw
