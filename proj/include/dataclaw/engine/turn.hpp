#pragma once

#include <atomic>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "dataclaw/core/clock.hpp"
#include "dataclaw/core/config.hpp"
#include "dataclaw/core/ids.hpp"
#include "dataclaw/engine/action.hpp"
#include "dataclaw/engine/prompt.hpp"
#include "dataclaw/llm/backend.hpp"
#include "dataclaw/memory/data_memory.hpp"
#include "dataclaw/tools/registry.hpp"

namespace dataclaw {

class GlobalMemory;

struct ReActStep {
  int step_index = 0;
  std::string thought;
  Action action;
  std::optional<std::string> observation;  // tool calls only
};

struct TurnTrace {
  std::string session_id;
  std::vector<ReActStep> steps;
  bool final = false;
  std::string final_text;
  std::string abort_reason;  // max_iterations | parse_failures | backend_failure | context_overflow | cancelled
  int iterations = 0;        // backend calls, including unparsable replies
  std::vector<Artifact> artifacts;
  std::string started_at;
  std::string ended_at;
};

Json to_json(const ReActStep& step);
Json to_json(const TurnTrace& trace);

using EventSink = std::function<void(const AgentEvent&)>;

/// Stamps events with the session's next seq and the clock's time.
class EventEmitter {
 public:
  EventEmitter(std::string session_id, std::int64_t next_seq, Clock& clock, EventSink sink)
      : session_id_(std::move(session_id)), next_seq_(next_seq), clock_(clock), sink_(std::move(sink)) {}

  AgentEvent emit(EventKind kind, Json payload);
  std::int64_t next_seq() const { return next_seq_; }

 private:
  std::string session_id_;
  std::int64_t next_seq_;
  Clock& clock_;
  EventSink sink_;
};

// Observations longer than this are cut and marked.
inline constexpr std::int64_t kObservationTokenLimit = 1024;
inline constexpr std::string_view kTruncationMarker = "\n[truncated]";

/// At most kObservationTokenLimit tokens, marker included.
std::string truncate_observation(std::string observation, bool* truncated = nullptr);

struct TurnDeps {
  Backend& backend;
  const tools::ToolRegistry& registry;
  tools::ToolContext& tool_context;
  DataMemory& memory;
  AgentConfig config;
  PromptInputs prompt;
  EventEmitter& events;
  Clock& clock = system_clock();
  IdSource& ids = random_ids();
  // Summarizer for compaction; defaults to summarize() over the backend.
  Summarizer summarizer;
  // Receives the automatic end-of-turn finding when set.
  GlobalMemory* global_memory = nullptr;
  const std::atomic<bool>* cancel = nullptr;
};

/// One ReAct turn. Appends the user message to memory, then alternates
/// backend calls and tool dispatches until FINAL or an abort. Events follow
///   session_start (thinking tool_call tool_result)* thinking? (message done | error)
/// Never throws for model, tool or backend failures; those end the turn
/// with an abort reason.
TurnTrace run_turn(const ChatMessage& user_message, TurnDeps& deps);

}  // namespace dataclaw
