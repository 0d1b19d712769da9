#include "dataclaw/engine/turn.hpp"

#include <spdlog/spdlog.h>

#include "dataclaw/core/error.hpp"
#include "dataclaw/core/strings.hpp"
#include "dataclaw/llm/tokens.hpp"
#include "dataclaw/memory/global_memory.hpp"

namespace dataclaw {

namespace {

Json artifact_paths(const std::vector<Artifact>& artifacts) {
  Json out = Json::array();
  for (const auto& a : artifacts) out.push_back(a.relative_path);
  return out;
}

std::string finding_text(const TurnTrace& trace) {
  const auto lines = split_lines(trace.final_text);
  std::string text;
  for (auto line : lines) {
    if (!trim(line).empty()) {
      text = std::string(trim(line));
      break;
    }
  }
  if (!trace.artifacts.empty()) {
    std::string paths;
    for (const auto& a : trace.artifacts) paths += (paths.empty() ? "" : ", ") + a.relative_path;
    text += (text.empty() ? "" : " ") + std::string("[artifacts: ") + paths + "]";
  }
  return text;
}

ChatMessage make_message(TurnDeps& deps, const std::string& channel_id, Role role, std::string text) {
  ChatMessage m;
  m.id = deps.ids.next();
  m.session_id = deps.memory.session_id();
  m.channel_id = channel_id;
  m.role = role;
  m.text = std::move(text);
  m.timestamp = deps.clock.now_iso();
  return m;
}

}  // namespace

Json to_json(const ReActStep& step) {
  Json action = step.action.is_final() ? Json{{"final", step.action.text}}
                                       : Json{{"tool", step.action.tool}, {"args", step.action.args}};
  Json out = {{"step_index", step.step_index}, {"thought", step.thought}, {"action", action}};
  if (step.observation) out["observation"] = *step.observation;
  return out;
}

Json to_json(const TurnTrace& trace) {
  Json steps = Json::array();
  for (const auto& s : trace.steps) steps.push_back(to_json(s));
  Json outcome = trace.final ? Json{{"final", trace.final_text}} : Json{{"aborted", trace.abort_reason}};
  return {{"session_id", trace.session_id}, {"steps", steps},          {"outcome", outcome},
          {"iterations", trace.iterations}, {"artifacts", artifact_paths(trace.artifacts)},
          {"started_at", trace.started_at}, {"ended_at", trace.ended_at}};
}

AgentEvent EventEmitter::emit(EventKind kind, Json payload) {
  AgentEvent e;
  e.seq = next_seq_++;
  e.session_id = session_id_;
  e.kind = kind;
  e.payload = std::move(payload);
  e.timestamp = clock_.now_iso();
  if (sink_) sink_(e);
  return e;
}

std::string truncate_observation(std::string observation, bool* truncated) {
  if (truncated) *truncated = false;
  if (estimate_tokens(observation) <= kObservationTokenLimit) return observation;
  const auto keep = static_cast<std::size_t>(kObservationTokenLimit * 4) - kTruncationMarker.size();
  std::string out(utf8_prefix(observation, keep));
  out += kTruncationMarker;
  if (truncated) *truncated = true;
  return out;
}

TurnTrace run_turn(const ChatMessage& user_message, TurnDeps& deps) {
  TurnTrace trace;
  trace.session_id = deps.memory.session_id();
  trace.started_at = deps.clock.now_iso();
  const auto produced_before = deps.tool_context.produced.size();

  Summarizer summarizer = deps.summarizer;
  if (!summarizer) {
    summarizer = [&deps](std::span<const ChatMessage> msgs, std::int64_t budget) {
      return summarize(deps.backend, msgs, budget);
    };
  }

  auto abort = [&](const std::string& reason, const std::string& message) {
    trace.final = false;
    trace.abort_reason = reason;
    trace.ended_at = deps.clock.now_iso();
    trace.artifacts.assign(deps.tool_context.produced.begin() + static_cast<std::ptrdiff_t>(produced_before),
                           deps.tool_context.produced.end());
    deps.events.emit(EventKind::error, {{"reason", reason},
                                        {"message", message},
                                        {"steps", trace.steps.size()},
                                        {"iterations", trace.iterations}});
    spdlog::info("session {} turn aborted: {} ({})", trace.session_id, reason, message);
    return trace;
  };

  deps.memory.append(user_message);
  deps.events.emit(EventKind::session_start, {{"message_id", user_message.id},
                                              {"channel_id", user_message.channel_id},
                                              {"text", user_message.text}});

  std::uint32_t parse_failures = 0;
  for (std::uint32_t iter = 1; iter <= deps.config.max_iterations; ++iter) {
    if (deps.cancel && deps.cancel->load()) return abort("cancelled", "turn cancelled by operator");

    std::string reply;
    try {
      if (auto rec = maybe_compact(deps.memory, deps.config, summarizer, deps.clock)) {
        spdlog::info("session {} compacted {} messages ({} -> {} tokens)", trace.session_id, rec->messages_compacted,
                     rec->tokens_before, rec->tokens_after);
      }
      const auto request = build_prompt(deps.memory, deps.config, deps.prompt);
      ++trace.iterations;
      reply = complete(deps.backend, request).text;
    } catch (const Error& e) {
      const bool overflow = e.code() == ErrorCode::CompactionInsufficient || e.code() == ErrorCode::BudgetExceeded;
      return abort(overflow ? "context_overflow" : "backend_failure",
                   fmt::format("{}: {}", to_string(e.code()), e.what()));
    } catch (const std::exception& e) {
      return abort("backend_failure", e.what());
    }
    deps.memory.append(make_message(deps, user_message.channel_id, Role::agent, reply));

    ParsedReply parsed;
    try {
      parsed = parse_action(reply);
    } catch (const Error& e) {
      deps.memory.append(make_message(deps, user_message.channel_id, Role::system, std::string(kUnparsableFeedback)));
      if (++parse_failures >= deps.config.parse_retry_limit) {
        return abort("parse_failures", fmt::format("{} consecutive unparsable replies; last: {}", parse_failures,
                                                   e.what()));
      }
      continue;
    }
    parse_failures = 0;

    ReActStep step;
    step.step_index = static_cast<int>(trace.steps.size()) + 1;
    step.thought = parsed.thought;
    step.action = parsed.action;
    deps.events.emit(EventKind::thinking, {{"step", step.step_index}, {"thought", step.thought}});

    if (step.action.is_final()) {
      trace.steps.push_back(step);
      trace.final = true;
      trace.final_text = step.action.text;
      trace.artifacts.assign(deps.tool_context.produced.begin() + static_cast<std::ptrdiff_t>(produced_before),
                             deps.tool_context.produced.end());
      deps.events.emit(EventKind::message, {{"step", step.step_index},
                                            {"text", trace.final_text},
                                            {"artifacts", artifact_paths(trace.artifacts)}});
      if (deps.global_memory) {
        const auto text = finding_text(trace);
        if (!text.empty()) {
          try {
            deps.global_memory->record({trace.session_id, deps.clock.now_iso(), EntryKind::finding, text});
          } catch (const std::exception& e) {
            spdlog::warn("session {}: could not record finding: {}", trace.session_id, e.what());
          }
        }
      }
      trace.ended_at = deps.clock.now_iso();
      deps.events.emit(EventKind::done, {{"outcome", "final"},
                                         {"steps", trace.steps.size()},
                                         {"iterations", trace.iterations}});
      return trace;
    }

    deps.events.emit(EventKind::tool_call,
                     {{"step", step.step_index}, {"tool", step.action.tool}, {"args", step.action.args}});
    const auto before_call = deps.tool_context.produced.size();
    bool truncated = false;
    auto observation =
        truncate_observation(deps.registry.dispatch(step.action.tool, step.action.args, deps.tool_context), &truncated);
    const std::vector<Artifact> made(deps.tool_context.produced.begin() + static_cast<std::ptrdiff_t>(before_call),
                                     deps.tool_context.produced.end());
    auto tool_msg = make_message(deps, user_message.channel_id, Role::tool, observation);
    tool_msg.tool_name = step.action.tool;
    deps.memory.append(std::move(tool_msg));
    const bool ok = observation.rfind("ERROR:", 0) != 0;
    deps.events.emit(EventKind::tool_result, {{"step", step.step_index},
                                              {"tool", step.action.tool},
                                              {"ok", ok},
                                              {"observation", observation},
                                              {"truncated", truncated},
                                              {"artifacts", artifact_paths(made)}});
    step.observation = std::move(observation);
    trace.steps.push_back(std::move(step));
  }
  return abort("max_iterations", fmt::format("no FINAL answer within {} iterations", deps.config.max_iterations));
}

}  // namespace dataclaw
