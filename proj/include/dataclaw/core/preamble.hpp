#pragma once

#include <string_view>

namespace dataclaw {

// Fixed head of every system block. It documents the action protocol the
// engine parses, so changing it changes what models are told to emit.
inline constexpr std::string_view kAgentPreamble =
    "You are DataClaw, a local data agent. Work step by step.\n"
    "Each reply must contain one THOUGHT line followed by exactly one of:\n"
    "ACTION: {\"tool\": \"<tool name>\", \"args\": {...}}\n"
    "FINAL: <answer for the user>\n"
    "After every ACTION you receive an OBSERVATION with the tool output. "
    "Observations starting with ERROR: describe a failure; correct the call and retry.\n"
    "Use memory_search to recall findings from earlier sessions.\n";

// Tokens held back from the compaction budget for the summary wrapper.
inline constexpr int kCompactionReserveTokens = 64;

}  // namespace dataclaw
