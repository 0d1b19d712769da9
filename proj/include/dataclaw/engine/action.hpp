#pragma once

#include <string>

#include "dataclaw/core/types.hpp"

namespace dataclaw {

struct Action {
  enum class Kind { tool_call, final };

  Kind kind = Kind::final;
  std::string tool;             // tool_call
  Json args = Json::object();   // tool_call
  std::string text;             // final

  static Action call(std::string tool, Json args) { return {Kind::tool_call, std::move(tool), std::move(args), {}}; }
  static Action finish(std::string text) { return {Kind::final, {}, Json::object(), std::move(text)}; }

  bool is_final() const { return kind == Kind::final; }
  bool operator==(const Action&) const = default;
};

struct ParsedReply {
  std::string thought;
  Action action;
};

/// Reads the model's reply. The last line starting with `ACTION:` or
/// `FINAL:` decides the action; the thought is the last `THOUGHT:` line
/// before it, continued up to the next marker. ACTION carries a JSON object
/// {"tool": name, "args": {...}}, possibly spanning lines. FINAL text runs to
/// the end of the reply. Throws UnparsableAction otherwise.
ParsedReply parse_action(std::string_view model_output);

// Feedback appended to memory after an unparsable reply.
inline constexpr std::string_view kUnparsableFeedback =
    "ERROR: unparsable action; reply with ACTION: {json} or FINAL: text";

}  // namespace dataclaw
