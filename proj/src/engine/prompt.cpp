#include "dataclaw/engine/prompt.hpp"

#include <fmt/format.h>

#include "dataclaw/core/error.hpp"
#include "dataclaw/core/strings.hpp"
#include "dataclaw/llm/tokens.hpp"

namespace dataclaw {

namespace {

constexpr std::string_view kTruncatedMarker = "\n[truncated]";

void append_block(std::string& out, std::string_view block) {
  if (trim(block).empty()) return;
  if (!out.empty() && out.back() != '\n') out += '\n';
  out += '\n';
  out.append(block);
}

}  // namespace

std::string agent_preamble(const std::vector<tools::ToolSpec>& tools) {
  std::string out(kAgentPreamble);
  if (tools.empty()) return out;
  out += "\nTools:\n";
  for (const auto& t : tools) {
    std::string args;
    for (const auto& a : t.args) {
      if (!args.empty()) args += ", ";
      args += a.name;
      if (!a.required) args += '?';
    }
    out += fmt::format("- {}({}): {}\n", t.name, args, t.description);
  }
  return out;
}

std::string render_skill_block(const SkillBundle& skill) {
  std::string out = "## Skill: " + skill.name + "\n";
  if (!skill.description.empty()) out += skill.description + "\n";
  if (!skill.instructions.empty()) out += "\n" + skill.instructions + "\n";
  if (!skill.examples.empty()) {
    out += "\nExamples:\n";
    for (const auto& e : skill.examples) out += "User: " + e.user + "\nAssistant: " + e.assistant + "\n";
  }
  return out;
}

CompletionRequest build_prompt(const DataMemory& memory, const AgentConfig& config, const PromptInputs& inputs) {
  CompletionRequest req;
  req.context_window_tokens = config.context_window_tokens;
  req.stop_sequences = {"\nOBSERVATION:"};

  std::string system = inputs.preamble;
  if (estimate_tokens(system) > config.context_window_tokens) {
    throw Error(ErrorCode::BudgetExceeded,
                fmt::format("the agent preamble alone needs {} tokens; the window is {}", estimate_tokens(system),
                            config.context_window_tokens));
  }
  append_block(system, inputs.instructions);
  append_block(system, inputs.persona);

  auto budget = static_cast<std::int64_t>(kSkillBudgetShare * config.context_window_tokens);
  for (const auto& skill : inputs.skills) {
    auto block = render_skill_block(*skill);
    const auto cost = estimate_tokens(block);
    if (cost <= budget) {
      append_block(system, block);
      budget -= cost;
      continue;
    }
    const auto room = budget * 4 - static_cast<std::int64_t>(kTruncatedMarker.size());
    if (room > 0) {
      std::string cut(utf8_prefix(block, static_cast<std::size_t>(room)));
      cut += kTruncatedMarker;
      append_block(system, cut);
    }
    break;
  }
  req.system_block = std::move(system);

  for (const auto& m : memory.entries()) req.messages.push_back({m.role, m.text});

  const auto total = estimate_request_tokens(req);
  if (total > config.context_window_tokens) {
    throw Error(ErrorCode::BudgetExceeded,
                fmt::format("prompt needs {} tokens but the context window is {}", total, config.context_window_tokens));
  }
  return req;
}

SkillList match_active_skills(std::string_view user_text, const SkillSet& skills) {
  SkillList out;
  for (const auto& s : skills.skills) {
    if (skill_matches(*s, user_text)) out.push_back(s);
  }
  return out;
}

}  // namespace dataclaw
