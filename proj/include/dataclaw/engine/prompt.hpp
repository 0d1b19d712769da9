#pragma once

#include <memory>
#include <string>
#include <vector>

#include "dataclaw/core/config.hpp"
#include "dataclaw/core/preamble.hpp"
#include "dataclaw/llm/backend.hpp"
#include "dataclaw/memory/data_memory.hpp"
#include "dataclaw/skills/catalog.hpp"
#include "dataclaw/tools/registry.hpp"

namespace dataclaw {

using SkillList = std::vector<std::shared_ptr<const SkillBundle>>;

struct PromptInputs {
  std::string preamble = std::string(kAgentPreamble);
  std::string instructions;  // AGENTS.md
  std::string persona;       // SOULS.md
  SkillList skills;          // active, in registration order
};

// Share of the context window the skill blocks may use together.
inline constexpr double kSkillBudgetShare = 0.25;

/// The protocol preamble followed by one line per available tool.
std::string agent_preamble(const std::vector<tools::ToolSpec>& tools);

/// Rendered block for one skill: heading, instructions, examples.
std::string render_skill_block(const SkillBundle& skill);

/// system_block = preamble, AGENTS.md, SOULS.md, then skill blocks (later
/// skills are cut first once the skill budget is spent); messages = the
/// memory window in order. BudgetExceeded when the result does not fit the
/// context window.
CompletionRequest build_prompt(const DataMemory& memory, const AgentConfig& config, const PromptInputs& inputs);

/// Skills with a trigger occurring case-insensitively in `user_text`, in
/// the set's order.
SkillList match_active_skills(std::string_view user_text, const SkillSet& skills);

}  // namespace dataclaw
