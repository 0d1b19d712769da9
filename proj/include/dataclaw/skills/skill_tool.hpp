#pragma once

#include <chrono>
#include <filesystem>
#include <string>
#include <vector>

#include "dataclaw/skills/catalog.hpp"
#include "dataclaw/tools/registry.hpp"

namespace dataclaw {

struct ProcessResult {
  int exit_code = -1;
  bool timed_out = false;
  std::string out;
  std::string err;
};

/// Runs argv[0] with the given working directory, feeding `input` on stdin.
/// The child is killed once `timeout` passes.
ProcessResult run_process(const std::vector<std::string>& argv, const std::filesystem::path& cwd,
                          std::string_view input, std::chrono::milliseconds timeout);

inline constexpr std::chrono::seconds kSkillToolTimeout{30};

/// Tool entries for skills declaring `tool`/`command`: JSON args go to the
/// executable's stdin, its stdout is the observation. Runs with CWD set to
/// the workspace root.
std::vector<std::pair<tools::ToolSpec, tools::Executor>> skill_tools(
    const SkillSet& set, const std::filesystem::path& workspace_root,
    std::chrono::milliseconds timeout = kSkillToolTimeout);

}  // namespace dataclaw
