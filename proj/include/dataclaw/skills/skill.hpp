#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace dataclaw {

struct SkillExample {
  std::string user;
  std::string assistant;

  bool operator==(const SkillExample&) const = default;
};

struct SkillBundle {
  std::string name;
  std::string description;
  std::vector<std::string> triggers;
  std::string instructions;
  std::vector<SkillExample> examples;
  std::filesystem::path source_dir;
  std::string content_hash;
  std::string version = "1";
  // Optional executable entry: registered as a skill-origin tool.
  std::optional<std::string> tool;
  std::optional<std::string> command;  // relative to source_dir
};

/// SKILL.md grammar:
///
///   ---
///   name: experiment-tracker
///   description: Track experiments
///   version: 2
///   triggers: [experiment, track]
///   tool: track_experiment          (optional, with command)
///   command: bin/track.sh
///   ---
///   Markdown instructions ...
///
///   ## Examples
///   - user: log run 4
///     assistant: Logged run 4.
///
/// Throws MalformedSkill ("line N: ...") for a missing or unterminated front
/// matter, a missing name, empty triggers or an unpaired example.
SkillBundle parse_skill(std::string_view bytes, const std::filesystem::path& source_dir = {});

// Hex FNV-1a of the SKILL.md bytes.
std::string skill_content_hash(std::string_view bytes);

// Case-insensitive substring match of any trigger against `text`.
bool skill_matches(const SkillBundle& skill, std::string_view text);

}  // namespace dataclaw
