#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace dataclaw {

/// Fixed layout of a workspace root. All paths are absolute.
struct WorkspaceLayout {
  std::filesystem::path root;

  std::filesystem::path config_file() const { return root / "config"; }
  std::filesystem::path agents_md() const { return root / "AGENTS.md"; }
  std::filesystem::path souls_md() const { return root / "SOULS.md"; }
  std::filesystem::path memory_md() const { return root / "MEMORY.md"; }
  std::filesystem::path skills_dir() const { return root / "skills"; }
  std::filesystem::path sessions_dir() const { return root / "sessions"; }
  std::filesystem::path artifacts_dir() const { return root / "artifacts"; }
  std::filesystem::path data_dir() const { return root / "data"; }

  std::filesystem::path transcript_path(std::string_view session_id) const;
  std::filesystem::path session_artifacts_dir(std::string_view session_id) const;

  // Workspace-relative rendering used in events and records.
  std::string relative(const std::filesystem::path& absolute) const;
};

inline constexpr std::string_view kMemoryTemplate = "# MEMORY\n";
inline constexpr std::string_view kSoulsTemplate = "# SOULS\n\n## Preferences\n";
inline constexpr std::string_view kAgentsTemplate = "";

struct InitResult {
  WorkspaceLayout layout;
  // False when every directory and file already existed.
  bool created_anything = false;
};

/// Creates missing directories and template files; never touches existing
/// content. Throws IoFailure.
InitResult init_workspace(const std::filesystem::path& root);

/// Opens an initialized workspace; NotFound when the root or its config file
/// is missing.
WorkspaceLayout open_workspace(const std::filesystem::path& root);

/// Writes `bytes` to a sibling temp file and renames it over `target`.
void write_file_atomic(const std::filesystem::path& target, std::string_view bytes);

}  // namespace dataclaw
