#pragma once

#include <cstddef>
#include <mutex>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "dataclaw/persist/workspace.hpp"

namespace dataclaw {

enum class EntryKind { finding, artifact, note };

std::string_view to_string(EntryKind kind);

struct GlobalMemoryEntry {
  std::string session_id;
  std::string recorded_at;
  EntryKind kind = EntryKind::finding;
  std::string text;
};

struct PersonaNote {
  std::string recorded_at;
  std::string text;
};

struct SearchHit {
  int score = 0;
  std::string snippet;
  // "<file> / <section heading>"
  std::string source;
};

enum class MemoryFile { memory, agents, souls };

MemoryFile memory_file_from_string(std::string_view name);

/// Persistent cross-session stores (MEMORY.md, AGENTS.md, SOULS.md). One
/// instance per workspace; writes are serialized and land via rename, so
/// readers only ever see complete files.
class GlobalMemory {
 public:
  explicit GlobalMemory(WorkspaceLayout workspace) : workspace_(std::move(workspace)) {}

  // Appends `- <kind>: <text>` under the session's heading. Precondition
  // error if the text spans lines.
  void record(const GlobalMemoryEntry& entry);
  void add_preference(const PersonaNote& note);

  std::vector<SearchHit> search(std::string_view query, std::size_t top_k = 5) const;

  // (AGENTS.md, SOULS.md) contents; empty strings for missing files.
  std::pair<std::string, std::string> load_global_blocks() const;

  std::string read(MemoryFile file) const;
  void write(MemoryFile file, std::string_view content);

  const WorkspaceLayout& workspace() const { return workspace_; }

 private:
  std::filesystem::path path_of(MemoryFile file) const;
  std::string read_or_empty(const std::filesystem::path& p) const;

  WorkspaceLayout workspace_;
  mutable std::mutex write_mu_;
};

std::string session_heading(std::string_view session_id, std::string_view timestamp);

}  // namespace dataclaw
