#pragma once

#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dataclaw/core/clock.hpp"
#include "dataclaw/core/ids.hpp"
#include "dataclaw/core/types.hpp"
#include "dataclaw/persist/workspace.hpp"

namespace dataclaw {

class ArtifactStore {
 public:
  ArtifactStore(WorkspaceLayout workspace, Clock& clock, IdSource& ids)
      : workspace_(std::move(workspace)), clock_(clock), ids_(ids) {}

  /// Atomic write under artifacts/<session>/. Name collisions become
  /// `name-2.ext`, `name-3.ext`, ...
  Artifact save(const std::string& session_id, std::string_view name, std::string_view bytes,
                const std::string& media_type);

  std::optional<Artifact> find(const std::string& id) const;
  // Accepts an artifact id, a workspace-relative path, or a bare file name
  // inside the session's artifact directory.
  std::optional<Artifact> resolve(const std::string& session_id, const std::string& ref) const;
  std::vector<Artifact> list(const std::string& session_id) const;

  std::string read(const Artifact& artifact) const;

  const WorkspaceLayout& workspace() const { return workspace_; }

 private:
  WorkspaceLayout workspace_;
  Clock& clock_;
  IdSource& ids_;
  mutable std::mutex mu_;
  std::map<std::string, Artifact> by_id_;
  std::vector<std::string> order_;
};

std::string media_type_for(std::string_view file_name);

}  // namespace dataclaw
