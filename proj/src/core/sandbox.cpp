#include "dataclaw/core/sandbox.hpp"

#include "dataclaw/core/error.hpp"

namespace dataclaw {

namespace fs = std::filesystem;

bool is_within(const fs::path& candidate, const fs::path& root) {
  auto c = candidate.begin();
  for (auto r = root.begin(); r != root.end(); ++r, ++c) {
    // A trailing separator shows up as an empty final element.
    if (r->empty() && std::next(r) == root.end()) return true;
    if (c == candidate.end() || *c != *r) return false;
  }
  return true;
}

fs::path validate_workspace_path(std::string_view path, const fs::path& workspace_root) {
  const fs::path root = fs::absolute(workspace_root).lexically_normal();
  fs::path requested{std::string(path)};
  fs::path joined = requested.is_absolute() ? requested : root / requested;
  fs::path resolved = joined.lexically_normal();
  if (!resolved.empty() && resolved.filename().empty()) resolved = resolved.parent_path();
  if (!is_within(resolved, root)) {
    throw Error(ErrorCode::PathEscape, "path escapes the workspace: " + std::string(path));
  }
  return resolved;
}

}  // namespace dataclaw
