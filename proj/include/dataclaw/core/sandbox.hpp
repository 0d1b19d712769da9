#pragma once

#include <filesystem>
#include <string_view>

namespace dataclaw {

/// Resolves `path` against `workspace_root` lexically ("." and ".." folded)
/// and returns the absolute result. Throws PathEscape when the result is not
/// inside the root. Symlinks are not followed.
std::filesystem::path validate_workspace_path(std::string_view path,
                                              const std::filesystem::path& workspace_root);

// True when `candidate` (already normalized) equals or sits under `root`.
bool is_within(const std::filesystem::path& candidate, const std::filesystem::path& root);

}  // namespace dataclaw
