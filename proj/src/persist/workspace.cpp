#include "dataclaw/persist/workspace.hpp"

#include <fstream>
#include <system_error>

#include <unistd.h>

#include "dataclaw/core/config.hpp"
#include "dataclaw/core/error.hpp"
#include "dataclaw/core/ids.hpp"
#include "dataclaw/core/sandbox.hpp"

namespace dataclaw {

namespace fs = std::filesystem;

fs::path WorkspaceLayout::transcript_path(std::string_view session_id) const {
  return validate_workspace_path("sessions/" + std::string(session_id) + "/transcript.jsonl", root);
}

fs::path WorkspaceLayout::session_artifacts_dir(std::string_view session_id) const {
  return validate_workspace_path("artifacts/" + std::string(session_id), root);
}

std::string WorkspaceLayout::relative(const fs::path& absolute) const {
  return absolute.lexically_relative(root).generic_string();
}

void write_file_atomic(const fs::path& target, std::string_view bytes) {
  const auto tmp = target.parent_path() / ("." + target.filename().string() + ".tmp-" + random_id().substr(0, 12));
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoFailure, "cannot write " + tmp.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) {
      std::error_code ec;
      fs::remove(tmp, ec);
      throw Error(ErrorCode::IoFailure, "write failed for " + tmp.string());
    }
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw Error(ErrorCode::IoFailure, "cannot rename into " + target.string() + ": " + ec.message());
  }
}

InitResult init_workspace(const fs::path& root_in) {
  InitResult result;
  try {
    auto root = fs::absolute(root_in).lexically_normal();
    if (root.filename().empty()) root = root.parent_path();
    result.layout.root = root;
    const auto& l = result.layout;

    for (const auto& dir : {l.root, l.skills_dir(), l.sessions_dir(), l.artifacts_dir(), l.data_dir()}) {
      if (!fs::exists(dir)) {
        fs::create_directories(dir);
        result.created_anything = true;
      }
    }
    // A directory that exists but cannot be written to is not a usable workspace.
    if (::access(l.root.c_str(), W_OK) != 0) {
      throw Error(ErrorCode::IoFailure, "workspace root is not writable: " + l.root.string());
    }
    auto ensure_file = [&](const fs::path& p, std::string_view content) {
      if (fs::exists(p)) return;
      write_file_atomic(p, content);
      result.created_anything = true;
    };
    ensure_file(l.config_file(), serialize_config(WorkspaceConfig{}));
    ensure_file(l.memory_md(), kMemoryTemplate);
    ensure_file(l.souls_md(), kSoulsTemplate);
    ensure_file(l.agents_md(), kAgentsTemplate);
  } catch (const fs::filesystem_error& e) {
    throw Error(ErrorCode::IoFailure, e.what());
  }
  return result;
}

WorkspaceLayout open_workspace(const fs::path& root_in) {
  WorkspaceLayout layout;
  auto root = fs::absolute(root_in).lexically_normal();
  if (root.filename().empty()) root = root.parent_path();
  layout.root = root;
  std::error_code ec;
  if (!fs::is_directory(root, ec) || !fs::exists(layout.config_file(), ec)) {
    throw Error(ErrorCode::NotFound, "not an initialized workspace: " + root.string());
  }
  return layout;
}

}  // namespace dataclaw
