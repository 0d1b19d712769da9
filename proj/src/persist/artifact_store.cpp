#include "dataclaw/persist/artifact_store.hpp"

#include <filesystem>

#include <fmt/format.h>

#include "dataclaw/core/error.hpp"
#include "dataclaw/core/sandbox.hpp"
#include "dataclaw/core/strings.hpp"

namespace dataclaw {

namespace fs = std::filesystem;

namespace {

void check_name(std::string_view name) {
  if (name.empty() || name == "." || name == ".." ||
      name.find_first_of(std::string_view("/\\\0", 3)) != std::string_view::npos) {
    throw Error(ErrorCode::IoFailure, fmt::format("invalid artifact name '{}'", name));
  }
}

}  // namespace

std::string media_type_for(std::string_view file_name) {
  const auto ext = ascii_lower(fs::path(std::string(file_name)).extension().string());
  if (ext == ".svg") return "image/svg+xml";
  if (ext == ".html" || ext == ".htm") return "text/html";
  if (ext == ".md") return "text/markdown";
  if (ext == ".csv") return "text/csv";
  if (ext == ".json") return "application/json";
  if (ext == ".png") return "image/png";
  if (ext == ".txt") return "text/plain";
  return "application/octet-stream";
}

Artifact ArtifactStore::save(const std::string& session_id, std::string_view name, std::string_view bytes,
                             const std::string& media_type) {
  check_name(name);
  const auto dir = workspace_.session_artifacts_dir(session_id);

  std::lock_guard lock(mu_);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::IoFailure, "cannot create " + dir.string() + ": " + ec.message());

  const fs::path base{std::string(name)};
  const auto stem = base.stem().string();
  const auto ext = base.extension().string();
  fs::path target = dir / base;
  for (int n = 2; fs::exists(target); ++n) target = dir / fmt::format("{}-{}{}", stem, n, ext);
  validate_workspace_path(target.string(), workspace_.root);

  write_file_atomic(target, bytes);

  Artifact a;
  a.id = ids_.next();
  a.session_id = session_id;
  a.relative_path = workspace_.relative(target);
  a.media_type = media_type;
  a.byte_length = bytes.size();
  a.created_at = clock_.now_iso();
  by_id_[a.id] = a;
  order_.push_back(a.id);
  return a;
}

std::optional<Artifact> ArtifactStore::find(const std::string& id) const {
  std::lock_guard lock(mu_);
  if (auto it = by_id_.find(id); it != by_id_.end()) return it->second;
  return std::nullopt;
}

std::optional<Artifact> ArtifactStore::resolve(const std::string& session_id, const std::string& ref) const {
  std::lock_guard lock(mu_);
  if (auto it = by_id_.find(ref); it != by_id_.end()) return it->second;
  const auto by_name = fmt::format("artifacts/{}/{}", session_id, ref);
  for (const auto& id : order_) {
    const auto& a = by_id_.at(id);
    if (a.relative_path == ref || (a.session_id == session_id && a.relative_path == by_name)) return a;
  }
  return std::nullopt;
}

std::vector<Artifact> ArtifactStore::list(const std::string& session_id) const {
  std::lock_guard lock(mu_);
  std::vector<Artifact> out;
  for (const auto& id : order_) {
    const auto& a = by_id_.at(id);
    if (a.session_id == session_id) out.push_back(a);
  }
  return out;
}

std::string ArtifactStore::read(const Artifact& artifact) const {
  return read_file(validate_workspace_path(artifact.relative_path, workspace_.root).string());
}

}  // namespace dataclaw
