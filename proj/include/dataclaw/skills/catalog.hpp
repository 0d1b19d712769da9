#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "dataclaw/core/types.hpp"
#include "dataclaw/skills/skill.hpp"

namespace dataclaw {

/// Immutable view of the active skills, sorted by name. A turn holds one
/// snapshot for its whole duration.
struct SkillSet {
  std::uint64_t version = 0;
  std::vector<std::shared_ptr<const SkillBundle>> skills;

  std::shared_ptr<const SkillBundle> find(const std::string& name) const;
};

struct SkillScanError {
  std::string dir;
  std::string message;
};

struct ScanReport {
  std::vector<std::string> registered;  // new or changed
  std::vector<std::string> removed;
  std::vector<std::string> unchanged;
  std::vector<SkillScanError> errors;
  std::uint64_t version = 0;

  bool changed() const { return !registered.empty() || !removed.empty(); }
};

Json to_json(const ScanReport& report);
Json to_json(const SkillBundle& skill);

class SkillCatalog {
 public:
  explicit SkillCatalog(std::filesystem::path skills_dir);

  /// Reads <skills_dir>/*/SKILL.md. Malformed bundles are reported and left
  /// out; nothing aborts the scan. The new set replaces the old one in a
  /// single swap, and the version only moves when the set changed.
  ScanReport scan();

  std::shared_ptr<const SkillSet> snapshot() const;

  const std::filesystem::path& skills_dir() const { return dir_; }

 private:
  std::filesystem::path dir_;
  std::mutex scan_mu_;
  mutable std::mutex snap_mu_;
  std::shared_ptr<const SkillSet> current_;
};

}  // namespace dataclaw
