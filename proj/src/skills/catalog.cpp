#include "dataclaw/skills/catalog.hpp"

#include <algorithm>
#include <map>

#include <spdlog/spdlog.h>

#include "dataclaw/core/error.hpp"
#include "dataclaw/core/strings.hpp"

namespace dataclaw {

std::shared_ptr<const SkillBundle> SkillSet::find(const std::string& name) const {
  for (const auto& s : skills) {
    if (s->name == name) return s;
  }
  return nullptr;
}

Json to_json(const ScanReport& report) {
  Json errors = Json::array();
  for (const auto& e : report.errors) errors.push_back({{"dir", e.dir}, {"message", e.message}});
  return {{"registered", report.registered},
          {"removed", report.removed},
          {"unchanged", report.unchanged},
          {"errors", errors},
          {"version", report.version}};
}

Json to_json(const SkillBundle& skill) {
  Json examples = Json::array();
  for (const auto& e : skill.examples) examples.push_back({{"user", e.user}, {"assistant", e.assistant}});
  Json out = {{"name", skill.name},
              {"description", skill.description},
              {"version", skill.version},
              {"triggers", skill.triggers},
              {"content_hash", skill.content_hash},
              {"examples", examples}};
  out["tool"] = skill.tool ? Json(*skill.tool) : Json();
  return out;
}

SkillCatalog::SkillCatalog(std::filesystem::path skills_dir)
    : dir_(std::move(skills_dir)), current_(std::make_shared<const SkillSet>()) {}

std::shared_ptr<const SkillSet> SkillCatalog::snapshot() const {
  std::lock_guard lock(snap_mu_);
  return current_;
}

ScanReport SkillCatalog::scan() {
  namespace fs = std::filesystem;
  std::lock_guard scan_lock(scan_mu_);
  const auto previous = snapshot();

  std::vector<fs::path> dirs;
  std::error_code ec;
  if (fs::is_directory(dir_, ec)) {
    for (const auto& entry : fs::directory_iterator(dir_, ec)) {
      if (entry.is_directory(ec)) dirs.push_back(entry.path());
    }
  }
  std::sort(dirs.begin(), dirs.end());

  ScanReport report;
  std::map<std::string, std::shared_ptr<const SkillBundle>> next;
  for (const auto& dir : dirs) {
    const auto dir_name = dir.filename().string();
    const auto file = dir / "SKILL.md";
    if (!fs::is_regular_file(file, ec)) continue;
    try {
      const auto bytes = read_file(file.string());
      const auto hash = skill_content_hash(bytes);
      if (auto old = previous->find(dir_name); old && old->content_hash == hash) {
        next.emplace(dir_name, old);
        report.unchanged.push_back(dir_name);
        continue;
      }
      auto bundle = parse_skill(bytes, dir);
      if (bundle.name != dir_name) {
        throw Error(ErrorCode::MalformedSkill,
                    "name '" + bundle.name + "' does not match directory '" + dir_name + "'");
      }
      next.emplace(dir_name, std::make_shared<const SkillBundle>(std::move(bundle)));
      report.registered.push_back(dir_name);
    } catch (const std::exception& e) {
      spdlog::warn("skill {} skipped: {}", dir_name, e.what());
      report.errors.push_back({dir_name, e.what()});
    }
  }
  for (const auto& old : previous->skills) {
    if (!next.count(old->name)) report.removed.push_back(old->name);
  }

  if (!report.changed()) {
    report.version = previous->version;
    return report;
  }
  auto set = std::make_shared<SkillSet>();
  set->version = previous->version + 1;
  for (auto& [_, bundle] : next) set->skills.push_back(bundle);
  report.version = set->version;
  std::lock_guard lock(snap_mu_);
  current_ = std::move(set);
  return report;
}

}  // namespace dataclaw
