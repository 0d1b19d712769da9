#include "dataclaw/skills/skill.hpp"

#include <fmt/format.h>

#include "dataclaw/core/error.hpp"
#include "dataclaw/core/ids.hpp"
#include "dataclaw/core/strings.hpp"

namespace dataclaw {

namespace {

[[noreturn]] void malformed(std::size_t line, const std::string& message) {
  throw Error(ErrorCode::MalformedSkill, fmt::format("line {}: {}", line, message));
}

std::string unquote(std::string_view v) {
  v = trim(v);
  if (v.size() >= 2 && (v.front() == '"' || v.front() == '\'') && v.back() == v.front()) {
    v = v.substr(1, v.size() - 2);
  }
  return std::string(v);
}

std::vector<std::string> parse_list(std::string_view v, std::size_t line) {
  v = trim(v);
  if (v.size() < 2 || v.front() != '[' || v.back() != ']') malformed(line, "triggers must be a bracketed list");
  std::vector<std::string> out;
  std::string_view rest = v.substr(1, v.size() - 2);
  while (!rest.empty()) {
    const auto comma = rest.find(',');
    auto item = unquote(rest.substr(0, comma));
    if (!item.empty()) out.push_back(std::move(item));
    if (comma == std::string_view::npos) break;
    rest.remove_prefix(comma + 1);
  }
  return out;
}

bool is_heading(std::string_view line, int level) {
  const std::string marker = std::string(static_cast<std::size_t>(level), '#') + " ";
  return line.rfind(marker, 0) == 0;
}

std::string join_trimmed(const std::vector<std::string_view>& lines) {
  std::size_t first = 0, last = lines.size();
  while (first < last && trim(lines[first]).empty()) ++first;
  while (last > first && trim(lines[last - 1]).empty()) --last;
  std::string out;
  for (std::size_t i = first; i < last; ++i) {
    out.append(lines[i]);
    if (i + 1 < last) out += '\n';
  }
  return out;
}

bool safe_relative(std::string_view path) {
  if (path.empty() || path.front() == '/') return false;
  const std::filesystem::path p(path);
  for (const auto& part : p) {
    if (part == "..") return false;
  }
  return true;
}

}  // namespace

std::string skill_content_hash(std::string_view bytes) { return fmt::format("{:016x}", fnv1a64(bytes)); }

SkillBundle parse_skill(std::string_view bytes, const std::filesystem::path& source_dir) {
  const auto hash = skill_content_hash(bytes);
  if (bytes.rfind("\xEF\xBB\xBF", 0) == 0) bytes.remove_prefix(3);
  const auto lines = split_lines(bytes);
  if (lines.empty() || trim(lines[0]) != "---") malformed(1, "missing front matter (expected '---')");

  SkillBundle skill;
  skill.source_dir = source_dir;
  bool have_triggers = false;
  std::size_t i = 1;
  for (; i < lines.size(); ++i) {
    const auto line = trim(lines[i]);
    const auto lineno = i + 1;
    if (line == "---") break;
    if (line.empty() || line.front() == '#') continue;
    const auto colon = line.find(':');
    if (colon == std::string_view::npos) malformed(lineno, "expected 'key: value'");
    const auto key = ascii_lower(trim(line.substr(0, colon)));
    const auto value = line.substr(colon + 1);
    if (key == "name") {
      skill.name = unquote(value);
    } else if (key == "description") {
      skill.description = unquote(value);
    } else if (key == "version") {
      skill.version = unquote(value);
    } else if (key == "triggers") {
      skill.triggers = parse_list(value, lineno);
      if (skill.triggers.empty()) malformed(lineno, "triggers must not be empty");
      have_triggers = true;
    } else if (key == "tool") {
      skill.tool = unquote(value);
    } else if (key == "command") {
      auto cmd = unquote(value);
      if (!safe_relative(cmd)) malformed(lineno, "command must be a relative path inside the skill directory");
      skill.command = std::move(cmd);
    }
  }
  if (i >= lines.size()) malformed(lines.size(), "unterminated front matter (missing closing '---')");
  const auto fence_line = i + 1;
  if (skill.name.empty()) malformed(fence_line, "front matter is missing 'name'");
  if (!have_triggers) malformed(fence_line, "front matter is missing 'triggers'");
  if (skill.tool.has_value() != skill.command.has_value()) {
    malformed(fence_line, "'tool' and 'command' must be given together");
  }

  std::vector<std::string_view> body;
  bool in_examples = false;
  std::optional<std::pair<std::string, std::size_t>> pending_user;
  for (++i; i < lines.size(); ++i) {
    const auto raw = lines[i];
    const auto lineno = i + 1;
    if (is_heading(raw, 2)) {
      if (pending_user) malformed(pending_user->second, "example has no assistant line");
      in_examples = ascii_lower(trim(raw.substr(3))) == "examples";
      if (in_examples) continue;
    }
    if (!in_examples) {
      body.push_back(raw);
      continue;
    }
    auto line = trim(raw);
    if (line.rfind("- ", 0) == 0) line = trim(line.substr(2));
    const auto lower = ascii_lower(line);
    if (lower.rfind("user:", 0) == 0) {
      if (pending_user) malformed(pending_user->second, "example has no assistant line");
      pending_user = std::make_pair(std::string(trim(line.substr(5))), lineno);
    } else if (lower.rfind("assistant:", 0) == 0) {
      if (!pending_user) malformed(lineno, "assistant line without a preceding user line");
      skill.examples.push_back({pending_user->first, std::string(trim(line.substr(10)))});
      pending_user.reset();
    }
  }
  if (pending_user) malformed(pending_user->second, "example has no assistant line");
  skill.instructions = join_trimmed(body);
  skill.content_hash = hash;
  return skill;
}

bool skill_matches(const SkillBundle& skill, std::string_view text) {
  const auto haystack = ascii_lower(text);
  for (const auto& t : skill.triggers) {
    if (haystack.find(ascii_lower(t)) != std::string::npos) return true;
  }
  return false;
}

}  // namespace dataclaw
