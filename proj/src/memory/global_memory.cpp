#include "dataclaw/memory/global_memory.hpp"

#include <algorithm>
#include <filesystem>
#include <set>

#include <fmt/format.h>

#include "dataclaw/core/error.hpp"
#include "dataclaw/core/strings.hpp"

namespace dataclaw {

namespace fs = std::filesystem;

namespace {

constexpr std::string_view kSessionPrefix = "## Session ";
constexpr std::string_view kHeadingSep = " — ";

void require_single_line(std::string_view text) {
  if (text.find_first_of("\r\n") != std::string_view::npos) {
    throw Error(ErrorCode::Precondition, "memory entries must be a single line");
  }
  if (trim(text).empty()) throw Error(ErrorCode::Precondition, "memory entries must not be empty");
}

// Session id named by the last `## Session` heading, or empty.
std::string last_heading_session(std::string_view content) {
  std::string owner;
  for (auto line : split_lines(content)) {
    if (line.rfind("## ", 0) != 0) continue;
    owner.clear();
    if (line.rfind(kSessionPrefix, 0) == 0) {
      auto rest = line.substr(kSessionPrefix.size());
      owner = std::string(rest.substr(0, rest.find(kHeadingSep)));
    }
  }
  return owner;
}

struct Line {
  std::string text;
  std::string source;
};

void collect_bullets(std::string_view file_label, std::string_view content, std::vector<Line>& out) {
  std::string heading;
  for (auto line : split_lines(content)) {
    if (line.rfind("## ", 0) == 0) {
      heading = std::string(trim(line.substr(3)));
    } else if (line.rfind("- ", 0) == 0) {
      out.push_back({std::string(line),
                     heading.empty() ? std::string(file_label) : fmt::format("{} / {}", file_label, heading)});
    }
  }
}

}  // namespace

std::string_view to_string(EntryKind kind) {
  switch (kind) {
    case EntryKind::finding: return "finding";
    case EntryKind::artifact: return "artifact";
    case EntryKind::note: return "note";
  }
  return "note";
}

MemoryFile memory_file_from_string(std::string_view name) {
  if (name == "memory") return MemoryFile::memory;
  if (name == "agents") return MemoryFile::agents;
  if (name == "souls") return MemoryFile::souls;
  throw Error(ErrorCode::NotFound, fmt::format("unknown memory file '{}'", name));
}

std::string session_heading(std::string_view session_id, std::string_view timestamp) {
  return fmt::format("{}{}{}{}", kSessionPrefix, session_id, kHeadingSep, timestamp);
}

fs::path GlobalMemory::path_of(MemoryFile file) const {
  switch (file) {
    case MemoryFile::memory: return workspace_.memory_md();
    case MemoryFile::agents: return workspace_.agents_md();
    case MemoryFile::souls: return workspace_.souls_md();
  }
  return workspace_.memory_md();
}

std::string GlobalMemory::read_or_empty(const fs::path& p) const {
  std::error_code ec;
  if (!fs::exists(p, ec)) return {};
  return read_file(p.string());
}

void GlobalMemory::record(const GlobalMemoryEntry& entry) {
  require_single_line(entry.text);
  std::lock_guard lock(write_mu_);
  auto content = read_or_empty(workspace_.memory_md());
  if (content.empty()) content = std::string(kMemoryTemplate);
  if (content.back() != '\n') content += '\n';
  // Append-only: when another session wrote last, this session gets a fresh
  // heading rather than an insertion above the other section.
  if (last_heading_session(content) != entry.session_id) {
    content += fmt::format("\n{}\n", session_heading(entry.session_id, entry.recorded_at));
  }
  content += fmt::format("- {}: {}\n", to_string(entry.kind), entry.text);
  write_file_atomic(workspace_.memory_md(), content);
}

void GlobalMemory::add_preference(const PersonaNote& note) {
  require_single_line(note.text);
  std::lock_guard lock(write_mu_);
  auto content = read_or_empty(workspace_.souls_md());
  if (content.empty()) content = std::string(kSoulsTemplate);
  if (content.back() != '\n') content += '\n';
  content += fmt::format("- {}\n", note.text);
  write_file_atomic(workspace_.souls_md(), content);
}

std::vector<SearchHit> GlobalMemory::search(std::string_view query, std::size_t top_k) const {
  auto terms_list = split_whitespace(ascii_lower(query));
  if (terms_list.empty()) throw Error(ErrorCode::Precondition, "memory_search needs a non-empty query");
  const std::set<std::string> terms(terms_list.begin(), terms_list.end());

  std::vector<Line> lines;
  collect_bullets("MEMORY.md", read_or_empty(workspace_.memory_md()), lines);
  collect_bullets("SOULS.md", read_or_empty(workspace_.souls_md()), lines);

  struct Scored {
    int score;
    std::size_t position;
  };
  std::vector<Scored> scored;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const auto lower = ascii_lower(lines[i].text);
    int score = 0;
    for (const auto& t : terms) score += lower.find(t) != std::string::npos ? 1 : 0;
    if (score > 0) scored.push_back({score, i});
  }
  std::sort(scored.begin(), scored.end(), [](const Scored& a, const Scored& b) {
    return a.score != b.score ? a.score > b.score : a.position > b.position;
  });
  if (scored.size() > top_k) scored.resize(top_k);

  std::vector<SearchHit> hits;
  hits.reserve(scored.size());
  for (const auto& s : scored) hits.push_back({s.score, lines[s.position].text, lines[s.position].source});
  return hits;
}

std::pair<std::string, std::string> GlobalMemory::load_global_blocks() const {
  return {read_or_empty(workspace_.agents_md()), read_or_empty(workspace_.souls_md())};
}

std::string GlobalMemory::read(MemoryFile file) const { return read_or_empty(path_of(file)); }

void GlobalMemory::write(MemoryFile file, std::string_view content) {
  std::lock_guard lock(write_mu_);
  write_file_atomic(path_of(file), content);
}

}  // namespace dataclaw
