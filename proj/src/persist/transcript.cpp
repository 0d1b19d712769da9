#include "dataclaw/persist/transcript.hpp"

#include <cstdio>
#include <fstream>
#include <memory>

#include <fmt/format.h>
#include <unistd.h>

#include "dataclaw/core/error.hpp"

namespace dataclaw {

namespace fs = std::filesystem;

void log_event(const WorkspaceLayout& workspace, const AgentEvent& event) {
  const auto path = workspace.transcript_path(event.session_id);
  std::error_code ec;
  fs::create_directories(path.parent_path(), ec);
  if (ec) throw Error(ErrorCode::IoFailure, "cannot create " + path.parent_path().string());

  std::unique_ptr<std::FILE, int (*)(std::FILE*)> f(std::fopen(path.c_str(), "ab"), &std::fclose);
  if (!f) throw Error(ErrorCode::IoFailure, "cannot open " + path.string());
  const auto line = to_json(event).dump() + "\n";
  if (std::fwrite(line.data(), 1, line.size(), f.get()) != line.size()) {
    throw Error(ErrorCode::IoFailure, "short write to " + path.string());
  }
  if (event.kind == EventKind::done || event.kind == EventKind::error) {
    std::fflush(f.get());
    ::fsync(::fileno(f.get()));
  }
}

std::vector<AgentEvent> read_transcript(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoFailure, "cannot read " + path.string());
  std::vector<AgentEvent> events;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      events.push_back(event_from_json(Json::parse(line)));
    } catch (const Json::exception& e) {
      throw Error(ErrorCode::ParseError, fmt::format("line {}: {}", line_no, e.what()));
    } catch (const Error& e) {
      throw Error(ErrorCode::ParseError, fmt::format("line {}: {}", line_no, e.what()));
    }
  }
  return events;
}

}  // namespace dataclaw
