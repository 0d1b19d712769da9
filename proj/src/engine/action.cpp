#include "dataclaw/engine/action.hpp"

#include <optional>
#include <vector>

#include "dataclaw/core/error.hpp"
#include "dataclaw/core/strings.hpp"

namespace dataclaw {

namespace {

enum class Marker { none, thought, action, final };

struct MarkedLine {
  Marker marker = Marker::none;
  std::size_t offset = 0;  // byte offset of the text after the marker
};

MarkedLine classify(std::string_view text, std::size_t line_start, std::size_t line_end) {
  auto line = text.substr(line_start, line_end - line_start);
  std::size_t lead = 0;
  while (lead < line.size() && (line[lead] == ' ' || line[lead] == '\t')) ++lead;
  line.remove_prefix(lead);
  const auto at = line_start + lead;
  if (line.rfind("THOUGHT:", 0) == 0) return {Marker::thought, at + 8};
  if (line.rfind("ACTION:", 0) == 0) return {Marker::action, at + 7};
  if (line.rfind("FINAL:", 0) == 0) return {Marker::final, at + 6};
  return {};
}

[[noreturn]] void unparsable(const std::string& why) { throw Error(ErrorCode::UnparsableAction, why); }

// Span of the first balanced JSON object in `s`, honouring strings.
std::optional<std::string_view> json_object_span(std::string_view s) {
  const auto open = s.find_first_not_of(" \t\r\n");
  if (open == std::string_view::npos || s[open] != '{') return std::nullopt;
  int depth = 0;
  bool in_string = false, escaped = false;
  for (std::size_t i = open; i < s.size(); ++i) {
    const char c = s[i];
    if (in_string) {
      if (escaped) {
        escaped = false;
      } else if (c == '\\') {
        escaped = true;
      } else if (c == '"') {
        in_string = false;
      }
      continue;
    }
    if (c == '"') {
      in_string = true;
    } else if (c == '{') {
      ++depth;
    } else if (c == '}' && --depth == 0) {
      return s.substr(open, i - open + 1);
    }
  }
  return std::nullopt;
}

Action parse_call(std::string_view rest) {
  auto span = json_object_span(rest);
  if (!span) unparsable("ACTION is not followed by a JSON object");
  Json j = Json::parse(span->begin(), span->end(), nullptr, false);
  if (j.is_discarded() || !j.is_object()) unparsable("ACTION JSON does not parse");
  if (!j.contains("tool") || !j.at("tool").is_string() || j.at("tool").get<std::string>().empty()) {
    unparsable("ACTION JSON needs a \"tool\" string");
  }
  Json args = Json::object();
  if (j.contains("args") && !j.at("args").is_null()) {
    if (!j.at("args").is_object()) unparsable("ACTION \"args\" must be an object");
    args = j.at("args");
  }
  return Action::call(j.at("tool").get<std::string>(), std::move(args));
}

}  // namespace

ParsedReply parse_action(std::string_view out) {
  std::vector<MarkedLine> marks;
  std::size_t start = 0;
  while (start <= out.size()) {
    auto end = out.find('\n', start);
    if (end == std::string_view::npos) end = out.size();
    if (auto m = classify(out, start, end); m.marker != Marker::none) marks.push_back(m);
    if (end == out.size()) break;
    start = end + 1;
  }

  std::optional<std::size_t> chosen;
  for (std::size_t i = marks.size(); i-- > 0;) {
    if (marks[i].marker == Marker::action || marks[i].marker == Marker::final) {
      chosen = i;
      break;
    }
  }
  if (!chosen) unparsable("reply has neither ACTION nor FINAL");

  ParsedReply reply;
  for (std::size_t i = *chosen; i-- > 0;) {
    if (marks[i].marker != Marker::thought) continue;
    // Thought text runs up to the start of the next marker line.
    std::size_t stop = out.size();
    if (i + 1 < marks.size()) {
      stop = out.rfind('\n', marks[i + 1].offset);
      if (stop == std::string_view::npos || stop < marks[i].offset) stop = marks[i].offset;
    }
    reply.thought = std::string(trim(out.substr(marks[i].offset, stop - marks[i].offset)));
    break;
  }

  const auto& m = marks[*chosen];
  const auto rest = out.substr(m.offset);
  if (m.marker == Marker::final) {
    auto text = std::string(trim(rest));
    if (text.empty()) unparsable("FINAL text is empty");
    reply.action = Action::finish(std::move(text));
  } else {
    reply.action = parse_call(rest);
  }
  return reply;
}

}  // namespace dataclaw
