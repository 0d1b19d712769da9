#include "dataclaw/tools/report.hpp"

#include <fmt/format.h>

#include "dataclaw/core/error.hpp"
#include "dataclaw/core/strings.hpp"

namespace dataclaw::tools {

namespace {

constexpr std::string_view kStyle =
    "body{font-family:sans-serif;max-width:960px;margin:2em auto;color:#111827}"
    "table{border-collapse:collapse;font-size:13px}"
    "th,td{border:1px solid #d1d5db;padding:4px 8px;text-align:left}"
    "th{background:#f3f4f6}"
    "figure{margin:1em 0}"
    "pre{background:#f9fafb;padding:8px;overflow-x:auto}";

std::string optional_string(const Json& item, const char* key) {
  if (!item.contains(key) || item.at(key).is_null()) return {};
  if (!item.at(key).is_string()) throw Error(ErrorCode::BadSpec, fmt::format("section '{}' must be a string", key));
  return item.at(key).get<std::string>();
}

void render_paragraphs(std::string& out, std::string_view body) {
  std::string para;
  auto flush = [&] {
    if (!para.empty()) out += "<p>" + escape_html(para) + "</p>\n";
    para.clear();
  };
  for (auto line : split_lines(body)) {
    if (trim(line).empty()) {
      flush();
      continue;
    }
    if (!para.empty()) para += '\n';
    para += line;
  }
  flush();
}

void render_table(std::string& out, const Dataset& ds) {
  out += "<table>\n<thead><tr>";
  for (const auto& c : ds.columns) out += "<th>" + escape_html(c.name) + "</th>";
  out += "</tr></thead>\n<tbody>\n";
  const auto shown = std::min(ds.rows.size(), kReportTableRows);
  for (std::size_t r = 0; r < shown; ++r) {
    out += "<tr>";
    for (const auto& cell : ds.rows[r]) out += "<td>" + escape_html(render(cell)) + "</td>";
    out += "</tr>\n";
  }
  out += "</tbody>\n</table>\n";
  if (shown < ds.rows.size()) {
    out += fmt::format("<p class=\"note\">Showing {} of {} rows.</p>\n", shown, ds.rows.size());
  }
}

void render_artifact(std::string& out, const ResolvedArtifact& a) {
  out += "<figure>\n";
  if (a.record.media_type == "image/svg+xml") {
    out += a.bytes;
    if (!a.bytes.empty() && a.bytes.back() != '\n') out += '\n';
  } else if (a.record.media_type.rfind("text/", 0) == 0 || a.record.media_type == "application/json") {
    out += "<pre>" + escape_html(a.bytes) + "</pre>\n";
  }
  out += "<figcaption>" + escape_html(a.record.relative_path) + "</figcaption>\n</figure>\n";
}

}  // namespace

std::string escape_html(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char ch : s) {
    switch (ch) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += ch;
    }
  }
  return out;
}

std::vector<ReportSection> parse_report_sections(const Json& j) {
  std::vector<ReportSection> out;
  if (j.is_null()) return out;
  if (!j.is_array()) throw Error(ErrorCode::BadSpec, "sections must be an array");
  for (const auto& item : j) {
    if (!item.is_object()) throw Error(ErrorCode::BadSpec, "each section must be an object");
    ReportSection s;
    s.heading = optional_string(item, "heading");
    s.body = optional_string(item, "body");
    if (item.contains("artifacts") && !item.at("artifacts").is_null()) {
      const auto& refs = item.at("artifacts");
      if (refs.is_string()) {
        s.artifacts.push_back(refs.get<std::string>());
      } else if (refs.is_array()) {
        for (const auto& r : refs) {
          if (!r.is_string()) throw Error(ErrorCode::BadSpec, "artifact references must be strings");
          s.artifacts.push_back(r.get<std::string>());
        }
      } else {
        throw Error(ErrorCode::BadSpec, "artifacts must be a list of references");
      }
    }
    if (auto t = optional_string(item, "table"); !t.empty()) s.table = t;
    out.push_back(std::move(s));
  }
  return out;
}

std::string render_report(const std::string& title, const std::vector<ReportSection>& sections,
                          const ArtifactLookup& artifacts, const DatasetLookup& datasets) {
  std::vector<std::vector<ResolvedArtifact>> resolved(sections.size());
  std::vector<std::shared_ptr<const Dataset>> tables(sections.size());
  std::vector<std::string> missing;
  for (std::size_t i = 0; i < sections.size(); ++i) {
    for (const auto& ref : sections[i].artifacts) {
      auto a = artifacts ? artifacts(ref) : std::nullopt;
      if (!a) {
        missing.push_back("artifact " + ref);
      } else {
        resolved[i].push_back(std::move(*a));
      }
    }
    if (sections[i].table) {
      std::shared_ptr<const Dataset> ds;
      try {
        if (datasets) ds = datasets(*sections[i].table);
      } catch (const Error&) {
      }
      if (!ds) {
        missing.push_back("table " + *sections[i].table);
      } else {
        tables[i] = std::move(ds);
      }
    }
  }
  if (!missing.empty()) {
    std::string list;
    for (const auto& m : missing) list += (list.empty() ? "" : ", ") + m;
    throw Error(ErrorCode::UnknownReference, "unknown reference: " + list);
  }

  std::string out = "<!DOCTYPE html>\n<html lang=\"en\">\n<head>\n<meta charset=\"utf-8\">\n";
  out += "<title>" + escape_html(title) + "</title>\n";
  out += fmt::format("<style>{}</style>\n</head>\n<body>\n", kStyle);
  out += "<h1>" + escape_html(title) + "</h1>\n";
  for (std::size_t i = 0; i < sections.size(); ++i) {
    out += "<section>\n";
    if (!sections[i].heading.empty()) out += "<h2>" + escape_html(sections[i].heading) + "</h2>\n";
    render_paragraphs(out, sections[i].body);
    for (const auto& a : resolved[i]) render_artifact(out, a);
    if (tables[i]) render_table(out, *tables[i]);
    out += "</section>\n";
  }
  out += "</body>\n</html>\n";
  return out;
}

}  // namespace dataclaw::tools
