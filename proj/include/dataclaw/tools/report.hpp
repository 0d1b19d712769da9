#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "dataclaw/core/types.hpp"
#include "dataclaw/tools/dataset.hpp"

namespace dataclaw::tools {

struct ReportSection {
  std::string heading;
  std::string body;
  std::vector<std::string> artifacts;  // artifact ids, paths or file names
  std::optional<std::string> table;    // dataset handle
};

/// [{"heading", "body", "artifacts": [...], "table": "d2"}, ...]; BadSpec on
/// wrong shapes.
std::vector<ReportSection> parse_report_sections(const Json& j);

struct ResolvedArtifact {
  Artifact record;
  std::string bytes;
};

using ArtifactLookup = std::function<std::optional<ResolvedArtifact>(const std::string& ref)>;
using DatasetLookup = std::function<std::shared_ptr<const Dataset>(const std::string& handle)>;

inline constexpr std::size_t kReportTableRows = 50;

/// Single self-contained HTML document. SVG artifacts are inlined byte for
/// byte, tables show their first 50 rows. UnknownReference for any dangling
/// artifact or handle, checked before anything is rendered.
std::string render_report(const std::string& title, const std::vector<ReportSection>& sections,
                          const ArtifactLookup& artifacts, const DatasetLookup& datasets);

std::string escape_html(std::string_view s);

}  // namespace dataclaw::tools
