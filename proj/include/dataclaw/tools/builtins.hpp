#pragma once

#include "dataclaw/tools/dataset.hpp"
#include "dataclaw/tools/registry.hpp"

namespace dataclaw::tools {

// Rows echoed back in a data_query observation.
inline constexpr std::size_t kQueryPreviewRows = 20;

/// data_load, data_describe, data_profile, data_query, data_clean,
/// chart_render, report_generate, form_fill, memory_search.
void register_builtin_tools(ToolRegistry& registry);

// Table summary used in observations: handle, row_count, columns, and the
// first `preview_rows` rows as arrays.
Json table_summary(const Dataset& ds, std::size_t preview_rows);

}  // namespace dataclaw::tools
