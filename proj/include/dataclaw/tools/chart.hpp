#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "dataclaw/tools/dataset.hpp"
#include "dataclaw/tools/query.hpp"

namespace dataclaw::tools {

enum class ChartKind { bar, line, scatter, histogram };

struct ChartSpec {
  ChartKind kind = ChartKind::bar;
  std::string x;
  // Plain column name, or an aggregate over rows grouped by x (bar only).
  std::optional<std::string> y_column;
  std::optional<Aggregate> y_aggregate;
  std::string title;
  std::size_t bins = 10;
};

/// Reads {kind, x, y, title, bins}; y is a column name or {agg, col}.
ChartSpec parse_chart_spec(const Json& j);

/// Self-contained SVG 1.1, 800x600, fixed margins, axis ticks on 1/2/5 x 10^k
/// steps. Marks carry class="bar" | "line" | "point". Identical inputs give
/// identical bytes. BadSpec when the chart arguments do not fit the data.
std::string render_chart(const Dataset& ds, const ChartSpec& spec);

/// Smallest step in {1, 2, 5} x 10^k that is >= raw (raw > 0).
double nice_step(double raw);

struct AxisScale {
  double lo = 0;
  double hi = 1;
  double step = 1;
  std::vector<double> ticks;
};

/// Extends [min, max] outwards to multiples of a nice step (about 5 ticks).
AxisScale nice_scale(double min, double max);

std::string escape_xml(std::string_view s);

}  // namespace dataclaw::tools
