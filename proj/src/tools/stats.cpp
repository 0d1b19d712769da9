#include "dataclaw/tools/stats.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "dataclaw/core/error.hpp"

namespace dataclaw::tools {

double quantile_linear(std::span<const double> sorted, double p) {
  if (sorted.empty()) throw Error(ErrorCode::Precondition, "quantile of empty data");
  const double h = static_cast<double>(sorted.size() - 1) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  if (lo + 1 >= sorted.size()) return sorted.back();
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[lo + 1] - sorted[lo]);
}

Fences iqr_fences(std::span<const double> sorted) {
  const double q1 = quantile_linear(sorted, 0.25);
  const double q3 = quantile_linear(sorted, 0.75);
  const double iqr = q3 - q1;
  return {q1 - 1.5 * iqr, q3 + 1.5 * iqr};
}

std::vector<double> numeric_values(const Dataset& ds, std::size_t column) {
  std::vector<double> out;
  out.reserve(ds.rows.size());
  for (const auto& row : ds.rows) {
    if (auto v = as_number(row[column])) out.push_back(*v);
  }
  return out;
}

namespace {

Json native_extreme(const Dataset& ds, std::size_t col, bool want_max) {
  const Cell* best = nullptr;
  for (const auto& row : ds.rows) {
    const auto& c = row[col];
    if (is_null(c)) continue;
    if (!best || (want_max ? *as_number(c) > *as_number(*best) : *as_number(c) < *as_number(*best))) best = &c;
  }
  return best ? to_json(*best) : Json(nullptr);
}

}  // namespace

Json describe(const Dataset& ds) {
  Json out;
  out["handle"] = ds.handle;
  out["row_count"] = ds.rows.size();
  Json cols = Json::array();
  for (std::size_t c = 0; c < ds.columns.size(); ++c) {
    Json col;
    col["name"] = ds.columns[c].name;
    col["dtype"] = to_string(ds.columns[c].dtype);
    if (is_numeric(ds.columns[c].dtype)) {
      const auto values = numeric_values(ds, c);
      col["min"] = native_extreme(ds, c, false);
      col["max"] = native_extreme(ds, c, true);
      if (values.empty()) {
        col["mean"] = nullptr;
      } else {
        double sum = 0;
        for (double v : values) sum += v;
        col["mean"] = sum / static_cast<double>(values.size());
      }
    }
    cols.push_back(std::move(col));
  }
  out["columns"] = std::move(cols);
  return out;
}

ProfileReport profile(const Dataset& ds) {
  ProfileReport report;
  report.row_count = static_cast<std::int64_t>(ds.rows.size());
  std::set<Row> distinct_rows(ds.rows.begin(), ds.rows.end());
  report.duplicate_row_count = report.row_count - static_cast<std::int64_t>(distinct_rows.size());

  for (std::size_t c = 0; c < ds.columns.size(); ++c) {
    ColumnProfile col;
    col.name = ds.columns[c].name;
    col.dtype = ds.columns[c].dtype;
    std::set<Cell> distinct;
    for (const auto& row : ds.rows) {
      if (is_null(row[c])) {
        ++col.missing_count;
      } else {
        distinct.insert(row[c]);
      }
    }
    col.distinct_count = static_cast<std::int64_t>(distinct.size());
    col.missing_fraction =
        report.row_count == 0 ? 0.0 : static_cast<double>(col.missing_count) / static_cast<double>(report.row_count);

    if (is_numeric(col.dtype)) {
      auto values = numeric_values(ds, c);
      if (!values.empty()) {
        NumericProfile np;
        double sum = 0;
        for (double v : values) sum += v;
        const double n = static_cast<double>(values.size());
        np.mean = sum / n;
        double sq = 0;
        for (double v : values) sq += (v - np.mean) * (v - np.mean);
        np.stddev = std::sqrt(sq / n);
        std::sort(values.begin(), values.end());
        np.min = values.front();
        np.max = values.back();
        const auto fences = iqr_fences(values);
        np.outlier_count = std::count_if(values.begin(), values.end(), [&](double v) { return is_outlier(v, fences); });
        col.numeric = np;
      }
    }
    report.columns.push_back(std::move(col));
  }
  return report;
}

Json to_json(const ProfileReport& report) {
  Json out;
  out["row_count"] = report.row_count;
  out["duplicate_row_count"] = report.duplicate_row_count;
  Json cols = Json::array();
  for (const auto& c : report.columns) {
    Json col;
    col["name"] = c.name;
    col["dtype"] = to_string(c.dtype);
    col["missing_count"] = c.missing_count;
    col["missing_fraction"] = c.missing_fraction;
    col["distinct_count"] = c.distinct_count;
    if (c.numeric) {
      col["min"] = c.numeric->min;
      col["max"] = c.numeric->max;
      col["mean"] = c.numeric->mean;
      col["stddev"] = c.numeric->stddev;
      col["outlier_count"] = c.numeric->outlier_count;
    }
    cols.push_back(std::move(col));
  }
  out["columns"] = std::move(cols);
  return out;
}

}  // namespace dataclaw::tools
