#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dataclaw/tools/dataset.hpp"

namespace dataclaw::tools {

/// Quantile of sorted data by linear interpolation between closest ranks:
/// h = (n - 1) p, result = x[floor h] + (h - floor h)(x[floor h + 1] - x[floor h]).
double quantile_linear(std::span<const double> sorted, double p);

struct Fences {
  double low = 0;
  double high = 0;
};

/// Q1 - 1.5 IQR and Q3 + 1.5 IQR over sorted, non-empty data.
Fences iqr_fences(std::span<const double> sorted);

inline bool is_outlier(double v, const Fences& f) { return v < f.low || v > f.high; }

// Non-null values of a numeric column, in row order.
std::vector<double> numeric_values(const Dataset& ds, std::size_t column);

/// Schema, row count and min/max/mean per numeric column (null when the
/// column has no values).
Json describe(const Dataset& ds);

struct NumericProfile {
  double min = 0;
  double max = 0;
  double mean = 0;
  double stddev = 0;  // population
  std::int64_t outlier_count = 0;
};

struct ColumnProfile {
  std::string name;
  DType dtype = DType::string;
  std::int64_t missing_count = 0;
  double missing_fraction = 0;
  std::int64_t distinct_count = 0;  // distinct non-null values
  std::optional<NumericProfile> numeric;
};

struct ProfileReport {
  std::int64_t row_count = 0;
  std::int64_t duplicate_row_count = 0;
  std::vector<ColumnProfile> columns;
};

ProfileReport profile(const Dataset& ds);
Json to_json(const ProfileReport& report);

}  // namespace dataclaw::tools
