#pragma once

#include <string>
#include <variant>
#include <vector>

#include "dataclaw/tools/dataset.hpp"

namespace dataclaw::tools {

struct DropDuplicates {};

struct FillMissing {
  std::string column;
  bool use_mean = true;
  Json constant;  // used when use_mean is false
};

struct DropOutliers {
  std::string column;
};

using CleanOp = std::variant<DropDuplicates, FillMissing, DropOutliers>;

/// [{"op": "drop_duplicates"},
///  {"op": "fill_missing", "col": c, "strategy": "mean" | "constant", "value": v},
///  {"op": "drop_outliers", "col": c}]
std::vector<CleanOp> parse_clean_ops(const Json& j);

/// Applies ops in order to a copy. drop_duplicates keeps first occurrences;
/// drop_outliers uses the IQR fences from profiling (nulls are kept). A mean
/// fill keeps an integer column integral when the mean is whole, otherwise
/// the column becomes float. BadOp on invalid ops.
Dataset apply_clean(const Dataset& input, const std::vector<CleanOp>& ops);

}  // namespace dataclaw::tools
