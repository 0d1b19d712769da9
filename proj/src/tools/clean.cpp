#include "dataclaw/tools/clean.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include <fmt/format.h>

#include "dataclaw/core/error.hpp"
#include "dataclaw/tools/stats.hpp"

namespace dataclaw::tools {

namespace {

[[noreturn]] void bad_op(const std::string& message) { throw Error(ErrorCode::BadOp, message); }

std::size_t column_of(const Dataset& ds, const std::string& name) {
  if (auto i = ds.find_column(name)) return *i;
  bad_op(fmt::format("unknown column '{}'", name));
}

std::string col_arg(const Json& op, const char* name) {
  if (!op.contains("col") || !op.at("col").is_string()) bad_op(fmt::format("{} needs a 'col' string", name));
  return op.at("col").get<std::string>();
}

Cell constant_for(const Json& v, DType t, const std::string& col) {
  switch (t) {
    case DType::integer:
      if (v.is_number_integer()) return v.get<std::int64_t>();
      break;
    case DType::floating:
      if (v.is_number()) return v.get<double>();
      break;
    case DType::string:
      if (v.is_string()) return v.get<std::string>();
      break;
    case DType::boolean:
      if (v.is_boolean()) return v.get<bool>();
      break;
  }
  bad_op(fmt::format("fill value {} does not fit {} column '{}'", v.dump(), to_string(t), col));
}

void fill_missing(Dataset& ds, const FillMissing& op) {
  const auto c = column_of(ds, op.column);
  auto& column = ds.columns[c];
  Cell fill;
  if (op.use_mean) {
    if (!is_numeric(column.dtype)) bad_op(fmt::format("mean fill needs a numeric column, '{}' is {}", op.column, to_string(column.dtype)));
    const auto values = numeric_values(ds, c);
    if (values.empty()) bad_op(fmt::format("column '{}' has no values to average", op.column));
    double sum = 0;
    for (double v : values) sum += v;
    const double mean = sum / static_cast<double>(values.size());
    if (column.dtype == DType::integer && std::floor(mean) == mean) {
      fill = static_cast<std::int64_t>(mean);
    } else {
      if (column.dtype == DType::integer) {
        column.dtype = DType::floating;
        for (auto& row : ds.rows) {
          if (auto i = std::get_if<std::int64_t>(&row[c])) row[c] = static_cast<double>(*i);
        }
      }
      fill = mean;
    }
  } else {
    fill = constant_for(op.constant, column.dtype, op.column);
  }
  for (auto& row : ds.rows) {
    if (is_null(row[c])) row[c] = fill;
  }
}

void drop_outliers(Dataset& ds, const DropOutliers& op) {
  const auto c = column_of(ds, op.column);
  if (!is_numeric(ds.columns[c].dtype)) bad_op(fmt::format("drop_outliers needs a numeric column, '{}' is {}", op.column, to_string(ds.columns[c].dtype)));
  auto values = numeric_values(ds, c);
  if (values.empty()) return;
  std::sort(values.begin(), values.end());
  const auto fences = iqr_fences(values);
  std::erase_if(ds.rows, [&](const Row& row) {
    auto v = as_number(row[c]);
    return v && is_outlier(*v, fences);
  });
}

void drop_duplicates(Dataset& ds) {
  std::set<Row> seen;
  std::erase_if(ds.rows, [&](const Row& row) { return !seen.insert(row).second; });
}

}  // namespace

std::vector<CleanOp> parse_clean_ops(const Json& j) {
  if (!j.is_array()) bad_op("ops must be a list");
  std::vector<CleanOp> ops;
  for (const auto& op : j) {
    if (!op.is_object() || !op.contains("op") || !op.at("op").is_string()) bad_op("each op needs an 'op' name");
    const auto name = op.at("op").get<std::string>();
    if (name == "drop_duplicates") {
      ops.emplace_back(DropDuplicates{});
    } else if (name == "fill_missing") {
      FillMissing f;
      f.column = col_arg(op, "fill_missing");
      const auto strategy = op.value("strategy", std::string("mean"));
      if (strategy == "mean") {
        f.use_mean = true;
      } else if (strategy == "constant") {
        if (!op.contains("value") || op.at("value").is_null()) bad_op("constant fill needs a 'value'");
        f.use_mean = false;
        f.constant = op.at("value");
      } else {
        bad_op(fmt::format("unknown fill strategy '{}'", strategy));
      }
      ops.emplace_back(std::move(f));
    } else if (name == "drop_outliers") {
      ops.emplace_back(DropOutliers{col_arg(op, "drop_outliers")});
    } else {
      bad_op(fmt::format("unknown clean op '{}'", name));
    }
  }
  return ops;
}

Dataset apply_clean(const Dataset& input, const std::vector<CleanOp>& ops) {
  Dataset ds = input;
  for (const auto& op : ops) {
    std::visit(
        [&](const auto& o) {
          using T = std::decay_t<decltype(o)>;
          if constexpr (std::is_same_v<T, DropDuplicates>) {
            drop_duplicates(ds);
          } else if constexpr (std::is_same_v<T, FillMissing>) {
            fill_missing(ds, o);
          } else {
            drop_outliers(ds, o);
          }
        },
        op);
  }
  return ds;
}

}  // namespace dataclaw::tools
