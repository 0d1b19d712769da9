#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "dataclaw/tools/dataset.hpp"

namespace dataclaw::tools {

enum class AggFn { count, sum, mean, min, max };

struct Aggregate {
  AggFn fn = AggFn::count;
  std::string column;  // "*" counts rows (count only)
  std::string alias;
};

enum class CmpOp { eq, ne, lt, le, gt, ge, contains };

struct Predicate {
  std::string column;
  CmpOp op = CmpOp::eq;
  Json value;
};

struct Derivation {
  std::string name;
  std::string expr;
};

struct OrderKey {
  std::string column;
  bool descending = false;
};

using SelectItem = std::variant<std::string, Aggregate>;

/// Declarative query. Stages run in a fixed order:
/// derive -> where (AND) -> group_by/aggregate -> order_by (stable) -> limit
/// -> select projection.
struct QuerySpec {
  std::vector<SelectItem> select;
  std::vector<Predicate> where;
  std::vector<Derivation> derive;
  std::vector<std::string> group_by;
  std::vector<OrderKey> order_by;
  std::optional<std::size_t> limit;

  bool aggregated() const;
};

/// BadQuery on unknown keys (including "join"), wrong shapes, bad operators.
QuerySpec parse_query(const Json& j);

/// BadQuery naming the offending column when the query does not fit the
/// schema. The input is never modified.
Dataset run_query(const Dataset& input, const QuerySpec& query);

// Total order used by order_by: null first, then by value.
int compare_cells(const Cell& a, const Cell& b);

std::string_view to_string(AggFn fn);

}  // namespace dataclaw::tools
