#include "dataclaw/tools/query.hpp"

#include <algorithm>
#include <map>
#include <set>

#include <fmt/format.h>

#include "dataclaw/core/error.hpp"
#include "dataclaw/tools/expr.hpp"

namespace dataclaw::tools {

namespace {

[[noreturn]] void bad_query(const std::string& message) { throw Error(ErrorCode::BadQuery, message); }

AggFn parse_agg(const std::string& s) {
  if (s == "count") return AggFn::count;
  if (s == "sum") return AggFn::sum;
  if (s == "mean") return AggFn::mean;
  if (s == "min") return AggFn::min;
  if (s == "max") return AggFn::max;
  bad_query(fmt::format("unknown aggregate '{}'", s));
}

CmpOp parse_op(const std::string& s) {
  static const std::map<std::string, CmpOp> ops{{"eq", CmpOp::eq}, {"ne", CmpOp::ne}, {"lt", CmpOp::lt},
                                                {"le", CmpOp::le}, {"gt", CmpOp::gt}, {"ge", CmpOp::ge},
                                                {"contains", CmpOp::contains}};
  if (auto it = ops.find(s); it != ops.end()) return it->second;
  bad_query(fmt::format("unknown operator '{}'", s));
}

const Json& require(const Json& obj, const char* key, const char* where) {
  if (!obj.is_object() || !obj.contains(key)) bad_query(fmt::format("{} needs '{}'", where, key));
  return obj.at(key);
}

std::string require_string(const Json& obj, const char* key, const char* where) {
  const auto& v = require(obj, key, where);
  if (!v.is_string()) bad_query(fmt::format("{}.{} must be a string", where, key));
  return v.get<std::string>();
}

void only_keys(const Json& obj, std::initializer_list<std::string_view> allowed, const char* where) {
  for (const auto& [k, _] : obj.items()) {
    if (std::find(allowed.begin(), allowed.end(), k) == allowed.end()) {
      bad_query(fmt::format("unexpected key '{}' in {}", k, where));
    }
  }
}

std::vector<std::string> string_list(const Json& v, const char* where) {
  if (!v.is_array()) bad_query(fmt::format("{} must be a list of column names", where));
  std::vector<std::string> out;
  for (const auto& item : v) {
    if (!item.is_string()) bad_query(fmt::format("{} must be a list of column names", where));
    out.push_back(item.get<std::string>());
  }
  return out;
}

std::string default_alias(const Aggregate& a) {
  if (a.column == "*") return std::string(to_string(a.fn));
  return fmt::format("{}_{}", to_string(a.fn), a.column);
}

double num(const Cell& c) { return *as_number(c); }

// One bound where-clause, ready to evaluate against rows.
struct BoundPredicate {
  std::size_t column;
  CmpOp op;
  Cell value;  // null means an is-null / is-not-null test
};

BoundPredicate bind_predicate(const Predicate& p, const std::vector<Column>& schema) {
  std::optional<std::size_t> idx;
  for (std::size_t i = 0; i < schema.size(); ++i) {
    if (schema[i].name == p.column) idx = i;
  }
  if (!idx) bad_query(fmt::format("unknown column '{}' in where", p.column));
  const auto dtype = schema[*idx].dtype;
  BoundPredicate b{*idx, p.op, std::monostate{}};
  const auto& v = p.value;
  if (v.is_null()) {
    if (p.op != CmpOp::eq && p.op != CmpOp::ne) {
      bad_query(fmt::format("column '{}': only eq/ne may compare against null", p.column));
    }
    return b;
  }
  if (p.op == CmpOp::contains) {
    if (dtype != DType::string) bad_query(fmt::format("contains needs a string column, '{}' is {}", p.column, to_string(dtype)));
    if (!v.is_string()) bad_query(fmt::format("contains on '{}' needs a string value", p.column));
    b.value = v.get<std::string>();
    return b;
  }
  switch (dtype) {
    case DType::integer:
    case DType::floating:
      if (!v.is_number()) bad_query(fmt::format("column '{}' is numeric; compare it with a number", p.column));
      b.value = v.get<double>();
      break;
    case DType::string:
      if (!v.is_string()) bad_query(fmt::format("column '{}' is a string column; compare it with a string", p.column));
      b.value = v.get<std::string>();
      break;
    case DType::boolean:
      if (!v.is_boolean()) bad_query(fmt::format("column '{}' is boolean; compare it with true/false", p.column));
      if (p.op != CmpOp::eq && p.op != CmpOp::ne) bad_query(fmt::format("column '{}' is boolean; use eq or ne", p.column));
      b.value = v.get<bool>();
      break;
  }
  return b;
}

bool matches(const BoundPredicate& p, const Row& row) {
  const auto& cell = row[p.column];
  if (is_null(p.value)) return p.op == CmpOp::eq ? is_null(cell) : !is_null(cell);
  if (is_null(cell)) return false;
  if (p.op == CmpOp::contains) {
    return std::get<std::string>(cell).find(std::get<std::string>(p.value)) != std::string::npos;
  }
  int cmp = 0;
  if (auto d = std::get_if<double>(&p.value)) {
    const double x = num(cell);
    cmp = x < *d ? -1 : (x > *d ? 1 : 0);
  } else {
    cmp = compare_cells(cell, p.value);
  }
  switch (p.op) {
    case CmpOp::eq: return cmp == 0;
    case CmpOp::ne: return cmp != 0;
    case CmpOp::lt: return cmp < 0;
    case CmpOp::le: return cmp <= 0;
    case CmpOp::gt: return cmp > 0;
    case CmpOp::ge: return cmp >= 0;
    case CmpOp::contains: return false;
  }
  return false;
}

DType aggregate_type(const Aggregate& a, const std::vector<Column>& schema) {
  if (a.column == "*") {
    if (a.fn != AggFn::count) bad_query(fmt::format("'*' is only valid with count, not {}", to_string(a.fn)));
    return DType::integer;
  }
  std::optional<DType> t;
  for (const auto& c : schema) {
    if (c.name == a.column) t = c.dtype;
  }
  if (!t) bad_query(fmt::format("unknown column '{}' in aggregate", a.column));
  switch (a.fn) {
    case AggFn::count: return DType::integer;
    case AggFn::sum:
      if (!is_numeric(*t)) bad_query(fmt::format("sum needs a numeric column, '{}' is {}", a.column, to_string(*t)));
      return *t;
    case AggFn::mean:
      if (!is_numeric(*t)) bad_query(fmt::format("mean needs a numeric column, '{}' is {}", a.column, to_string(*t)));
      return DType::floating;
    case AggFn::min:
    case AggFn::max:
      if (*t == DType::boolean) bad_query(fmt::format("{} is not defined for boolean column '{}'", to_string(a.fn), a.column));
      return *t;
  }
  return *t;
}

Cell aggregate(const Aggregate& a, std::size_t col, DType col_type, const std::vector<const Row*>& rows) {
  if (a.column == "*") return static_cast<std::int64_t>(rows.size());
  std::vector<const Cell*> values;
  for (const auto* r : rows) {
    if (!is_null((*r)[col])) values.push_back(&(*r)[col]);
  }
  switch (a.fn) {
    case AggFn::count: return static_cast<std::int64_t>(values.size());
    case AggFn::sum: {
      if (values.empty()) return std::monostate{};
      if (col_type == DType::integer) {
        std::int64_t s = 0;
        for (const auto* v : values) s += std::get<std::int64_t>(*v);
        return s;
      }
      double s = 0;
      for (const auto* v : values) s += num(*v);
      return s;
    }
    case AggFn::mean: {
      if (values.empty()) return std::monostate{};
      double s = 0;
      for (const auto* v : values) s += num(*v);
      return s / static_cast<double>(values.size());
    }
    case AggFn::min:
    case AggFn::max: {
      if (values.empty()) return std::monostate{};
      const Cell* best = values.front();
      for (const auto* v : values) {
        const int c = compare_cells(*v, *best);
        if (a.fn == AggFn::min ? c < 0 : c > 0) best = v;
      }
      return *best;
    }
  }
  return std::monostate{};
}

}  // namespace

std::string_view to_string(AggFn fn) {
  switch (fn) {
    case AggFn::count: return "count";
    case AggFn::sum: return "sum";
    case AggFn::mean: return "mean";
    case AggFn::min: return "min";
    case AggFn::max: return "max";
  }
  return "count";
}

int compare_cells(const Cell& a, const Cell& b) {
  const bool an = is_null(a), bn = is_null(b);
  if (an || bn) return an == bn ? 0 : (an ? -1 : 1);
  if (auto x = as_number(a)) {
    if (auto y = as_number(b)) return *x < *y ? -1 : (*x > *y ? 1 : 0);
  }
  if (a.index() != b.index()) return a.index() < b.index() ? -1 : 1;
  if (auto s = std::get_if<std::string>(&a)) {
    const int c = s->compare(std::get<std::string>(b));
    return c < 0 ? -1 : (c > 0 ? 1 : 0);
  }
  if (auto x = std::get_if<bool>(&a)) {
    const bool y = std::get<bool>(b);
    return *x == y ? 0 : (*x ? 1 : -1);
  }
  return 0;
}

bool QuerySpec::aggregated() const {
  if (!group_by.empty()) return true;
  return std::any_of(select.begin(), select.end(),
                     [](const SelectItem& s) { return std::holds_alternative<Aggregate>(s); });
}

QuerySpec parse_query(const Json& j) {
  if (!j.is_object()) bad_query("query must be a JSON object");
  if (j.contains("join")) bad_query("joins are not supported");
  only_keys(j, {"select", "where", "derive", "group_by", "order_by", "limit"}, "query");
  QuerySpec q;
  if (j.contains("select")) {
    const auto& sel = j.at("select");
    if (!sel.is_array()) bad_query("select must be a list");
    for (const auto& item : sel) {
      if (item.is_string()) {
        q.select.emplace_back(item.get<std::string>());
      } else if (item.is_object()) {
        only_keys(item, {"agg", "col", "as"}, "select aggregate");
        Aggregate a;
        a.fn = parse_agg(require_string(item, "agg", "select aggregate"));
        a.column = require_string(item, "col", "select aggregate");
        a.alias = item.contains("as") ? require_string(item, "as", "select aggregate") : default_alias(a);
        q.select.emplace_back(std::move(a));
      } else {
        bad_query("select items must be column names or {agg, col, as} objects");
      }
    }
  }
  if (j.contains("where")) {
    const auto& w = j.at("where");
    if (!w.is_array()) bad_query("where must be a list of predicates");
    for (const auto& p : w) {
      only_keys(p, {"col", "op", "value"}, "where predicate");
      Predicate pred;
      pred.column = require_string(p, "col", "where predicate");
      pred.op = parse_op(require_string(p, "op", "where predicate"));
      pred.value = require(p, "value", "where predicate");
      if (pred.value.is_structured()) bad_query("where values must be scalars");
      q.where.push_back(std::move(pred));
    }
  }
  if (j.contains("derive")) {
    const auto& d = j.at("derive");
    if (!d.is_array()) bad_query("derive must be a list");
    for (const auto& item : d) {
      only_keys(item, {"as", "expr"}, "derive");
      q.derive.push_back({require_string(item, "as", "derive"), require_string(item, "expr", "derive")});
    }
  }
  if (j.contains("group_by")) q.group_by = string_list(j.at("group_by"), "group_by");
  if (j.contains("order_by")) {
    const auto& o = j.at("order_by");
    if (!o.is_array()) bad_query("order_by must be a list");
    for (const auto& item : o) {
      if (item.is_string()) {
        q.order_by.push_back({item.get<std::string>(), false});
        continue;
      }
      only_keys(item, {"col", "descending"}, "order_by");
      OrderKey k;
      k.column = require_string(item, "col", "order_by");
      if (item.contains("descending")) {
        if (!item.at("descending").is_boolean()) bad_query("order_by.descending must be true or false");
        k.descending = item.at("descending").get<bool>();
      }
      q.order_by.push_back(std::move(k));
    }
  }
  if (j.contains("limit")) {
    const auto& l = j.at("limit");
    if (!l.is_number_integer() || l.get<std::int64_t>() <= 0) bad_query("limit must be a positive integer");
    q.limit = l.get<std::size_t>();
  }
  return q;
}

Dataset run_query(const Dataset& input, const QuerySpec& q) {
  // derive
  std::vector<Column> schema = input.columns;
  std::vector<Expr> exprs;
  for (const auto& d : q.derive) {
    if (d.name.empty()) bad_query("derived column needs a name");
    for (const auto& c : schema) {
      if (c.name == d.name) bad_query(fmt::format("derived column '{}' already exists", d.name));
    }
    auto e = Expr::parse(d.expr);
    e.bind(schema);
    exprs.push_back(std::move(e));
    schema.push_back({d.name, DType::floating});
  }

  std::vector<BoundPredicate> preds;
  for (const auto& p : q.where) preds.push_back(bind_predicate(p, schema));

  // Validate the aggregate stage against the post-derive schema before any work.
  const bool agg_mode = q.aggregated();
  std::vector<std::size_t> group_idx;
  std::vector<Aggregate> aggs;
  std::vector<Column> stage_schema;
  if (agg_mode) {
    for (const auto& g : q.group_by) {
      bool found = false;
      for (std::size_t i = 0; i < schema.size(); ++i) {
        if (schema[i].name == g) {
          group_idx.push_back(i);
          stage_schema.push_back(schema[i]);
          found = true;
        }
      }
      if (!found) bad_query(fmt::format("unknown column '{}' in group_by", g));
    }
    for (const auto& s : q.select) {
      if (const auto* name = std::get_if<std::string>(&s)) {
        if (std::find(q.group_by.begin(), q.group_by.end(), *name) == q.group_by.end()) {
          bad_query(q.group_by.empty()
                        ? fmt::format("column '{}' cannot be selected next to aggregates without group_by", *name)
                        : fmt::format("column '{}' must appear in group_by to be selected", *name));
        }
      } else {
        const auto& a = std::get<Aggregate>(s);
        stage_schema.push_back({a.alias, aggregate_type(a, schema)});
        aggs.push_back(a);
      }
    }
  } else {
    stage_schema = schema;
  }
  {
    std::set<std::string> names;
    for (const auto& c : stage_schema) {
      if (!names.insert(c.name).second) bad_query(fmt::format("duplicate output column '{}'", c.name));
    }
  }
  auto stage_index = [&](const std::string& name, const char* where) {
    for (std::size_t i = 0; i < stage_schema.size(); ++i) {
      if (stage_schema[i].name == name) return i;
    }
    bad_query(fmt::format("unknown column '{}' in {}", name, where));
  };
  std::vector<std::pair<std::size_t, bool>> order_idx;
  for (const auto& k : q.order_by) order_idx.emplace_back(stage_index(k.column, "order_by"), k.descending);
  std::vector<std::size_t> projection;
  if (q.select.empty()) {
    for (std::size_t i = 0; i < stage_schema.size(); ++i) projection.push_back(i);
  } else {
    std::set<std::string> seen;
    for (const auto& s : q.select) {
      const auto name = std::holds_alternative<std::string>(s) ? std::get<std::string>(s) : std::get<Aggregate>(s).alias;
      if (!seen.insert(name).second) bad_query(fmt::format("column '{}' selected twice", name));
      projection.push_back(stage_index(name, "select"));
    }
  }

  // derive + where
  std::vector<Row> rows;
  for (const auto& src : input.rows) {
    Row row = src;
    for (const auto& e : exprs) {
      auto v = e.eval(row);
      row.push_back(v ? Cell(*v) : Cell(std::monostate{}));
    }
    bool keep = true;
    for (const auto& p : preds) {
      if (!matches(p, row)) {
        keep = false;
        break;
      }
    }
    if (keep) rows.push_back(std::move(row));
  }

  // group_by / aggregate
  if (agg_mode) {
    std::map<Row, std::size_t> group_of;
    std::vector<Row> keys;
    std::vector<std::vector<const Row*>> members;
    if (group_idx.empty()) {
      group_of.emplace(Row{}, 0);
      keys.emplace_back();
      members.emplace_back();
    }
    for (const auto& row : rows) {
      Row key;
      for (auto gi : group_idx) key.push_back(row[gi]);
      auto [it, inserted] = group_of.emplace(key, keys.size());
      if (inserted) {
        keys.push_back(key);
        members.emplace_back();
      }
      members[it->second].push_back(&row);
    }
    std::vector<Row> out;
    out.reserve(keys.size());
    for (std::size_t g = 0; g < keys.size(); ++g) {
      Row r = keys[g];
      for (const auto& a : aggs) {
        std::size_t col = 0;
        DType t = DType::integer;
        if (a.column != "*") {
          for (std::size_t i = 0; i < schema.size(); ++i) {
            if (schema[i].name == a.column) {
              col = i;
              t = schema[i].dtype;
            }
          }
        }
        r.push_back(aggregate(a, col, t, members[g]));
      }
      out.push_back(std::move(r));
    }
    rows = std::move(out);
  }

  // order_by
  if (!order_idx.empty()) {
    std::stable_sort(rows.begin(), rows.end(), [&](const Row& a, const Row& b) {
      for (const auto& [idx, desc] : order_idx) {
        const int c = compare_cells(a[idx], b[idx]);
        if (c != 0) return desc ? c > 0 : c < 0;
      }
      return false;
    });
  }

  // limit
  if (q.limit && rows.size() > *q.limit) rows.resize(*q.limit);

  // select projection
  Dataset result;
  result.source_path = input.source_path;
  for (auto i : projection) result.columns.push_back(stage_schema[i]);
  result.rows.reserve(rows.size());
  for (auto& row : rows) {
    Row projected;
    projected.reserve(projection.size());
    for (auto i : projection) projected.push_back(std::move(row[i]));
    result.rows.push_back(std::move(projected));
  }
  return result;
}

}  // namespace dataclaw::tools
