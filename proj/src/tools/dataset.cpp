#include "dataclaw/tools/dataset.hpp"

#include <charconv>
#include <cmath>
#include <filesystem>

#include <fmt/format.h>

#include "dataclaw/core/error.hpp"
#include "dataclaw/core/sandbox.hpp"
#include "dataclaw/core/strings.hpp"

namespace dataclaw::tools {

namespace fs = std::filesystem;

std::string_view to_string(DType t) {
  switch (t) {
    case DType::integer: return "integer";
    case DType::floating: return "float";
    case DType::string: return "string";
    case DType::boolean: return "boolean";
  }
  return "string";
}

std::optional<double> as_number(const Cell& c) {
  if (auto i = std::get_if<std::int64_t>(&c)) return static_cast<double>(*i);
  if (auto d = std::get_if<double>(&c)) return *d;
  return std::nullopt;
}

Json to_json(const Cell& c) {
  return std::visit(
      [](const auto& v) -> Json {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, std::monostate>) {
          return nullptr;
        } else {
          return v;
        }
      },
      c);
}

std::string render(const Cell& c) {
  return std::visit(
      [](const auto& v) -> std::string {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, std::monostate>) {
          return {};
        } else if constexpr (std::is_same_v<T, std::int64_t>) {
          return std::to_string(v);
        } else if constexpr (std::is_same_v<T, double>) {
          return format_number(v);
        } else if constexpr (std::is_same_v<T, bool>) {
          return v ? "true" : "false";
        } else {
          return v;
        }
      },
      c);
}

std::optional<std::size_t> Dataset::find_column(std::string_view name) const {
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (columns[i].name == name) return i;
  }
  return std::nullopt;
}

std::size_t Dataset::column_index(std::string_view name) const {
  if (auto i = find_column(name)) return *i;
  throw Error(ErrorCode::BadQuery, fmt::format("unknown column '{}'", name));
}

namespace {

struct Record {
  std::vector<std::string> fields;
  int line = 0;
};

std::vector<Record> split_records(std::string_view text, char delim) {
  if (text.rfind("\xEF\xBB\xBF", 0) == 0) text.remove_prefix(3);
  std::vector<Record> records;
  Record current;
  current.line = 1;
  std::string field;
  bool in_quotes = false;
  bool field_started = false;
  int line = 1;

  auto end_field = [&] {
    current.fields.push_back(std::move(field));
    field.clear();
    field_started = false;
  };
  auto end_record = [&] {
    end_field();
    const bool blank = current.fields.size() == 1 && current.fields[0].empty();
    if (!blank) records.push_back(std::move(current));
    current = Record{};
    current.line = line;
  };

  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        if (c == '\n') ++line;
        field += c;
      }
      continue;
    }
    if (c == '"' && !field_started && field.empty()) {
      in_quotes = true;
      field_started = true;
    } else if (c == delim) {
      end_field();
    } else if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') {
      // handled by the following '\n'
    } else if (c == '\n') {
      ++line;
      end_record();
    } else {
      field += c;
      field_started = true;
    }
  }
  if (in_quotes) throw Error(ErrorCode::ParseError, fmt::format("line {}: unterminated quoted field", current.line));
  if (!field.empty() || field_started || !current.fields.empty()) end_record();
  return records;
}

bool parse_int(std::string_view s, std::int64_t& out) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  if (s.empty()) return false;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc{} && ptr == s.data() + s.size();
}

bool parse_float(std::string_view s, double& out) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  if (s.empty()) return false;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc{} && ptr == s.data() + s.size() && std::isfinite(out);
}

bool parse_bool(std::string_view s, bool& out) {
  const auto lower = ascii_lower(trim(s));
  if (lower == "true") {
    out = true;
    return true;
  }
  if (lower == "false") {
    out = false;
    return true;
  }
  return false;
}

DType infer(const std::vector<Record>& records, std::size_t col) {
  bool all_int = true, all_float = true, all_bool = true;
  for (std::size_t r = 1; r < records.size(); ++r) {
    const auto& v = records[r].fields[col];
    if (v.empty()) continue;
    std::int64_t i;
    double d;
    bool b;
    if (all_int && !parse_int(v, i)) all_int = false;
    if (all_float && !parse_float(v, d)) all_float = false;
    if (all_bool && !parse_bool(v, b)) all_bool = false;
    if (!all_int && !all_float && !all_bool) break;
  }
  if (all_int) return DType::integer;
  if (all_float) return DType::floating;
  if (all_bool) return DType::boolean;
  return DType::string;
}

Cell convert(const std::string& raw, DType t) {
  if (raw.empty()) return std::monostate{};
  switch (t) {
    case DType::integer: {
      std::int64_t i = 0;
      parse_int(raw, i);
      return i;
    }
    case DType::floating: {
      double d = 0;
      parse_float(raw, d);
      return d;
    }
    case DType::boolean: {
      bool b = false;
      parse_bool(raw, b);
      return b;
    }
    case DType::string: return raw;
  }
  return raw;
}

}  // namespace

Dataset parse_delimited(std::string_view text, char delimiter) {
  const auto records = split_records(text, delimiter);
  if (records.empty()) throw Error(ErrorCode::ParseError, "no header row");

  Dataset ds;
  const auto& header = records.front();
  for (const auto& name : header.fields) {
    std::string n(trim(name));
    if (n.empty()) throw Error(ErrorCode::ParseError, fmt::format("line {}: empty column name", header.line));
    if (ds.find_column(n)) {
      throw Error(ErrorCode::ParseError, fmt::format("line {}: duplicate column '{}'", header.line, n));
    }
    ds.columns.push_back({std::move(n), DType::string});
  }
  const auto width = ds.columns.size();
  for (std::size_t r = 1; r < records.size(); ++r) {
    if (records[r].fields.size() != width) {
      throw Error(ErrorCode::ParseError, fmt::format("line {}: expected {} cells, found {}", records[r].line,
                                                     width, records[r].fields.size()));
    }
  }
  for (std::size_t c = 0; c < width; ++c) ds.columns[c].dtype = infer(records, c);
  ds.rows.reserve(records.size() - 1);
  for (std::size_t r = 1; r < records.size(); ++r) {
    Row row;
    row.reserve(width);
    for (std::size_t c = 0; c < width; ++c) row.push_back(convert(records[r].fields[c], ds.columns[c].dtype));
    ds.rows.push_back(std::move(row));
  }
  return ds;
}

Dataset load_table(const std::string& relative_path, const fs::path& workspace_root) {
  const auto path = validate_workspace_path(relative_path, workspace_root);
  std::error_code ec;
  if (!fs::is_regular_file(path, ec)) throw Error(ErrorCode::NotFound, "no such file: " + relative_path);
  const auto ext = ascii_lower(path.extension().string());
  if (ext != ".csv" && ext != ".tsv") {
    throw Error(ErrorCode::ParseError, "only .csv and .tsv files can be loaded: " + relative_path);
  }
  auto ds = parse_delimited(read_file(path.string()), ext == ".tsv" ? '\t' : ',');
  ds.source_path = path.lexically_relative(fs::absolute(workspace_root).lexically_normal()).generic_string();
  return ds;
}

std::string DatasetStore::add(Dataset dataset) {
  std::lock_guard lock(mu_);
  if (order_.size() >= kMaxHandles) {
    throw Error(ErrorCode::LimitExceeded, fmt::format("dataset store holds the maximum of {} handles", kMaxHandles));
  }
  if (cells_ + dataset.cell_count() > kMaxCells) {
    throw Error(ErrorCode::LimitExceeded,
                fmt::format("dataset store would exceed {} cells ({} in use, {} requested)", kMaxCells, cells_,
                            dataset.cell_count()));
  }
  auto handle = fmt::format("d{}", next_++);
  dataset.handle = handle;
  cells_ += dataset.cell_count();
  by_handle_.emplace(handle, std::make_shared<const Dataset>(std::move(dataset)));
  order_.push_back(handle);
  return handle;
}

std::shared_ptr<const Dataset> DatasetStore::get(const std::string& handle) const {
  std::lock_guard lock(mu_);
  if (auto it = by_handle_.find(handle); it != by_handle_.end()) return it->second;
  throw Error(ErrorCode::UnknownHandle, fmt::format("unknown dataset handle '{}'", handle));
}

std::vector<std::string> DatasetStore::handles() const {
  std::lock_guard lock(mu_);
  return order_;
}

}  // namespace dataclaw::tools
