#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "dataclaw/core/types.hpp"

namespace dataclaw::tools {

enum class DType { integer, floating, string, boolean };

std::string_view to_string(DType t);
inline bool is_numeric(DType t) { return t == DType::integer || t == DType::floating; }

// monostate is null.
using Cell = std::variant<std::monostate, std::int64_t, double, std::string, bool>;
using Row = std::vector<Cell>;

inline bool is_null(const Cell& c) { return std::holds_alternative<std::monostate>(c); }
std::optional<double> as_number(const Cell& c);
Json to_json(const Cell& c);
// Text form used in tables, forms and chart labels; null renders empty.
std::string render(const Cell& c);

struct Column {
  std::string name;
  DType dtype = DType::string;

  bool operator==(const Column&) const = default;
};

struct Dataset {
  std::string handle;
  std::vector<Column> columns;
  std::vector<Row> rows;
  std::string source_path;

  std::optional<std::size_t> find_column(std::string_view name) const;
  // BadQuery naming the column when absent.
  std::size_t column_index(std::string_view name) const;
  std::size_t cell_count() const { return rows.size() * columns.size(); }

  bool operator==(const Dataset&) const = default;
};

/// Parses delimited text with a header row (RFC-4180 quoting) and infers
/// column types: integer, else float, else boolean, else string. Empty cells
/// are null. ParseError on ragged rows or a missing header.
Dataset parse_delimited(std::string_view text, char delimiter);

/// Loads a workspace-relative .csv/.tsv file.
Dataset load_table(const std::string& relative_path, const std::filesystem::path& workspace_root);

/// Per-session handle table ("d1", "d2", ...), bounded in handle count and
/// total cells.
class DatasetStore {
 public:
  static constexpr std::size_t kMaxHandles = 100;
  static constexpr std::size_t kMaxCells = 1'000'000;

  // Assigns the next handle; LimitExceeded past the bounds.
  std::string add(Dataset dataset);
  std::shared_ptr<const Dataset> get(const std::string& handle) const;
  std::vector<std::string> handles() const;

 private:
  mutable std::mutex mu_;
  std::map<std::string, std::shared_ptr<const Dataset>> by_handle_;
  std::vector<std::string> order_;
  std::size_t next_ = 1;
  std::size_t cells_ = 0;
};

}  // namespace dataclaw::tools
