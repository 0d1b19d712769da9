#pragma once

#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dataclaw/tools/dataset.hpp"

namespace dataclaw::tools {

/// Arithmetic over numeric columns and literals: + - * / (also × ÷ −),
/// unary minus, parentheses. Column names are bare identifiers or
/// `backtick quoted`. Any null operand, or division by zero, yields null.
class Expr {
 public:
  static Expr parse(std::string_view text);

  Expr(Expr&&) noexcept;
  Expr& operator=(Expr&&) noexcept;
  ~Expr();

  std::vector<std::string> columns() const;

  // Resolves column names against `schema`; BadQuery for unknown or
  // non-numeric columns.
  void bind(const std::vector<Column>& schema);
  std::optional<double> eval(const Row& row) const;

  struct Node;

 private:
  explicit Expr(std::unique_ptr<Node> root);
  std::unique_ptr<Node> root_;
};

}  // namespace dataclaw::tools
