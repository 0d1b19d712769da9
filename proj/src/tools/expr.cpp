#include "dataclaw/tools/expr.hpp"

#include <cctype>
#include <charconv>
#include <cmath>

#include <fmt/format.h>

#include "dataclaw/core/error.hpp"

namespace dataclaw::tools {

struct Expr::Node {
  enum class Kind { number, column, negate, add, sub, mul, div };
  Kind kind = Kind::number;
  double value = 0;
  std::string column;
  std::size_t index = 0;
  std::unique_ptr<Node> lhs;
  std::unique_ptr<Node> rhs;
};

namespace {

using Node = Expr::Node;

[[noreturn]] void bad(std::string_view text, std::size_t pos, std::string_view what) {
  throw Error(ErrorCode::BadQuery, fmt::format("bad expression '{}' at offset {}: {}", text, pos, what));
}

class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  std::unique_ptr<Node> parse() {
    auto n = additive();
    skip_ws();
    if (pos_ != text_.size()) bad(text_, pos_, "unexpected trailing input");
    return n;
  }

 private:
  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  // Returns the operator char ('+','-','*','/') at the cursor, mapping the
  // UTF-8 forms of ×, ÷ and −, and advances past it.
  char take_operator(std::string_view allowed) {
    skip_ws();
    auto rest = text_.substr(pos_);
    struct Alias {
      std::string_view text;
      char op;
    };
    static constexpr Alias aliases[] = {
        {"+", '+'}, {"-", '-'}, {"*", '*'}, {"/", '/'}, {"\xC3\x97", '*'}, {"\xC3\xB7", '/'}, {"\xE2\x88\x92", '-'},
    };
    for (const auto& a : aliases) {
      if (rest.rfind(a.text, 0) == 0 && allowed.find(a.op) != std::string_view::npos) {
        pos_ += a.text.size();
        return a.op;
      }
    }
    return 0;
  }

  std::unique_ptr<Node> binary(Node::Kind kind, std::unique_ptr<Node> l, std::unique_ptr<Node> r) {
    auto n = std::make_unique<Node>();
    n->kind = kind;
    n->lhs = std::move(l);
    n->rhs = std::move(r);
    return n;
  }

  std::unique_ptr<Node> additive() {
    auto lhs = multiplicative();
    while (char op = take_operator("+-")) {
      lhs = binary(op == '+' ? Node::Kind::add : Node::Kind::sub, std::move(lhs), multiplicative());
    }
    return lhs;
  }

  std::unique_ptr<Node> multiplicative() {
    auto lhs = unary();
    while (char op = take_operator("*/")) {
      lhs = binary(op == '*' ? Node::Kind::mul : Node::Kind::div, std::move(lhs), unary());
    }
    return lhs;
  }

  std::unique_ptr<Node> unary() {
    if (take_operator("-")) {
      auto n = std::make_unique<Node>();
      n->kind = Node::Kind::negate;
      n->lhs = unary();
      return n;
    }
    take_operator("+");
    return primary();
  }

  std::unique_ptr<Node> primary() {
    skip_ws();
    if (pos_ >= text_.size()) bad(text_, pos_, "expected a value");
    const char c = text_[pos_];
    if (c == '(') {
      ++pos_;
      auto inner = additive();
      skip_ws();
      if (pos_ >= text_.size() || text_[pos_] != ')') bad(text_, pos_, "expected ')'");
      ++pos_;
      return inner;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      double v = 0;
      auto [ptr, ec] = std::from_chars(text_.data() + pos_, text_.data() + text_.size(), v);
      if (ec != std::errc{}) bad(text_, pos_, "malformed number");
      pos_ = static_cast<std::size_t>(ptr - text_.data());
      auto n = std::make_unique<Node>();
      n->value = v;
      return n;
    }
    if (c == '`') {
      const auto close = text_.find('`', pos_ + 1);
      if (close == std::string_view::npos) bad(text_, pos_, "unterminated `column`");
      auto n = std::make_unique<Node>();
      n->kind = Node::Kind::column;
      n->column = std::string(text_.substr(pos_ + 1, close - pos_ - 1));
      pos_ = close + 1;
      return n;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      const auto start = pos_;
      while (pos_ < text_.size() &&
             (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) {
        ++pos_;
      }
      auto n = std::make_unique<Node>();
      n->kind = Node::Kind::column;
      n->column = std::string(text_.substr(start, pos_ - start));
      return n;
    }
    bad(text_, pos_, fmt::format("unexpected character '{}'", c));
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

void collect(const Node* n, std::vector<std::string>& out) {
  if (!n) return;
  if (n->kind == Node::Kind::column) out.push_back(n->column);
  collect(n->lhs.get(), out);
  collect(n->rhs.get(), out);
}

void bind_node(Node* n, const std::vector<Column>& schema) {
  if (!n) return;
  if (n->kind == Node::Kind::column) {
    bool found = false;
    for (std::size_t i = 0; i < schema.size(); ++i) {
      if (schema[i].name == n->column) {
        if (!is_numeric(schema[i].dtype)) {
          throw Error(ErrorCode::BadQuery, fmt::format("column '{}' is not numeric", n->column));
        }
        n->index = i;
        found = true;
        break;
      }
    }
    if (!found) throw Error(ErrorCode::BadQuery, fmt::format("unknown column '{}'", n->column));
  }
  bind_node(n->lhs.get(), schema);
  bind_node(n->rhs.get(), schema);
}

std::optional<double> eval_node(const Node* n, const Row& row) {
  switch (n->kind) {
    case Node::Kind::number: return n->value;
    case Node::Kind::column: return as_number(row[n->index]);
    case Node::Kind::negate: {
      auto v = eval_node(n->lhs.get(), row);
      if (!v) return std::nullopt;
      return -*v;
    }
    default: break;
  }
  auto l = eval_node(n->lhs.get(), row);
  if (!l) return std::nullopt;
  auto r = eval_node(n->rhs.get(), row);
  if (!r) return std::nullopt;
  switch (n->kind) {
    case Node::Kind::add: return *l + *r;
    case Node::Kind::sub: return *l - *r;
    case Node::Kind::mul: return *l * *r;
    case Node::Kind::div:
      if (*r == 0.0) return std::nullopt;
      return *l / *r;
    default: return std::nullopt;
  }
}

}  // namespace

Expr::Expr(std::unique_ptr<Node> root) : root_(std::move(root)) {}
Expr::Expr(Expr&&) noexcept = default;
Expr& Expr::operator=(Expr&&) noexcept = default;
Expr::~Expr() = default;

Expr Expr::parse(std::string_view text) { return Expr(Parser(text).parse()); }

std::vector<std::string> Expr::columns() const {
  std::vector<std::string> out;
  collect(root_.get(), out);
  return out;
}

void Expr::bind(const std::vector<Column>& schema) { bind_node(root_.get(), schema); }

std::optional<double> Expr::eval(const Row& row) const {
  auto v = eval_node(root_.get(), row);
  if (v && !std::isfinite(*v)) return std::nullopt;
  return v;
}

}  // namespace dataclaw::tools
