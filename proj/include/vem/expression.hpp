#pragma once

#include <cctype>
#include <cmath>
#include <memory>
#include <numbers>
#include <stdexcept>
#include <string>
#include <string_view>

#include "vem/geometry.hpp"

namespace vem {

class ExpressionError : public std::runtime_error {
 public:
  ExpressionError(const std::string& msg, std::size_t pos)
      : std::runtime_error(msg + " at position " + std::to_string(pos)), position(pos) {}
  std::size_t position;
};

/// Arithmetic expression in x and y: + - * / ^, unary minus, numbers, pi,
/// sin, cos, exp and parentheses. '^' is right associative and binds tighter
/// than unary minus (-x^2 == -(x^2)).
class Expression {
 public:
  static Expression parse(std::string_view text) {
    Parser p{text, 0};
    auto node = p.expr();
    p.skip();
    if (p.pos != text.size()) throw ExpressionError("unexpected '" + std::string(1, text[p.pos]) + "'", p.pos);
    Expression e;
    e.root_ = std::move(node);
    e.text_ = std::string(text);
    return e;
  }

  double operator()(Point2 p) const { return root_->eval(p); }
  [[nodiscard]] const std::string& text() const { return text_; }

 private:
  struct Node {
    virtual ~Node() = default;
    [[nodiscard]] virtual double eval(Point2 p) const = 0;
  };
  using NodePtr = std::shared_ptr<const Node>;

  struct Constant final : Node {
    explicit Constant(double v) : value(v) {}
    double value;
    [[nodiscard]] double eval(Point2) const override { return value; }
  };
  struct Variable final : Node {
    explicit Variable(bool is_x) : x(is_x) {}
    bool x;
    [[nodiscard]] double eval(Point2 p) const override { return x ? p.x : p.y; }
  };
  struct Unary final : Node {
    Unary(char o, NodePtr a) : op(o), arg(std::move(a)) {}
    char op;  // '-', 's' sin, 'c' cos, 'e' exp
    NodePtr arg;
    [[nodiscard]] double eval(Point2 p) const override {
      const double v = arg->eval(p);
      switch (op) {
        case '-': return -v;
        case 's': return std::sin(v);
        case 'c': return std::cos(v);
        default: return std::exp(v);
      }
    }
  };
  struct Binary final : Node {
    Binary(char o, NodePtr l, NodePtr r) : op(o), lhs(std::move(l)), rhs(std::move(r)) {}
    char op;
    NodePtr lhs, rhs;
    [[nodiscard]] double eval(Point2 p) const override {
      const double a = lhs->eval(p), b = rhs->eval(p);
      switch (op) {
        case '+': return a + b;
        case '-': return a - b;
        case '*': return a * b;
        case '/': return a / b;
        default: return std::pow(a, b);
      }
    }
  };

  struct Parser {
    std::string_view s;
    std::size_t pos;

    void skip() {
      while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
    }
    bool accept(char c) {
      skip();
      if (pos < s.size() && s[pos] == c) {
        ++pos;
        return true;
      }
      return false;
    }
    NodePtr expr() {
      NodePtr lhs = term();
      for (;;) {
        if (accept('+')) lhs = std::make_shared<Binary>('+', lhs, term());
        else if (accept('-')) lhs = std::make_shared<Binary>('-', lhs, term());
        else return lhs;
      }
    }
    NodePtr term() {
      NodePtr lhs = unary();
      for (;;) {
        if (accept('*')) lhs = std::make_shared<Binary>('*', lhs, unary());
        else if (accept('/')) lhs = std::make_shared<Binary>('/', lhs, unary());
        else return lhs;
      }
    }
    NodePtr unary() {
      if (accept('-')) return std::make_shared<Unary>('-', unary());
      if (accept('+')) return unary();
      return power();
    }
    NodePtr power() {
      NodePtr base = primary();
      if (accept('^')) return std::make_shared<Binary>('^', base, unary());
      return base;
    }
    NodePtr primary() {
      skip();
      if (pos >= s.size()) throw ExpressionError("unexpected end of expression", pos);
      const char c = s[pos];
      if (c == '(') {
        ++pos;
        NodePtr inner = expr();
        if (!accept(')')) throw ExpressionError("expected ')'", pos);
        return inner;
      }
      if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
        const std::string rest(s.substr(pos));
        std::size_t used = 0;
        double v = 0;
        try {
          v = std::stod(rest, &used);
        } catch (const std::exception&) {
          throw ExpressionError("malformed number", pos);
        }
        pos += used;
        return std::make_shared<Constant>(v);
      }
      if (std::isalpha(static_cast<unsigned char>(c))) {
        const std::size_t start = pos;
        while (pos < s.size() && std::isalpha(static_cast<unsigned char>(s[pos]))) ++pos;
        const std::string_view name = s.substr(start, pos - start);
        if (name == "x") return std::make_shared<Variable>(true);
        if (name == "y") return std::make_shared<Variable>(false);
        if (name == "pi") return std::make_shared<Constant>(std::numbers::pi);
        char op = 0;
        if (name == "sin") op = 's';
        else if (name == "cos") op = 'c';
        else if (name == "exp") op = 'e';
        else throw ExpressionError("unknown identifier '" + std::string(name) + "'", start);
        if (!accept('(')) throw ExpressionError("expected '(' after " + std::string(name), pos);
        NodePtr arg = expr();
        if (!accept(')')) throw ExpressionError("expected ')'", pos);
        return std::make_shared<Unary>(op, arg);
      }
      throw ExpressionError("unexpected '" + std::string(1, c) + "'", pos);
    }
  };

  NodePtr root_;
  std::string text_;
};

}  // namespace vem
