#pragma once

// A small arithmetic expression language for user-defined functions:
//
//   expr    := term (('+' | '-') term)*
//   term    := unary (('*' | '/') unary)*
//   unary   := ('-' | '+') unary | power
//   power   := primary ('^' unary)?
//   primary := number | name | name '(' expr ')' | '(' expr ')'
//
// Functions: exp log sin cos tan sqrt abs step, with step(u) = 1 for u >= 0
// and 0 otherwise. Constants: pi, e, plus any caller-supplied names.

#include <cctype>
#include <cmath>
#include <cstddef>
#include <map>
#include <numbers>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sustain/error.hpp"

namespace sustain {

class Expression {
 public:
  static Expression parse(std::string_view text, std::vector<std::string> variables = {"x"},
                          const std::map<std::string, double>& constants = {}) {
    Expression e;
    e.text_ = std::string(text);
    e.variables_ = std::move(variables);
    Parser p{text, e, constants};
    e.root_ = p.parse();
    return e;
  }

  double operator()(std::span<const double> values) const {
    if (values.size() != variables_.size()) {
      throw InvalidArgument("expression '" + text_ + "' takes " + std::to_string(variables_.size()) +
                            " variables, got " + std::to_string(values.size()));
    }
    return eval(root_, values);
  }

  double operator()(double x) const { return (*this)(std::span<const double>(&x, 1)); }

  const std::string& text() const { return text_; }
  const std::vector<std::string>& variables() const { return variables_; }

 private:
  enum class Op { Const, Var, Add, Sub, Mul, Div, Pow, Neg, Exp, Log, Sin, Cos, Tan, Sqrt, Abs, Step };

  struct Node {
    Op op;
    double value = 0.0;
    std::size_t var = 0;
    int lhs = -1;
    int rhs = -1;
  };

  double eval(int idx, std::span<const double> v) const {
    const Node& n = nodes_[static_cast<std::size_t>(idx)];
    switch (n.op) {
      case Op::Const: return n.value;
      case Op::Var: return v[n.var];
      case Op::Add: return eval(n.lhs, v) + eval(n.rhs, v);
      case Op::Sub: return eval(n.lhs, v) - eval(n.rhs, v);
      case Op::Mul: return eval(n.lhs, v) * eval(n.rhs, v);
      case Op::Div: return eval(n.lhs, v) / eval(n.rhs, v);
      case Op::Pow: return std::pow(eval(n.lhs, v), eval(n.rhs, v));
      case Op::Neg: return -eval(n.lhs, v);
      case Op::Exp: return std::exp(eval(n.lhs, v));
      case Op::Log: return std::log(eval(n.lhs, v));
      case Op::Sin: return std::sin(eval(n.lhs, v));
      case Op::Cos: return std::cos(eval(n.lhs, v));
      case Op::Tan: return std::tan(eval(n.lhs, v));
      case Op::Sqrt: return std::sqrt(eval(n.lhs, v));
      case Op::Abs: return std::abs(eval(n.lhs, v));
      case Op::Step: return eval(n.lhs, v) >= 0.0 ? 1.0 : 0.0;
    }
    return 0.0;
  }

  int add(Node n) {
    nodes_.push_back(n);
    return static_cast<int>(nodes_.size() - 1);
  }

  struct Parser {
    std::string_view s;
    Expression& e;
    const std::map<std::string, double>& constants;
    std::size_t pos = 0;

    [[noreturn]] void fail(const std::string& what) const {
      throw InvalidArgument("cannot parse expression '" + std::string(s) + "' at position " +
                            std::to_string(pos) + ": " + what);
    }

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

    int parse() {
      int root = expr();
      skip();
      if (pos != s.size()) fail("unexpected '" + std::string(1, s[pos]) + "'");
      return root;
    }

    int expr() {
      int lhs = term();
      for (;;) {
        if (accept('+')) {
          lhs = e.add({Op::Add, 0.0, 0, lhs, term()});
        } else if (accept('-')) {
          lhs = e.add({Op::Sub, 0.0, 0, lhs, term()});
        } else {
          return lhs;
        }
      }
    }

    int term() {
      int lhs = unary();
      for (;;) {
        if (accept('*')) {
          lhs = e.add({Op::Mul, 0.0, 0, lhs, unary()});
        } else if (accept('/')) {
          lhs = e.add({Op::Div, 0.0, 0, lhs, unary()});
        } else {
          return lhs;
        }
      }
    }

    int unary() {
      if (accept('-')) return e.add({Op::Neg, 0.0, 0, unary(), -1});
      if (accept('+')) return unary();
      return power();
    }

    int power() {
      int base = primary();
      if (accept('^')) return e.add({Op::Pow, 0.0, 0, base, unary()});
      return base;
    }

    int primary() {
      skip();
      if (pos >= s.size()) fail("unexpected end of input");
      const char c = s[pos];
      if (accept('(')) {
        int inner = expr();
        if (!accept(')')) fail("expected ')'");
        return inner;
      }
      if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
      if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return name();
      fail("unexpected '" + std::string(1, c) + "'");
    }

    int number() {
      const std::string rest(s.substr(pos));
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(rest, &used);
      } catch (const std::exception&) {
        fail("bad number");
      }
      pos += used;
      return e.add({Op::Const, v, 0, -1, -1});
    }

    int name() {
      const std::size_t start = pos;
      while (pos < s.size() &&
             (std::isalnum(static_cast<unsigned char>(s[pos])) || s[pos] == '_')) {
        ++pos;
      }
      const std::string id(s.substr(start, pos - start));
      skip();
      if (pos < s.size() && s[pos] == '(') {
        static const std::map<std::string, Op> kFunctions = {
            {"exp", Op::Exp}, {"log", Op::Log}, {"sin", Op::Sin}, {"cos", Op::Cos},
            {"tan", Op::Tan}, {"sqrt", Op::Sqrt}, {"abs", Op::Abs}, {"step", Op::Step}};
        auto it = kFunctions.find(id);
        if (it == kFunctions.end()) fail("unknown function '" + id + "'");
        ++pos;
        int arg = expr();
        if (!accept(')')) fail("expected ')' after argument of " + id);
        return e.add({it->second, 0.0, 0, arg, -1});
      }
      for (std::size_t i = 0; i < e.variables_.size(); ++i) {
        if (e.variables_[i] == id) return e.add({Op::Var, 0.0, i, -1, -1});
      }
      if (auto it = constants.find(id); it != constants.end()) {
        return e.add({Op::Const, it->second, 0, -1, -1});
      }
      if (id == "pi") return e.add({Op::Const, std::numbers::pi, 0, -1, -1});
      if (id == "e") return e.add({Op::Const, std::numbers::e, 0, -1, -1});
      fail("unknown name '" + id + "'");
    }
  };

  std::string text_;
  std::vector<std::string> variables_;
  std::vector<Node> nodes_;
  int root_ = -1;
};

}  // namespace sustain
