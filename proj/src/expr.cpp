#include "actid/expr.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>

namespace actid {

DualNumber DualNumber::constant(double c, std::size_t nvars) {
  return {c, Vector::Zero(static_cast<Eigen::Index>(nvars))};
}

DualNumber DualNumber::variable(double x, std::size_t index,
                                std::size_t nvars) {
  DualNumber out{x, Vector::Zero(static_cast<Eigen::Index>(nvars))};
  out.partials(static_cast<Eigen::Index>(index)) = 1.0;
  return out;
}

DualNumber operator+(const DualNumber &a, const DualNumber &b) {
  return {a.value + b.value, a.partials + b.partials};
}

DualNumber operator-(const DualNumber &a, const DualNumber &b) {
  return {a.value - b.value, a.partials - b.partials};
}

DualNumber operator-(const DualNumber &a) { return {-a.value, -a.partials}; }

DualNumber operator*(const DualNumber &a, const DualNumber &b) {
  return {a.value * b.value, b.value * a.partials + a.value * b.partials};
}

DualNumber operator/(const DualNumber &a, const DualNumber &b) {
  const double q = a.value / b.value;
  return {q, (a.partials - q * b.partials) / b.value};
}

DualNumber pow(const DualNumber &a, int exponent) {
  if (exponent == 0)
    return DualNumber::constant(1.0, static_cast<std::size_t>(a.partials.size()));
  const double outer = std::pow(a.value, exponent);
  const double slope = exponent * std::pow(a.value, exponent - 1);
  return {outer, slope * a.partials};
}

DualNumber exp(const DualNumber &a) {
  const double e = std::exp(a.value);
  return {e, e * a.partials};
}

DualNumber sin(const DualNumber &a) {
  return {std::sin(a.value), std::cos(a.value) * a.partials};
}

DualNumber cos(const DualNumber &a) {
  return {std::cos(a.value), -std::sin(a.value) * a.partials};
}

// ---------------------------------------------------------------------------
// Grammar (precedence low to high):
//   expr    := term (('+' | '-') term)*
//   term    := unary (('*' | '/') unary)*
//   unary   := ('-' | '+') unary | power
//   power   := primary ('^' ['-'] INTEGER)?
//   primary := NUMBER | 'x' INTEGER | FUNC '(' expr ')' | '(' expr ')'
//   FUNC    := 'exp' | 'sin' | 'cos'

class ExpressionParser {
public:
  ExpressionParser(std::string_view text, std::size_t nvars)
      : text_(text), nvars_(nvars) {}

  Expression parse() {
    if (nvars_ == 0)
      throw ParseError("expression needs at least one variable slot", 0);
    skip_space();
    if (pos_ >= text_.size())
      throw ParseError("empty expression", pos_);
    const int root = parse_expr();
    skip_space();
    if (pos_ < text_.size())
      throw ParseError(describe_unexpected(), pos_);
    Expression e;
    e.nodes_ = std::move(nodes_);
    e.root_ = root;
    e.nvars_ = nvars_;
    return e;
  }

private:
  using Op = Expression::Op;

  int add(Expression::Node node) {
    nodes_.push_back(node);
    return static_cast<int>(nodes_.size() - 1);
  }

  void skip_space() {
    while (pos_ < text_.size() &&
           std::isspace(static_cast<unsigned char>(text_[pos_])))
      ++pos_;
  }

  // Accepts the ASCII hyphen and U+2212 MINUS SIGN.
  bool eat_minus() {
    skip_space();
    if (pos_ < text_.size() && text_[pos_] == '-') {
      ++pos_;
      return true;
    }
    if (text_.substr(pos_, 3) == "\xE2\x88\x92") {
      pos_ += 3;
      return true;
    }
    return false;
  }

  bool eat(char ch) {
    skip_space();
    if (pos_ < text_.size() && text_[pos_] == ch) {
      ++pos_;
      return true;
    }
    return false;
  }

  std::string describe_unexpected() const {
    if (pos_ >= text_.size())
      return "unexpected end of expression";
    const char ch = text_[pos_];
    if (ch == '|')
      return "'|' is not allowed: nonsmooth constructs belong to h";
    return std::string("unexpected character '") + ch + "'";
  }

  int parse_expr() {
    int lhs = parse_term();
    for (;;) {
      if (eat('+')) {
        lhs = add({Op::Add, 0.0, 0, lhs, parse_term()});
      } else if (eat_minus()) {
        lhs = add({Op::Sub, 0.0, 0, lhs, parse_term()});
      } else {
        return lhs;
      }
    }
  }

  int parse_term() {
    int lhs = parse_unary();
    for (;;) {
      if (eat('*')) {
        lhs = add({Op::Mul, 0.0, 0, lhs, parse_unary()});
      } else if (eat('/')) {
        lhs = add({Op::Div, 0.0, 0, lhs, parse_unary()});
      } else {
        return lhs;
      }
    }
  }

  int parse_unary() {
    if (eat_minus())
      return add({Op::Neg, 0.0, 0, parse_unary(), -1});
    if (eat('+'))
      return parse_unary();
    return parse_power();
  }

  int parse_power() {
    const int base = parse_primary();
    if (!eat('^'))
      return base;
    const bool negative = eat_minus();
    skip_space();
    const std::size_t start = pos_;
    while (pos_ < text_.size() &&
           std::isdigit(static_cast<unsigned char>(text_[pos_])))
      ++pos_;
    if (pos_ == start)
      throw ParseError("exponent must be an integer", start);
    if (pos_ < text_.size() && (text_[pos_] == '.' || text_[pos_] == 'e'))
      throw ParseError("only integer exponents are supported", start);
    const long value = std::strtol(std::string(text_.substr(start, pos_ - start)).c_str(),
                                   nullptr, 10);
    if (value > 1000)
      throw ParseError("exponent too large", start);
    return add({Op::Pow, 0.0, static_cast<int>(negative ? -value : value),
                base, -1});
  }

  int parse_number() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() &&
           std::isdigit(static_cast<unsigned char>(text_[pos_])))
      ++pos_;
    if (pos_ < text_.size() && text_[pos_] == '.') {
      ++pos_;
      while (pos_ < text_.size() &&
             std::isdigit(static_cast<unsigned char>(text_[pos_])))
        ++pos_;
    }
    if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
      std::size_t look = pos_ + 1;
      if (look < text_.size() && (text_[look] == '+' || text_[look] == '-'))
        ++look;
      if (look < text_.size() &&
          std::isdigit(static_cast<unsigned char>(text_[look]))) {
        pos_ = look;
        while (pos_ < text_.size() &&
               std::isdigit(static_cast<unsigned char>(text_[pos_])))
          ++pos_;
      }
    }
    const std::string literal(text_.substr(start, pos_ - start));
    if (literal == ".")
      throw ParseError("malformed number", start);
    return add({Op::Constant, std::strtod(literal.c_str(), nullptr), 0, -1, -1});
  }

  int parse_primary() {
    skip_space();
    if (pos_ >= text_.size())
      throw ParseError("unexpected end of expression", pos_);
    const char ch = text_[pos_];
    if (std::isdigit(static_cast<unsigned char>(ch)) || ch == '.')
      return parse_number();
    if (ch == '(') {
      ++pos_;
      const int inner = parse_expr();
      if (!eat(')'))
        throw ParseError("expected ')'", pos_);
      return inner;
    }
    if (std::isalpha(static_cast<unsigned char>(ch))) {
      const std::size_t start = pos_;
      while (pos_ < text_.size() &&
             std::isalnum(static_cast<unsigned char>(text_[pos_])))
        ++pos_;
      const std::string word(text_.substr(start, pos_ - start));
      if (word.size() > 1 && word[0] == 'x' &&
          word.find_first_not_of("0123456789", 1) == std::string::npos) {
        const long idx = std::strtol(word.c_str() + 1, nullptr, 10);
        if (idx < 1 || static_cast<std::size_t>(idx) > nvars_)
          throw ParseError("variable " + word + " outside x1..x" +
                               std::to_string(nvars_),
                           start);
        return add({Op::Variable, 0.0, static_cast<int>(idx - 1), -1, -1});
      }
      Op op;
      if (word == "exp")
        op = Op::Exp;
      else if (word == "sin")
        op = Op::Sin;
      else if (word == "cos")
        op = Op::Cos;
      else if (word == "abs" || word == "max" || word == "min")
        throw ParseError("'" + word +
                             "' is not allowed: nonsmooth constructs belong to h",
                         start);
      else
        throw ParseError("unknown identifier '" + word + "'", start);
      if (!eat('('))
        throw ParseError("expected '(' after " + word, pos_);
      const int arg = parse_expr();
      if (!eat(')'))
        throw ParseError("expected ')'", pos_);
      return add({op, 0.0, 0, arg, -1});
    }
    throw ParseError(describe_unexpected(), pos_);
  }

  std::string_view text_;
  std::size_t nvars_;
  std::size_t pos_ = 0;
  std::vector<Expression::Node> nodes_;
};

Expression parse_expression(std::string_view text, std::size_t nvars) {
  return ExpressionParser(text, nvars).parse();
}

Expression make_expression(std::vector<Expression::Node> nodes, int root,
                           std::size_t nvars) {
  if (root < 0 || static_cast<std::size_t>(root) >= nodes.size())
    throw Error(ErrorCode::InvalidArgument, "bad expression root");
  Expression e;
  e.nodes_ = std::move(nodes);
  e.root_ = root;
  e.nvars_ = nvars;
  return e;
}

// ---------------------------------------------------------------------------

DualNumber Expression::eval_node(int id, const Vector &x) const {
  const Node &node = nodes_[static_cast<std::size_t>(id)];
  switch (node.op) {
  case Op::Constant:
    return DualNumber::constant(node.value, nvars_);
  case Op::Variable:
    return DualNumber::variable(x(node.index),
                                static_cast<std::size_t>(node.index), nvars_);
  case Op::Add:
    return eval_node(node.lhs, x) + eval_node(node.rhs, x);
  case Op::Sub:
    return eval_node(node.lhs, x) - eval_node(node.rhs, x);
  case Op::Mul:
    return eval_node(node.lhs, x) * eval_node(node.rhs, x);
  case Op::Div: {
    const DualNumber den = eval_node(node.rhs, x);
    if (den.value == 0.0)
      throw EvaluationError("division by zero", print_node(id, 0));
    return eval_node(node.lhs, x) / den;
  }
  case Op::Neg:
    return -eval_node(node.lhs, x);
  case Op::Pow: {
    const DualNumber base = eval_node(node.lhs, x);
    if (node.index < 0 && base.value == 0.0)
      throw EvaluationError("division by zero", print_node(id, 0));
    return pow(base, node.index);
  }
  case Op::Exp:
    return exp(eval_node(node.lhs, x));
  case Op::Sin:
    return sin(eval_node(node.lhs, x));
  case Op::Cos:
    return cos(eval_node(node.lhs, x));
  }
  throw Error(ErrorCode::InvalidArgument, "corrupt expression node");
}

DualNumber Expression::eval_with_gradient(const Vector &x) const {
  if (static_cast<std::size_t>(x.size()) != nvars_)
    throw DimensionError("expression expects " + std::to_string(nvars_) +
                         " variables");
  if (!x.allFinite())
    throw Error(ErrorCode::InvalidArgument, "non-finite evaluation point");
  DualNumber out = eval_node(root_, x);
  if (!std::isfinite(out.value) || !out.partials.allFinite())
    throw EvaluationError("non-finite result", to_string());
  return out;
}

double Expression::eval(const Vector &x) const {
  return eval_with_gradient(x).value;
}

namespace {

int precedence(Expression::Op op) {
  using Op = Expression::Op;
  switch (op) {
  case Op::Add:
  case Op::Sub:
    return 1;
  case Op::Mul:
  case Op::Div:
    return 2;
  case Op::Neg:
    return 3;
  case Op::Pow:
    return 4;
  default:
    return 5;
  }
}

} // namespace

std::string Expression::print_node(int id, int parent_prec) const {
  const Node &node = nodes_[static_cast<std::size_t>(id)];
  const int prec = precedence(node.op);
  std::string out;
  switch (node.op) {
  case Op::Constant: {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", std::abs(node.value));
    out = buf;
    if (!std::signbit(node.value))
      return out;
    // Printed like a negation so that parsing gives back the same text.
    out = "-" + out;
    return 3 < parent_prec ? "(" + out + ")" : out;
  }
  case Op::Variable:
    return "x" + std::to_string(node.index + 1);
  case Op::Add:
    out = print_node(node.lhs, 1) + " + " + print_node(node.rhs, 2);
    break;
  case Op::Sub:
    out = print_node(node.lhs, 1) + " - " + print_node(node.rhs, 2);
    break;
  case Op::Mul:
    out = print_node(node.lhs, 2) + "*" + print_node(node.rhs, 3);
    break;
  case Op::Div:
    out = print_node(node.lhs, 2) + "/" + print_node(node.rhs, 3);
    break;
  case Op::Neg:
    out = "-" + print_node(node.lhs, 4);
    break;
  case Op::Pow:
    out = print_node(node.lhs, 5) + "^" + std::to_string(node.index);
    break;
  case Op::Exp:
    return "exp(" + print_node(node.lhs, 0) + ")";
  case Op::Sin:
    return "sin(" + print_node(node.lhs, 0) + ")";
  case Op::Cos:
    return "cos(" + print_node(node.lhs, 0) + ")";
  }
  return prec < parent_prec ? "(" + out + ")" : out;
}

std::string Expression::to_string() const { return print_node(root_, 0); }

SmoothMap expression_map(std::vector<Expression> components) {
  if (components.empty())
    throw DimensionError("map needs at least one component");
  const std::size_t n = components.front().nvars();
  for (const auto &e : components)
    if (e.nvars() != n)
      throw DimensionError("components disagree on the number of variables");
  const std::size_t m = components.size();
  auto shared = std::make_shared<const std::vector<Expression>>(std::move(components));
  return SmoothMap(
      n, m,
      [shared](const Vector &x) {
        Vector out(static_cast<Eigen::Index>(shared->size()));
        for (std::size_t i = 0; i < shared->size(); ++i)
          out(static_cast<Eigen::Index>(i)) = (*shared)[i].eval(x);
        return out;
      },
      [shared, n](const Vector &x) {
        Matrix out(static_cast<Eigen::Index>(shared->size()),
                   static_cast<Eigen::Index>(n));
        for (std::size_t i = 0; i < shared->size(); ++i)
          out.row(static_cast<Eigen::Index>(i)) =
              (*shared)[i].eval_with_gradient(x).partials.transpose();
        return out;
      });
}

} // namespace actid
