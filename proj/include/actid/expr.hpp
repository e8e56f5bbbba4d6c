#pragma once

#include "actid/core.hpp"

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace actid {

/// Value plus gradient with respect to all variables.
struct DualNumber {
  double value = 0.0;
  Vector partials;

  static DualNumber constant(double c, std::size_t nvars);
  static DualNumber variable(double x, std::size_t index, std::size_t nvars);
};

DualNumber operator+(const DualNumber &a, const DualNumber &b);
DualNumber operator-(const DualNumber &a, const DualNumber &b);
DualNumber operator-(const DualNumber &a);
DualNumber operator*(const DualNumber &a, const DualNumber &b);
DualNumber operator/(const DualNumber &a, const DualNumber &b);
DualNumber pow(const DualNumber &a, int exponent);
DualNumber exp(const DualNumber &a);
DualNumber sin(const DualNumber &a);
DualNumber cos(const DualNumber &a);

class ParseError : public Error {
public:
  ParseError(const std::string &what, std::size_t offset)
      : Error(ErrorCode::Parse,
              what + " at offset " + std::to_string(offset)),
        detail_(what), offset_(offset) {}
  std::size_t offset() const { return offset_; }
  /// Message without the position suffix.
  const std::string &detail() const { return detail_; }

private:
  std::string detail_;
  std::size_t offset_;
};

class EvaluationError : public Error {
public:
  EvaluationError(const std::string &what, std::string subtree)
      : Error(ErrorCode::Numerical, what + " in '" + subtree + "'"),
        subtree_(std::move(subtree)) {}
  const std::string &subtree() const { return subtree_; }

private:
  std::string subtree_;
};

/// Immutable AST over x1..x_nvars built from smooth primitives only.
class Expression {
public:
  enum class Op : std::uint8_t {
    Constant,
    Variable,
    Add,
    Sub,
    Mul,
    Div,
    Neg,
    Pow,
    Exp,
    Sin,
    Cos
  };

  struct Node {
    Op op;
    double value = 0.0; // Constant
    int index = 0;      // Variable (0-based) or Pow exponent
    int lhs = -1;
    int rhs = -1;
  };

  std::size_t nvars() const { return nvars_; }
  const std::vector<Node> &nodes() const { return nodes_; }
  int root() const { return root_; }

  double eval(const Vector &x) const;
  DualNumber eval_with_gradient(const Vector &x) const;

  /// Re-parseable text with minimal parentheses and round-trip constants.
  std::string to_string() const;

private:
  friend class ExpressionParser;
  friend Expression make_expression(std::vector<Node>, int, std::size_t);

  DualNumber eval_node(int id, const Vector &x) const;
  std::string print_node(int id, int parent_prec) const;

  std::vector<Node> nodes_;
  int root_ = -1;
  std::size_t nvars_ = 0;
};

Expression parse_expression(std::string_view text, std::size_t nvars);

/// Builds an expression directly from nodes (used by generators in tests).
Expression make_expression(std::vector<Expression::Node> nodes, int root,
                           std::size_t nvars);

/// SmoothMap whose components are parsed expressions.
SmoothMap expression_map(std::vector<Expression> components);

} // namespace actid
