#include "actid/expr.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace actid;

namespace {

Vector vec(std::initializer_list<double> xs) {
  Vector v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs)
    v(i++) = x;
  return v;
}

// Random smooth tree over nvars variables; exponents and constants small
// enough that values stay finite on [-1, 1]^n.
struct Generator {
  std::mt19937 rng;
  std::size_t nvars;
  std::vector<Expression::Node> nodes;

  int leaf() {
    std::uniform_int_distribution<int> pick(0, 2);
    Expression::Node n{};
    if (pick(rng) == 0) {
      n.op = Expression::Op::Constant;
      n.value = std::uniform_real_distribution<double>(-2.0, 2.0)(rng);
    } else {
      n.op = Expression::Op::Variable;
      n.index = std::uniform_int_distribution<int>(
          0, static_cast<int>(nvars) - 1)(rng);
    }
    nodes.push_back(n);
    return static_cast<int>(nodes.size()) - 1;
  }

  int tree(int depth) {
    if (depth == 0)
      return leaf();
    using Op = Expression::Op;
    static const Op ops[] = {Op::Add, Op::Sub, Op::Mul, Op::Neg,
                             Op::Pow, Op::Exp, Op::Sin, Op::Cos};
    const Op op = ops[std::uniform_int_distribution<int>(0, 7)(rng)];
    Expression::Node n{};
    n.op = op;
    n.lhs = tree(depth - 1);
    if (op == Op::Add || op == Op::Sub || op == Op::Mul)
      n.rhs = tree(depth - 1);
    if (op == Op::Pow)
      n.index = std::uniform_int_distribution<int>(0, 3)(rng);
    if (op == Op::Exp) // keep exp arguments bounded
      n.op = Op::Sin;
    nodes.push_back(n);
    return static_cast<int>(nodes.size()) - 1;
  }
};

} // namespace

TEST(Parse, EvaluatesTwoCircleComponents) {
  const auto c2 = parse_expression("x1^2 + x2^2 - 1", 2);
  const auto c3 = parse_expression("(x1 + 1)^2 + x2^2 - 4", 2);
  EXPECT_DOUBLE_EQ(c2.eval(vec({1.0, 0.0})), 0.0);
  EXPECT_DOUBLE_EQ(c3.eval(vec({1.0, 0.0})), 0.0);
  const DualNumber g = c3.eval_with_gradient(vec({0.5, 2.0}));
  EXPECT_DOUBLE_EQ(g.value, 2.25 + 4.0 - 4.0);
  EXPECT_DOUBLE_EQ(g.partials(0), 3.0);
  EXPECT_DOUBLE_EQ(g.partials(1), 4.0);
}

TEST(Parse, PrecedenceAndAssociativity) {
  EXPECT_DOUBLE_EQ(parse_expression("2 - 3 - 4", 1).eval(vec({0})), -5.0);
  EXPECT_DOUBLE_EQ(parse_expression("8 / 4 / 2", 1).eval(vec({0})), 1.0);
  EXPECT_DOUBLE_EQ(parse_expression("-x1^2", 1).eval(vec({3})), -9.0);
  EXPECT_DOUBLE_EQ(parse_expression("2 * x1^-1", 1).eval(vec({4})), 0.5);
  EXPECT_DOUBLE_EQ(parse_expression("1e-3 * 2.5E2", 1).eval(vec({0})), 0.25);
  // U+2212 is accepted as a minus sign.
  EXPECT_DOUBLE_EQ(parse_expression("x1 \xE2\x88\x92 1", 1).eval(vec({3})), 2.0);
}

TEST(Parse, ElementaryFunctionsAndDerivatives) {
  const auto e = parse_expression("exp(x1) * sin(x2) + cos(x1 * x2)", 2);
  const Vector x = vec({0.3, -0.8});
  const DualNumber g = e.eval_with_gradient(x);
  const double a = x(0), b = x(1);
  EXPECT_NEAR(g.value, std::exp(a) * std::sin(b) + std::cos(a * b), 1e-15);
  EXPECT_NEAR(g.partials(0), std::exp(a) * std::sin(b) - b * std::sin(a * b),
              1e-14);
  EXPECT_NEAR(g.partials(1), std::exp(a) * std::cos(b) - a * std::sin(a * b),
              1e-14);
}

TEST(Parse, ErrorsCarryOffsets) {
  try {
    parse_expression("x1 + * 2", 1);
    FAIL() << "expected a parse error";
  } catch (const ParseError &e) {
    EXPECT_EQ(e.offset(), 5u);
    EXPECT_EQ(e.code(), ErrorCode::Parse);
  }
  EXPECT_THROW(parse_expression("", 1), ParseError);
  EXPECT_THROW(parse_expression("(x1 + 1", 1), ParseError);
  EXPECT_THROW(parse_expression("x3", 2), ParseError);
  EXPECT_THROW(parse_expression("x0", 2), ParseError);
  EXPECT_THROW(parse_expression("x1^0.5", 1), ParseError);
  EXPECT_THROW(parse_expression("foo(x1)", 1), ParseError);
  EXPECT_THROW(parse_expression("x1 x2", 2), ParseError);
}

TEST(Parse, NonsmoothConstructsAreRejected) {
  for (const char *text : {"abs(x1)", "max(x1, 0)", "min(x1, 0)", "|x1|"}) {
    try {
      parse_expression(text, 1);
      FAIL() << text;
    } catch (const ParseError &e) {
      EXPECT_NE(std::string(e.what()).find("nonsmooth"), std::string::npos)
          << e.what();
    }
  }
}

TEST(Evaluate, DomainErrorsNameTheSubtree) {
  const auto e = parse_expression("1 / (x1 - 1)", 1);
  EXPECT_THROW(e.eval(vec({1.0})), EvaluationError);
  EXPECT_THROW(parse_expression("x1^-2", 1).eval(vec({0.0})), EvaluationError);
  EXPECT_THROW(parse_expression("exp(x1)", 1).eval(vec({1e6})), EvaluationError);
  EXPECT_THROW(e.eval(vec({1.0, 2.0})), DimensionError);
}

TEST(Expression, RandomTreesMatchFiniteDifferences) {
  std::mt19937 rng(7);
  for (int trial = 0; trial < 300; ++trial) {
    Generator gen{std::mt19937(rng()), 3, {}};
    const int root = gen.tree(4);
    const Expression e = make_expression(gen.nodes, root, 3);
    Vector x(3);
    for (Eigen::Index i = 0; i < 3; ++i)
      x(i) = std::uniform_real_distribution<double>(-1.0, 1.0)(rng);
    const DualNumber g = e.eval_with_gradient(x);
    EXPECT_NEAR(g.value, e.eval(x), 1e-12);
    for (Eigen::Index j = 0; j < 3; ++j) {
      const double h = 1e-6;
      Vector xp = x, xm = x;
      xp(j) += h;
      xm(j) -= h;
      const double fd = (e.eval(xp) - e.eval(xm)) / (2 * h);
      EXPECT_NEAR(g.partials(j), fd, 1e-5 * (1.0 + std::abs(fd)))
          << e.to_string();
    }
  }
}

TEST(Expression, PrintedFormRoundTrips) {
  std::mt19937 rng(11);
  for (int trial = 0; trial < 300; ++trial) {
    Generator gen{std::mt19937(rng()), 2, {}};
    const int root = gen.tree(4);
    const Expression e = make_expression(gen.nodes, root, 2);
    const Expression back = parse_expression(e.to_string(), 2);
    const Vector x = vec({0.37, -0.61});
    EXPECT_NEAR(back.eval(x), e.eval(x), 1e-12 * (1.0 + std::abs(e.eval(x))))
        << e.to_string();
    EXPECT_EQ(back.to_string(), e.to_string());
  }
}

TEST(ExpressionMap, StacksComponents) {
  const SmoothMap map = expression_map(
      {parse_expression("x1 * x2", 2), parse_expression("x1 - x2", 2)});
  const Vector x = vec({2.0, 3.0});
  EXPECT_EQ(map.eval(x), vec({6.0, -1.0}));
  Matrix expect(2, 2);
  expect << 3.0, 2.0, 1.0, -1.0;
  EXPECT_EQ(map.jacobian(x), expect);
  EXPECT_THROW(expression_map({}), DimensionError);
}
