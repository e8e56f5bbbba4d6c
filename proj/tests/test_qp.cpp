#include "actid/qp.hpp"

#include "qp_oracle.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace actid;

namespace {

Vector vec(std::initializer_list<double> xs) {
  Vector v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs)
    v(i++) = x;
  return v;
}

double stationarity(const QpProblem &p, const QpSolution &s) {
  Vector r = p.H * s.d + p.g;
  if (p.Aeq.rows())
    r += p.Aeq.transpose() * s.lambda_eq;
  if (p.Ain.rows())
    r += p.Ain.transpose() * s.mu_in;
  return r.norm();
}

} // namespace

TEST(SolveQp, OneActiveBound) {
  QpProblem p = QpProblem::empty(3);
  p.H = Matrix::Identity(3, 3);
  p.g = vec({-1, 0, 0});
  p.Ain = Matrix::Zero(1, 3);
  p.Ain(0, 0) = 1.0;
  p.bin = vec({0.5});
  const QpSolution s = solve_qp(p);
  EXPECT_NEAR((s.d - vec({0.5, 0, 0})).norm(), 0.0, 1e-14);
  EXPECT_NEAR(s.mu_in(0), 0.5, 1e-14);
  EXPECT_EQ(s.active_set, IndexSet{0});
  EXPECT_NEAR(s.objective, 0.125 - 0.5, 1e-14);
}

TEST(SolveQp, Unconstrained) {
  QpProblem p = QpProblem::empty(2);
  p.H = Matrix::Identity(2, 2);
  p.g = vec({-1, -2});
  const QpSolution s = solve_qp(p);
  EXPECT_NEAR((s.d - vec({1, 2})).norm(), 0.0, 1e-14);
  EXPECT_TRUE(s.active_set.empty());
}

TEST(SolveQp, TwoCircleSubproblemMatchesOracle) {
  // min grad f.d + 1/2|d|^2 s.t. q_j(x) + grad q_j(x).d <= 0 at x = (0.99, 0).
  const double x1 = 0.99;
  QpProblem p = QpProblem::empty(2);
  p.H = Matrix::Identity(2, 2);
  p.g = vec({-1, 0});
  p.Ain = Matrix(2, 2);
  p.Ain << 2 * x1, 0, 2 * (x1 + 1), 0;
  p.bin = vec({-(x1 * x1 - 1), -((x1 + 1) * (x1 + 1) - 4)});
  const QpSolution s = solve_qp(p);
  const auto oracle = actid::testing::brute_force_qp(p);
  ASSERT_TRUE(oracle.has_value());
  EXPECT_NEAR(s.d(0), 0.01002513, 1e-8);
  EXPECT_EQ(s.d(1), 0.0);
  EXPECT_NEAR((s.d - oracle->d).norm(), 0.0, 1e-12);
  EXPECT_EQ(s.active_set, IndexSet{1});
  EXPECT_EQ(oracle->mask, 2u);
}

TEST(SolveQp, RandomProblemsMatchBruteForce) {
  std::mt19937 rng(20240611);
  for (int trial = 0; trial < 200; ++trial) {
    const QpProblem p = actid::testing::random_strictly_convex_qp(rng);
    const auto oracle = actid::testing::brute_force_qp(p);
    ASSERT_TRUE(oracle.has_value()) << trial;
    const QpSolution s = solve_qp(p);
    EXPECT_NEAR(s.objective, oracle->objective,
                1e-8 * std::max(1.0, std::abs(oracle->objective)))
        << "trial " << trial;
    EXPECT_LE(s.kkt_residual, 1e-8) << trial;
    EXPECT_LE(stationarity(p, s), 1e-8) << trial;
    if (p.Ain.rows()) {
      EXPECT_GE(s.mu_in.minCoeff(), -1e-10) << trial;
      const Vector slack = p.bin - p.Ain * s.d;
      EXPECT_GE(slack.minCoeff(), -1e-8) << trial;
      EXPECT_LE(s.mu_in.cwiseProduct(slack).cwiseAbs().maxCoeff(), 1e-8) << trial;
    }
    if (p.Aeq.rows())
      EXPECT_LE((p.Aeq * s.d - p.beq).norm(), 1e-8) << trial;
  }
}

TEST(SolveQp, DependentEqualitiesAreTolerated) {
  QpProblem p = QpProblem::empty(2);
  p.H = Matrix::Identity(2, 2);
  p.g = vec({0, 0});
  p.Aeq = Matrix(2, 2);
  p.Aeq << 1, 1, 2, 2;
  p.beq = vec({1, 2});
  const QpSolution s = solve_qp(p);
  EXPECT_NEAR((s.d - vec({0.5, 0.5})).norm(), 0.0, 1e-12);
  EXPECT_LE(stationarity(p, s), 1e-10);
}

TEST(SolveQp, InfeasibleHasFarkasCertificate) {
  QpProblem p = QpProblem::empty(2);
  p.H = Matrix::Identity(2, 2);
  p.g = vec({0, 0});
  p.Ain = Matrix(2, 2);
  p.Ain << 1, 0, -1, 0;
  p.bin = vec({-1, -1}); // d1 <= -1 and d1 >= 1
  try {
    solve_qp(p);
    FAIL() << "expected infeasibility";
  } catch (const QpInfeasible &e) {
    EXPECT_EQ(e.code(), ErrorCode::Infeasible);
    EXPECT_GE(e.y_in.minCoeff(), -1e-12);
    EXPECT_LE((p.Ain.transpose() * e.y_in).norm(), 1e-9);
    EXPECT_LT(p.bin.dot(e.y_in), 0.0);
    EXPECT_GT(e.violation, 0.0);
  }
  QpProblem eq = QpProblem::empty(1);
  eq.Aeq = Matrix::Ones(2, 1);
  eq.beq = vec({0, 1});
  EXPECT_THROW(solve_qp(eq), QpInfeasible);
}

TEST(SolveQp, UnboundedAndInvalidInputs) {
  QpProblem lp = QpProblem::empty(2);
  lp.g = vec({-1, 0});
  EXPECT_THROW(solve_qp(lp), QpUnbounded);
  lp.Ain = Matrix(1, 2);
  lp.Ain << 1, 0;
  lp.bin = vec({2});
  const QpSolution bounded = solve_qp(lp);
  EXPECT_NEAR(bounded.d(0), 2.0, 1e-12);

  QpProblem bad = QpProblem::empty(2);
  bad.H = -Matrix::Identity(2, 2);
  EXPECT_THROW(solve_qp(bad), Error);
  QpProblem shape = QpProblem::empty(2);
  shape.H = Matrix::Identity(3, 3);
  EXPECT_THROW(solve_qp(shape), Error);
}

TEST(MinNorm, TwoCircleEndpoints) {
  const Vector grad_f = vec({-1, 0});
  Matrix Q(2, 2);
  Q << 2, 4, 0, 0;
  const Matrix P(2, 0);
  const auto j2 = min_norm_stationarity(grad_f, P, Q, {1});
  EXPECT_NEAR(j2.value, 0.0, 1e-14);
  EXPECT_NEAR(j2.mu(0), 0.0, 1e-12);
  EXPECT_NEAR(j2.mu(1), 0.25, 1e-12);
  const auto j1 = min_norm_stationarity(grad_f, P, Q, {0});
  EXPECT_NEAR(j1.value, 0.0, 1e-14);
  EXPECT_NEAR(j1.mu(0), 0.5, 1e-12);
  EXPECT_NEAR(j1.mu(1), 0.0, 1e-12);
  const auto none = min_norm_stationarity(grad_f, P, Q, {});
  EXPECT_NEAR(none.value, 1.0, 1e-14);
  EXPECT_EQ(none.mu, Vector::Zero(2));
}

TEST(MinNorm, MonotoneInTheSupport) {
  std::mt19937 rng(9);
  std::uniform_real_distribution<double> U(-1, 1);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 3, s = trial % 2, t = 4;
    Vector g(n);
    Matrix P(n, s), Q(n, t);
    for (int i = 0; i < n; ++i) {
      g(i) = U(rng);
      for (int j = 0; j < s; ++j)
        P(i, j) = U(rng);
      for (int j = 0; j < t; ++j)
        Q(i, j) = U(rng);
    }
    std::vector<double> values(1u << t);
    for (unsigned mask = 0; mask < (1u << t); ++mask) {
      IndexSet J;
      for (int j = 0; j < t; ++j)
        if (mask & (1u << j))
          J.push_back(static_cast<std::size_t>(j));
      const auto r = min_norm_stationarity(g, P, Q, J);
      values[mask] = r.value;
      EXPECT_NEAR(r.value, (g + P * r.lambda + Q * r.mu).squaredNorm(), 1e-10);
      for (int j = 0; j < t; ++j) {
        EXPECT_GE(r.mu(j), -1e-12);
        if (!(mask & (1u << j)))
          EXPECT_EQ(r.mu(j), 0.0);
      }
    }
    for (unsigned a = 0; a < values.size(); ++a)
      for (unsigned b = 0; b < values.size(); ++b)
        if ((a & b) == a)
          EXPECT_LE(values[b], values[a] + 1e-10) << a << " within " << b;
  }
}

TEST(LpFeasibility, Examples) {
  Matrix two_circle(2, 2);
  two_circle << 2, 4, 0, 0;
  EXPECT_TRUE(lp_feasibility_bounded(two_circle, {VarSign::NonNeg, VarSign::NonNeg}));
  // A free sign admits (2, -1).
  EXPECT_FALSE(lp_feasibility_bounded(two_circle, {VarSign::Free, VarSign::NonNeg}));
  Matrix opposing(1, 2);
  opposing << 1, -1;
  EXPECT_FALSE(lp_feasibility_bounded(opposing, {VarSign::NonNeg, VarSign::NonNeg}));
  EXPECT_TRUE(lp_feasibility_bounded(opposing, {VarSign::NonNeg, VarSign::Zero}));
  EXPECT_TRUE(lp_feasibility_bounded(opposing, {VarSign::NonNeg, VarSign::NonPos}));
  EXPECT_TRUE(lp_feasibility_bounded(Matrix(2, 0), {}));
  EXPECT_FALSE(lp_feasibility_bounded(Matrix::Zero(2, 1), {VarSign::Free}));
}
