#include "actid/proxlinear.hpp"
#include "actid/outer.hpp"
#include "actid/qp.hpp"

#include <cmath>

namespace actid {

namespace {

using Type = ScalarTerm::Type;

// Separable polyhedral h as a QP in (d, sigma). Each Abs/Pos term gets one
// epigraph slack sigma_i >= |c_hat_i| (resp. max(c_hat_i, 0)); v_i is read
// off the duals of the rows that touch coordinate i.
void solve_separable(const SeparableOuter &h, const Vector &c, const Matrix &B,
                     double mu, Vector &d, Vector &v) {
  const auto &terms = *h.separable_terms();
  const Eigen::Index n = B.cols();
  const auto m = static_cast<Eigen::Index>(terms.size());

  Eigen::Index slacks = 0, eq = 0, in = 0;
  for (const auto &t : terms) {
    switch (t.type) {
    case Type::Zero:
      ++eq;
      break;
    case Type::NonPos:
    case Type::NonNeg:
      ++in;
      break;
    case Type::Abs:
    case Type::Pos:
      ++slacks;
      in += 2;
      break;
    case Type::Linear:
      break;
    }
  }

  const Eigen::Index N = n + slacks;
  QpProblem qp = QpProblem::empty(static_cast<std::size_t>(N));
  qp.H.topLeftCorner(n, n) = mu * Matrix::Identity(n, n);
  qp.Aeq = Matrix::Zero(eq, N);
  qp.beq = Vector::Zero(eq);
  qp.Ain = Matrix::Zero(in, N);
  qp.bin = Vector::Zero(in);

  struct RowMap {
    Eigen::Index eq = -1, plus = -1, minus = -1;
  };
  std::vector<RowMap> rows(static_cast<std::size_t>(m));
  Eigen::Index re = 0, ri = 0, rs = n;
  for (Eigen::Index i = 0; i < m; ++i) {
    const auto &t = terms[static_cast<std::size_t>(i)];
    auto &map = rows[static_cast<std::size_t>(i)];
    switch (t.type) {
    case Type::Linear:
      qp.g.head(n) += t.weight * B.row(i).transpose();
      break;
    case Type::Zero: // c + B d = 0
      qp.Aeq.row(re).head(n) = B.row(i);
      qp.beq(re) = -c(i);
      map.eq = re++;
      break;
    case Type::NonPos: // c + B d <= 0
      qp.Ain.row(ri).head(n) = B.row(i);
      qp.bin(ri) = -c(i);
      map.plus = ri++;
      break;
    case Type::NonNeg: // -(c + B d) <= 0
      qp.Ain.row(ri).head(n) = -B.row(i);
      qp.bin(ri) = c(i);
      map.minus = ri++;
      break;
    case Type::Abs: // +-(c + B d) <= sigma
      qp.g(rs) = t.weight;
      qp.Ain.row(ri).head(n) = B.row(i);
      qp.Ain(ri, rs) = -1.0;
      qp.bin(ri) = -c(i);
      map.plus = ri++;
      qp.Ain.row(ri).head(n) = -B.row(i);
      qp.Ain(ri, rs) = -1.0;
      qp.bin(ri) = c(i);
      map.minus = ri++;
      ++rs;
      break;
    case Type::Pos: // c + B d <= sigma, 0 <= sigma
      qp.g(rs) = t.weight;
      qp.Ain.row(ri).head(n) = B.row(i);
      qp.Ain(ri, rs) = -1.0;
      qp.bin(ri) = -c(i);
      map.plus = ri++;
      qp.Ain(ri, rs) = -1.0;
      ++ri;
      ++rs;
      break;
    }
  }

  QpSolution sol;
  try {
    sol = solve_qp(qp);
  } catch (const QpInfeasible &) {
    throw Error(ErrorCode::Infeasible,
                "linearized constraints are infeasible at this point; "
                "reformulate with l1_exact_penalty(s,t,nu)");
  }

  d = sol.d.head(n);
  v = Vector::Zero(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const auto &t = terms[static_cast<std::size_t>(i)];
    const auto &map = rows[static_cast<std::size_t>(i)];
    switch (t.type) {
    case Type::Linear:
      v(i) = t.weight;
      break;
    case Type::Zero:
      v(i) = sol.lambda_eq(map.eq);
      break;
    case Type::NonPos:
      v(i) = sol.mu_in(map.plus);
      break;
    case Type::NonNeg:
      v(i) = -sol.mu_in(map.minus);
      break;
    case Type::Abs:
      v(i) = sol.mu_in(map.plus) - sol.mu_in(map.minus);
      break;
    case Type::Pos:
      v(i) = sol.mu_in(map.plus);
      break;
    }
  }
}

// min |c + B d| + mu/2 |d|^2 through its dual
//   max_{|v| <= 1} <v, c> - |B^T v|^2 / (2 mu).
// Optimality: (K + tau I) v = c with K = B B^T / mu, tau = |c_hat| >= 0.
void solve_norm(const Vector &c, const Matrix &B, double mu, Vector &d,
                Vector &v) {
  const Matrix K = B * B.transpose() / mu;
  Eigen::SelfAdjointEigenSolver<Matrix> es(K);
  const Vector kappa = es.eigenvalues().cwiseMax(0.0);
  const Vector coef = es.eigenvectors().transpose() * c;
  const double thr = 1e-12 * std::max(1.0, kappa.maxCoeff());
  const double cnorm = c.norm();

  auto v_of = [&](double tau) {
    Vector w(coef.size());
    for (Eigen::Index i = 0; i < coef.size(); ++i)
      w(i) = (kappa(i) + tau > thr) ? coef(i) / (kappa(i) + tau) : 0.0;
    return Vector(es.eigenvectors() * w);
  };

  // tau = 0 is optimal when c lies in range(K) with |K^+ c| <= 1.
  double residual0 = 0.0;
  for (Eigen::Index i = 0; i < coef.size(); ++i)
    if (kappa(i) <= thr)
      residual0 = std::hypot(residual0, coef(i));
  const Vector v0 = v_of(0.0);
  if (residual0 <= 1e-14 * std::max(1.0, cnorm) && v0.norm() <= 1.0) {
    v = v0;
  } else {
    // |v(tau)| decreases in tau and |v(|c|)| <= 1.
    double lo = 0.0, hi = cnorm;
    for (int it = 0; it < 300 && hi - lo > 1e-15 * std::max(1.0, cnorm); ++it) {
      const double mid = 0.5 * (lo + hi);
      if (v_of(mid).norm() > 1.0)
        lo = mid;
      else
        hi = mid;
    }
    v = v_of(hi);
    const double nv = v.norm();
    if (nv > 0.0)
      v /= nv;
  }
  d = -B.transpose() * v / mu;
}

} // namespace

ProxStep solve_prox_subproblem(const CompositeProblem &problem, const Vector &x,
                               double mu) {
  if (!(mu > 0.0) || !std::isfinite(mu))
    throw Error(ErrorCode::InvalidArgument, "prox parameter mu must be > 0");
  const OuterFunction &h = *problem.outer;

  ProxStep step;
  step.x = x;
  step.mu = mu;
  step.c_x = problem.map->eval(x);
  const Matrix B = problem.map->jacobian(x);

  if (const auto *sep = dynamic_cast<const SeparableOuter *>(&h)) {
    solve_separable(*sep, step.c_x, B, mu, step.d, step.v);
  } else if (h.kind() == OuterKind::EuclidNorm) {
    solve_norm(step.c_x, B, mu, step.d, step.v);
  } else {
    throw UnsupportedError("prox-linear subproblem is not available for " +
                           h.spec() + " (convex polyhedral or norm h only)");
  }

  step.c_hat = step.c_x + B * step.d;
  step.stationarity_residual = (B.transpose() * step.v + mu * step.d).norm();
  step.h_value_at_chat = h.value(step.c_hat);
  if (problem.reference_point) {
    const double dist = (x - *problem.reference_point).norm();
    if (dist > 0.0)
      step.ratio = step.d.norm() / dist;
  }
  return step;
}

ProxSequence run_prox_sequence(const CompositeProblem &problem,
                               const std::vector<Vector> &points,
                               const std::vector<double> &mus) {
  if (points.size() != mus.size())
    throw Error(ErrorCode::InvalidArgument,
                "point and mu schedules differ in length");
  ProxSequence out;
  double previous = -1.0;
  for (std::size_t r = 0; r < points.size(); ++r) {
    out.steps.push_back(solve_prox_subproblem(problem, points[r], mus[r]));
    if (problem.reference_point) {
      const double product =
          mus[r] * (points[r] - *problem.reference_point).norm();
      if (previous >= 0.0 && product > previous)
        out.hypothesis_warning = true;
      previous = product;
    }
  }
  return out;
}

std::vector<double> Schedule::epsilons() const {
  std::vector<double> out;
  double eps = eps0;
  for (std::size_t r = 0; r < steps; ++r) {
    out.push_back(eps);
    eps *= shrink;
  }
  return out;
}

std::vector<Vector> Schedule::points(const Vector &xbar) const {
  Vector u;
  if (direction) {
    if (direction->size() != xbar.size())
      throw DimensionError("schedule direction must have length n");
    u = *direction;
  } else {
    u = Vector::Zero(xbar.size());
    u(0) = -1.0;
  }
  std::vector<Vector> out;
  for (double eps : epsilons())
    out.push_back(xbar + eps * u);
  return out;
}

} // namespace actid
