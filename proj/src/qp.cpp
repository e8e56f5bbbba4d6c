#include "actid/qp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace actid {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Working {
  Vector x;
  Vector y_eq;             // multipliers of the equality rows
  Vector y_in;             // multipliers of the inequality rows (0 if inactive)
  std::vector<bool> in_w;  // inequality rows in the working set
  int iterations = 0;
};

// Null-space basis of the k x n matrix M (rows independent).
Matrix null_space(const Matrix &M, Eigen::Index n) {
  if (M.rows() == 0)
    return Matrix::Identity(n, n);
  Eigen::HouseholderQR<Matrix> qr(M.transpose());
  const Matrix Q = qr.householderQ() * Matrix::Identity(n, n);
  return Q.rightCols(n - M.rows());
}

Matrix stack_rows(const Matrix &E, const Matrix &A, const std::vector<bool> &in_w,
                  std::vector<Eigen::Index> &rows_of_w) {
  rows_of_w.clear();
  for (Eigen::Index i = 0; i < A.rows(); ++i)
    if (in_w[static_cast<std::size_t>(i)])
      rows_of_w.push_back(i);
  Matrix M(E.rows() + static_cast<Eigen::Index>(rows_of_w.size()), E.cols());
  if (E.rows())
    M.topRows(E.rows()) = E;
  for (std::size_t j = 0; j < rows_of_w.size(); ++j)
    M.row(E.rows() + static_cast<Eigen::Index>(j)) = A.row(rows_of_w[j]);
  return M;
}

// Primal active-set iteration from a feasible x. Equality rows of E must be
// linearly independent. Ties in both the ratio test and the dropping rule go
// to the lowest index.
Working active_set(const Matrix &H, const Vector &g, const Matrix &E,
                   const Matrix &A, const Vector &b, Vector x,
                   const QpOptions &opt) {
  const Eigen::Index n = g.size();
  Working w;
  w.in_w.assign(static_cast<std::size_t>(A.rows()), false);
  std::vector<Eigen::Index> rows_of_w;

  for (int iter = 0; iter < opt.max_iterations; ++iter) {
    w.iterations = iter + 1;
    const Matrix M = stack_rows(E, A, w.in_w, rows_of_w);
    const Vector grad = H * x + g;
    const double gscale = std::max(1.0, grad.lpNorm<Eigen::Infinity>());
    const Matrix Z = null_space(M, n);

    Vector p = Vector::Zero(n);
    bool ray = false;
    if (Z.cols() > 0) {
      const Matrix Hz = Z.transpose() * H * Z;
      const Vector gz = Z.transpose() * grad;
      Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (Hz + Hz.transpose()));
      const Vector &ev = es.eigenvalues();
      const double escale = std::max(1.0, ev.cwiseAbs().maxCoeff());
      if (ev.minCoeff() < -1e-9 * escale)
        throw Error(ErrorCode::InvalidArgument,
                    "QP Hessian is not positive semidefinite");
      const double thr = 1e-12 * escale;
      Vector flat = Vector::Zero(Z.cols());
      Vector pz = Vector::Zero(Z.cols());
      for (Eigen::Index i = 0; i < ev.size(); ++i) {
        const Vector u = es.eigenvectors().col(i);
        const double coef = u.dot(gz);
        if (ev(i) <= thr)
          flat += coef * u;
        else
          pz -= (coef / ev(i)) * u;
      }
      if (flat.norm() > opt.tol * gscale) {
        p = -Z * flat;
        ray = true;
      } else {
        p = Z * pz;
      }
    }

    const double xscale = std::max(1.0, x.lpNorm<Eigen::Infinity>());
    if (!ray && p.lpNorm<Eigen::Infinity>() <= 1e-11 * xscale) {
      // Subspace minimizer: inspect the multipliers.
      Vector y = Vector::Zero(M.rows());
      if (M.rows() > 0)
        y = M.transpose().colPivHouseholderQr().solve(-grad);
      w.y_eq = y.head(E.rows());
      w.y_in = Vector::Zero(A.rows());
      Eigen::Index drop = -1;
      for (std::size_t j = 0; j < rows_of_w.size(); ++j) {
        const double yj = y(E.rows() + static_cast<Eigen::Index>(j));
        w.y_in(rows_of_w[j]) = yj;
        if (drop < 0 && yj < -opt.tol * gscale)
          drop = rows_of_w[j];
      }
      if (drop < 0) {
        w.x = x;
        return w;
      }
      w.in_w[static_cast<std::size_t>(drop)] = false;
      continue;
    }

    // Ratio test along p.
    double alpha = ray ? kInf : 1.0;
    Eigen::Index block = -1;
    for (Eigen::Index i = 0; i < A.rows(); ++i) {
      if (w.in_w[static_cast<std::size_t>(i)])
        continue;
      const double ap = A.row(i).dot(p);
      if (ap <= 1e-14 * std::max(1.0, A.row(i).norm() * p.norm()))
        continue;
      const double ai = std::max(0.0, (b(i) - A.row(i).dot(x)) / ap);
      if (ai < alpha - 1e-15 * std::max(1.0, ai)) {
        alpha = ai;
        block = i;
      }
    }
    if (std::isinf(alpha))
      throw QpUnbounded("QP objective is unbounded below on the feasible set");
    x += alpha * p;
    if (block >= 0)
      w.in_w[static_cast<std::size_t>(block)] = true;
  }
  throw NumericalError("QP active-set iteration limit reached");
}

// Greedy independent subset of rows, lowest index first.
std::vector<Eigen::Index> independent_rows(const Matrix &A) {
  std::vector<Eigen::Index> keep;
  Matrix acc(0, A.cols());
  for (Eigen::Index i = 0; i < A.rows(); ++i) {
    Matrix trial(acc.rows() + 1, A.cols());
    trial.topRows(acc.rows()) = acc;
    trial.row(acc.rows()) = A.row(i);
    Eigen::ColPivHouseholderQR<Matrix> qr(trial);
    qr.setThreshold(1e-10);
    if (qr.rank() == trial.rows()) {
      acc = trial;
      keep.push_back(i);
    }
  }
  return keep;
}

void validate(const QpProblem &p) {
  const Eigen::Index n = p.g.size();
  if (p.H.rows() != n || p.H.cols() != n)
    throw DimensionError("QP Hessian must be n x n");
  if (p.Aeq.cols() != n || p.Aeq.rows() != p.beq.size())
    throw DimensionError("QP equality block has inconsistent dimensions");
  if (p.Ain.cols() != n || p.Ain.rows() != p.bin.size())
    throw DimensionError("QP inequality block has inconsistent dimensions");
  if ((p.H - p.H.transpose()).cwiseAbs().maxCoeff() >
      1e-12 * std::max(1.0, p.H.cwiseAbs().maxCoeff()))
    throw Error(ErrorCode::InvalidArgument, "QP Hessian is not symmetric");
  if (!p.H.allFinite() || !p.g.allFinite() || !p.Aeq.allFinite() ||
      !p.beq.allFinite() || !p.Ain.allFinite() || !p.bin.allFinite())
    throw Error(ErrorCode::InvalidArgument, "QP data must be finite");
}

double violation(const QpProblem &p, const Vector &d) {
  double v = 0.0;
  if (p.Aeq.rows())
    v = std::max(v, (p.Aeq * d - p.beq).lpNorm<Eigen::Infinity>());
  if (p.Ain.rows())
    v = std::max(v, (p.Ain * d - p.bin).maxCoeff());
  return v;
}

// Elastic phase 1: min 1'(e+ + e- + s) over (d, e+, e-, s) with
// Aeq d + e+ - e- = beq, Ain d - s <= bin, e+, e-, s >= 0.
Vector phase_one(const QpProblem &p, const QpOptions &opt) {
  const Eigen::Index n = p.g.size(), me = p.Aeq.rows(), mi = p.Ain.rows();
  const Eigen::Index N = n + 2 * me + mi;
  const double bscale =
      std::max({1.0, me ? p.beq.lpNorm<Eigen::Infinity>() : 0.0,
                mi ? p.bin.lpNorm<Eigen::Infinity>() : 0.0});

  Matrix E = Matrix::Zero(me, N);
  E.leftCols(n) = p.Aeq;
  E.block(0, n, me, me) = Matrix::Identity(me, me);
  E.block(0, n + me, me, me) = -Matrix::Identity(me, me);

  Matrix A = Matrix::Zero(mi + 2 * me + mi, N);
  Vector b = Vector::Zero(A.rows());
  A.topLeftCorner(mi, n) = p.Ain;
  A.block(0, n + 2 * me, mi, mi) = -Matrix::Identity(mi, mi);
  b.head(mi) = p.bin;
  A.block(mi, n, 2 * me + mi, 2 * me + mi) =
      -Matrix::Identity(2 * me + mi, 2 * me + mi);

  Vector c = Vector::Zero(N);
  c.tail(2 * me + mi).setOnes();

  Vector z = Vector::Zero(N);
  for (Eigen::Index i = 0; i < me; ++i) {
    z(n + i) = std::max(p.beq(i), 0.0);
    z(n + me + i) = std::max(-p.beq(i), 0.0);
  }
  for (Eigen::Index j = 0; j < mi; ++j)
    z(n + 2 * me + j) = std::max(-p.bin(j), 0.0);

  const Working w = active_set(Matrix::Zero(N, N), c, E, A, b, z, opt);
  const double value = c.dot(w.x);
  if (value > 1e-9 * bscale) {
    Vector y_in = w.y_in.head(mi).cwiseMax(0.0);
    throw QpInfeasible("QP constraints are infeasible (phase-1 value " +
                           std::to_string(value) + ")",
                       w.y_eq, y_in, value);
  }
  return w.x.head(n);
}

} // namespace

QpProblem QpProblem::empty(std::size_t n) {
  const auto nn = static_cast<Eigen::Index>(n);
  return QpProblem{Matrix::Zero(nn, nn), Vector::Zero(nn), Matrix(0, nn),
                   Vector(0),           Matrix(0, nn),    Vector(0)};
}

QpSolution solve_qp(const QpProblem &problem, const QpOptions &opt) {
  validate(problem);
  const Eigen::Index n = problem.g.size();
  const Eigen::Index mi = problem.Ain.rows();

  Vector d = Vector::Zero(n);
  if (violation(problem, d) > 0.0)
    d = phase_one(problem, opt);

  const auto eq_rows = independent_rows(problem.Aeq);
  Matrix E(static_cast<Eigen::Index>(eq_rows.size()), n);
  for (std::size_t i = 0; i < eq_rows.size(); ++i)
    E.row(static_cast<Eigen::Index>(i)) = problem.Aeq.row(eq_rows[i]);

  const Working w = active_set(problem.H, problem.g, E, problem.Ain,
                               problem.bin, d, opt);

  QpSolution out;
  out.d = w.x;
  out.lambda_eq = Vector::Zero(problem.Aeq.rows());
  for (std::size_t i = 0; i < eq_rows.size(); ++i)
    out.lambda_eq(eq_rows[i]) = w.y_eq(static_cast<Eigen::Index>(i));
  out.mu_in = w.y_in.size() ? Vector(w.y_in.cwiseMax(0.0)) : Vector::Zero(mi);
  out.iterations = w.iterations;
  out.objective = 0.5 * out.d.dot(problem.H * out.d) + problem.g.dot(out.d);

  const double bscale =
      std::max(1.0, mi ? problem.bin.lpNorm<Eigen::Infinity>() : 0.0);
  for (Eigen::Index j = 0; j < mi; ++j)
    if (std::abs(problem.Ain.row(j).dot(out.d) - problem.bin(j)) <=
        1e-9 * bscale)
      out.active_set.push_back(static_cast<std::size_t>(j));

  Vector stat = problem.H * out.d + problem.g;
  if (problem.Aeq.rows())
    stat += problem.Aeq.transpose() * out.lambda_eq;
  if (mi)
    stat += problem.Ain.transpose() * out.mu_in;
  double res = stat.lpNorm<Eigen::Infinity>();
  res = std::max(res, violation(problem, out.d));
  for (Eigen::Index j = 0; j < mi; ++j)
    res = std::max(res, std::abs(out.mu_in(j) *
                                 (problem.bin(j) - problem.Ain.row(j).dot(out.d))));
  if (w.y_in.size())
    res = std::max(res, std::max(0.0, -w.y_in.minCoeff()));
  out.kkt_residual = res;
  return out;
}

MinNormResult min_norm_stationarity(const Vector &grad_f, const Matrix &P,
                                    const Matrix &Q, const IndexSet &J) {
  const Eigen::Index n = grad_f.size(), s = P.cols(), t = Q.cols();
  if ((s && P.rows() != n) || (t && Q.rows() != n))
    throw DimensionError("gradient columns must have length n");
  std::vector<bool> allowed(static_cast<std::size_t>(t), false);
  for (auto j : J) {
    if (static_cast<Eigen::Index>(j) >= t)
      throw Error(ErrorCode::InvalidArgument,
                  "index " + std::to_string(j + 1) + " outside 1..t");
    allowed[j] = true;
  }

  Matrix A(n, s + t);
  if (s)
    A.leftCols(s) = P;
  if (t)
    A.rightCols(t) = Q;

  QpProblem qp = QpProblem::empty(static_cast<std::size_t>(s + t));
  qp.H = 2.0 * A.transpose() * A;
  qp.g = 2.0 * A.transpose() * grad_f;
  const Eigen::Index n_off =
      t - static_cast<Eigen::Index>(std::count(allowed.begin(), allowed.end(), true));
  qp.Aeq = Matrix::Zero(n_off, s + t);
  qp.beq = Vector::Zero(n_off);
  qp.Ain = Matrix::Zero(t - n_off, s + t);
  qp.bin = Vector::Zero(t - n_off);
  Eigen::Index re = 0, ri = 0;
  for (Eigen::Index j = 0; j < t; ++j) {
    if (allowed[static_cast<std::size_t>(j)])
      qp.Ain(ri++, s + j) = -1.0;
    else
      qp.Aeq(re++, s + j) = 1.0;
  }

  const QpSolution sol = solve_qp(qp);
  MinNormResult out;
  out.lambda = sol.d.head(s);
  out.mu = sol.d.tail(t).cwiseMax(0.0);
  out.value = (grad_f + A * sol.d).squaredNorm();
  return out;
}

bool lp_feasibility_bounded(const Matrix &A, const std::vector<VarSign> &signs,
                            double tol) {
  if (static_cast<Eigen::Index>(signs.size()) != A.cols())
    throw DimensionError("one sign per column required");
  const Eigen::Index n = A.rows();

  // Nonnegative variables w; free columns are split into a +/- pair.
  std::vector<Vector> columns;
  std::vector<std::pair<Eigen::Index, double>> origin; // (column, sign)
  for (Eigen::Index k = 0; k < A.cols(); ++k) {
    switch (signs[static_cast<std::size_t>(k)]) {
    case VarSign::Zero:
      break;
    case VarSign::NonNeg:
      columns.push_back(A.col(k));
      origin.push_back({k, 1.0});
      break;
    case VarSign::NonPos:
      columns.push_back(-A.col(k));
      origin.push_back({k, -1.0});
      break;
    case VarSign::Free:
      columns.push_back(A.col(k));
      origin.push_back({k, 1.0});
      columns.push_back(-A.col(k));
      origin.push_back({k, -1.0});
      break;
    }
  }
  const auto N = static_cast<Eigen::Index>(columns.size());
  if (N == 0)
    return true;

  QpProblem lp = QpProblem::empty(static_cast<std::size_t>(N));
  lp.Aeq = Matrix(n, N);
  for (Eigen::Index k = 0; k < N; ++k)
    lp.Aeq.col(k) = columns[static_cast<std::size_t>(k)];
  lp.beq = Vector::Zero(n);
  lp.Ain = Matrix::Zero(N + 1, N);
  lp.bin = Vector::Zero(N + 1);
  lp.Ain.topRows(N) = -Matrix::Identity(N, N);
  lp.Ain.row(N).setOnes();
  lp.bin(N) = 1.0;

  for (Eigen::Index k = 0; k < A.cols(); ++k) {
    for (double direction : {1.0, -1.0}) {
      // maximize direction * z_k, z_k = sum of signed copies
      Vector gain = Vector::Zero(N);
      for (Eigen::Index j = 0; j < N; ++j)
        if (origin[static_cast<std::size_t>(j)].first == k)
          gain(j) = direction * origin[static_cast<std::size_t>(j)].second;
      if (gain.isZero())
        continue;
      lp.g = -gain;
      const QpSolution sol = solve_qp(lp);
      if (-sol.objective > tol)
        return false;
    }
  }
  return true;
}

} // namespace actid
