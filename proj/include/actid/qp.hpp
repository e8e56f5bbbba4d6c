#pragma once

#include "actid/core.hpp"

namespace actid {

/// min 1/2 d'Hd + g'd  s.t.  Aeq d = beq,  Ain d <= bin.
struct QpProblem {
  Matrix H;
  Vector g;
  Matrix Aeq;
  Vector beq;
  Matrix Ain;
  Vector bin;

  /// Unconstrained problem on R^n with H = 0, g = 0 and empty constraint
  /// blocks of the right width.
  static QpProblem empty(std::size_t n);
  std::size_t n() const { return static_cast<std::size_t>(g.size()); }
};

/// KKT convention: H d + g + Aeq' lambda_eq + Ain' mu_in = 0, mu_in >= 0.
struct QpSolution {
  Vector d;
  Vector lambda_eq;
  Vector mu_in;
  IndexSet active_set;
  double objective = 0.0;
  double kkt_residual = 0.0;
  int iterations = 0;
};

/// Thrown when the constraints admit no point. The certificate (y_eq, y_in)
/// satisfies Aeq'y_eq + Ain'y_in = 0, y_in >= 0 and beq'y_eq + bin'y_in < 0.
class QpInfeasible : public Error {
public:
  QpInfeasible(const std::string &what, Vector y_eq, Vector y_in,
               double violation)
      : Error(ErrorCode::Infeasible, what), y_eq(std::move(y_eq)),
        y_in(std::move(y_in)), violation(violation) {}
  Vector y_eq;
  Vector y_in;
  double violation; // optimal phase-1 value
};

class QpUnbounded : public Error {
public:
  explicit QpUnbounded(const std::string &what)
      : Error(ErrorCode::Unbounded, what) {}
};

struct QpOptions {
  double tol = 1e-10;
  int max_iterations = 5000;
};

/// Primal active-set method on a positive semidefinite H. A phase-1 linear
/// program with elastic slacks finds the starting point.
QpSolution solve_qp(const QpProblem &problem, const QpOptions &options = {});

/// Sign restriction on one variable of a homogeneous system.
enum class VarSign { Free, NonNeg, NonPos, Zero };

struct MinNormResult {
  double value = 0.0; // |grad_f + P lambda + Q mu|^2 at the optimum
  Vector lambda;
  Vector mu;
};

/// min over lambda free, mu >= 0, mu_j = 0 off J of |grad_f + P lambda + Q mu|^2.
/// Columns of P are equality gradients, columns of Q inequality gradients.
MinNormResult min_norm_stationarity(const Vector &grad_f, const Matrix &P,
                                    const Matrix &Q, const IndexSet &J);

/// True iff z = 0 is the only solution of A z = 0 with the sign pattern.
/// Each coordinate is maximized over the system intersected with |z|_1 <= 1.
bool lp_feasibility_bounded(const Matrix &A, const std::vector<VarSign> &signs,
                            double tol = 1e-9);

} // namespace actid
