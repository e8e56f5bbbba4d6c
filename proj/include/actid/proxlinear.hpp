#pragma once

#include "actid/core.hpp"

namespace actid {

/// One prox-linear step at x:
///   d = argmin h(c(x) + grad c(x) d) + mu/2 |d|^2,
/// with the multiplier v in dh(c_hat) satisfying grad c(x)^* v + mu d = 0.
struct ProxStep {
  Vector x;
  double mu = 1.0;
  Vector d;
  Vector c_x;
  Vector c_hat;
  Vector v;
  double stationarity_residual = 0.0; // |grad c(x)^* v + mu d|
  double h_value_at_chat = 0.0;
  std::optional<double> ratio;        // |d| / |x - xbar| when xbar is known
};

ProxStep solve_prox_subproblem(const CompositeProblem &problem, const Vector &x,
                               double mu);

struct ProxSequence {
  std::vector<ProxStep> steps;
  /// Set when mu_r |x_r - xbar| increases somewhere along the run.
  bool hypothesis_warning = false;
};

ProxSequence run_prox_sequence(const CompositeProblem &problem,
                               const std::vector<Vector> &points,
                               const std::vector<double> &mus);

/// x_r = xbar + eps_r u with eps_r = eps0 * shrink^r, r = 0..steps-1.
struct Schedule {
  double eps0 = 0.1;
  double shrink = 0.5;
  std::size_t steps = 16;
  double mu = 1.0;
  std::optional<Vector> direction; // defaults to -e_1

  std::vector<double> epsilons() const;
  std::vector<Vector> points(const Vector &xbar) const;
};

} // namespace actid
