#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace actid {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// 0-based index set, kept sorted. Printed 1-based.
using IndexSet = std::vector<std::size_t>;

enum class ErrorCode {
  InvalidArgument = 1,
  Parse = 2,
  Numerical = 3,
  Infeasible = 4,
  Unbounded = 5,
  Unsupported = 6,
};

class Error : public std::runtime_error {
public:
  Error(ErrorCode code, const std::string &what)
      : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

private:
  ErrorCode code_;
};

class DimensionError : public Error {
public:
  explicit DimensionError(const std::string &what)
      : Error(ErrorCode::InvalidArgument, what) {}
};

class UnsupportedError : public Error {
public:
  explicit UnsupportedError(const std::string &what)
      : Error(ErrorCode::Unsupported, what) {}
};

class NumericalError : public Error {
public:
  explicit NumericalError(const std::string &what)
      : Error(ErrorCode::Numerical, what) {}
};

/// Thresholds shared across modules. All are user tunable.
struct Tolerances {
  double membership = 1e-10;
  double coverage = 1e-8;
  double residual = 1e-8;
  double feasibility = 1e-8;
};

/// The smooth inner map c : R^n -> R^m together with its Jacobian.
class SmoothMap {
public:
  using EvalFn = std::function<Vector(const Vector &)>;
  using JacobianFn = std::function<Matrix(const Vector &)>;

  SmoothMap(std::size_t n, std::size_t m, EvalFn eval, JacobianFn jacobian);

  std::size_t input_dim() const { return n_; }
  std::size_t output_dim() const { return m_; }

  Vector eval(const Vector &x) const;
  /// m x n matrix, row i is the gradient of component i.
  Matrix jacobian(const Vector &x) const;

  /// Identity map on R^n.
  static SmoothMap identity(std::size_t n);

private:
  void check_input(const Vector &x) const;

  std::size_t n_;
  std::size_t m_;
  EvalFn eval_;
  JacobianFn jacobian_;
};

class OuterFunction;

struct CompositeProblem {
  std::string name;
  std::shared_ptr<const SmoothMap> map;
  std::shared_ptr<const OuterFunction> outer;
  std::optional<Vector> reference_point;

  CompositeProblem(std::string name, std::shared_ptr<const SmoothMap> map,
                   std::shared_ptr<const OuterFunction> outer,
                   std::optional<Vector> reference_point = std::nullopt);

  std::size_t n() const { return map->input_dim(); }
  std::size_t m() const { return map->output_dim(); }
  const Vector &require_reference() const;
};

struct MultiplierVector {
  Vector v;
  double residual = 0.0; // |grad c(xbar)^* v|
  bool subdiff_member = false;

  bool valid(double tol) const { return subdiff_member && residual <= tol; }
};

struct CriticalityResidual {
  double stationarity = 0.0;   // |grad c(x)^* v|
  double subproblem_gap = 0.0; // |c_hat - c(x)|
  std::optional<double> value_gap; // |h(c_hat) - h(c(xbar))|, needs xbar
};

CriticalityResidual criticality_residual(const CompositeProblem &problem,
                                         const Vector &x, const Vector &c_hat,
                                         const Vector &v);

MultiplierVector make_multiplier(const CompositeProblem &problem,
                                 const Vector &xbar, const Vector &v,
                                 double membership_tol = 1e-8);

/// max_ij |J_ij - FD_ij| / (1 + |J_ij|) with central differences.
double jacobian_fd_check(const SmoothMap &map, const Vector &x,
                         double step = 1e-6);

std::string format_index_set(const IndexSet &set);
std::string format_vector(const Vector &v, int precision = 10);

} // namespace actid
