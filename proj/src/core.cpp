#include "actid/core.hpp"
#include "actid/outer.hpp"

#include <cmath>
#include <cstdio>

namespace actid {

SmoothMap::SmoothMap(std::size_t n, std::size_t m, EvalFn eval,
                     JacobianFn jacobian)
    : n_(n), m_(m), eval_(std::move(eval)), jacobian_(std::move(jacobian)) {
  if (n == 0 || m == 0)
    throw DimensionError("smooth map needs n, m >= 1");
  if (!eval_ || !jacobian_)
    throw Error(ErrorCode::InvalidArgument, "smooth map callbacks missing");
}

void SmoothMap::check_input(const Vector &x) const {
  if (static_cast<std::size_t>(x.size()) != n_)
    throw DimensionError("map expects x in R^" + std::to_string(n_) +
                         ", got R^" + std::to_string(x.size()));
  if (!x.allFinite())
    throw Error(ErrorCode::InvalidArgument, "non-finite input point");
}

Vector SmoothMap::eval(const Vector &x) const {
  check_input(x);
  Vector out = eval_(x);
  if (static_cast<std::size_t>(out.size()) != m_)
    throw DimensionError("map produced wrong output dimension");
  return out;
}

Matrix SmoothMap::jacobian(const Vector &x) const {
  check_input(x);
  Matrix out = jacobian_(x);
  if (static_cast<std::size_t>(out.rows()) != m_ ||
      static_cast<std::size_t>(out.cols()) != n_)
    throw DimensionError("map produced wrong Jacobian shape");
  return out;
}

SmoothMap SmoothMap::identity(std::size_t n) {
  return SmoothMap(
      n, n, [](const Vector &x) { return x; },
      [n](const Vector &) -> Matrix {
        return Matrix::Identity(static_cast<Eigen::Index>(n),
                                static_cast<Eigen::Index>(n));
      });
}

CompositeProblem::CompositeProblem(std::string name_,
                                   std::shared_ptr<const SmoothMap> map_,
                                   std::shared_ptr<const OuterFunction> outer_,
                                   std::optional<Vector> reference_point_)
    : name(std::move(name_)), map(std::move(map_)), outer(std::move(outer_)),
      reference_point(std::move(reference_point_)) {
  if (!map || !outer)
    throw Error(ErrorCode::InvalidArgument, "problem needs a map and an outer");
  if (outer->m() != map->output_dim())
    throw DimensionError("outer function acts on R^" +
                         std::to_string(outer->m()) + " but c maps into R^" +
                         std::to_string(map->output_dim()));
  if (reference_point &&
      static_cast<std::size_t>(reference_point->size()) != map->input_dim())
    throw DimensionError("reference point has wrong dimension");
}

const Vector &CompositeProblem::require_reference() const {
  if (!reference_point)
    throw Error(ErrorCode::InvalidArgument,
                "problem '" + name + "' has no reference point");
  return *reference_point;
}

CriticalityResidual criticality_residual(const CompositeProblem &problem,
                                         const Vector &x, const Vector &c_hat,
                                         const Vector &v) {
  const auto m = static_cast<Eigen::Index>(problem.m());
  if (c_hat.size() != m || v.size() != m)
    throw DimensionError("c_hat and v must lie in R^" + std::to_string(m));
  CriticalityResidual out;
  const Matrix jac = problem.map->jacobian(x);
  out.stationarity = (jac.transpose() * v).norm();
  out.subproblem_gap = (c_hat - problem.map->eval(x)).norm();
  if (problem.reference_point) {
    const double h_hat = problem.outer->value(c_hat);
    const double h_bar =
        problem.outer->value(problem.map->eval(*problem.reference_point));
    out.value_gap = (std::isinf(h_hat) || std::isinf(h_bar))
                        ? std::numeric_limits<double>::infinity()
                        : std::abs(h_hat - h_bar);
  }
  return out;
}

MultiplierVector make_multiplier(const CompositeProblem &problem,
                                 const Vector &xbar, const Vector &v,
                                 double membership_tol) {
  MultiplierVector out;
  out.v = v;
  out.residual = (problem.map->jacobian(xbar).transpose() * v).norm();
  out.subdiff_member = problem.outer->subdiff_membership(
      problem.map->eval(xbar), v, membership_tol);
  return out;
}

double jacobian_fd_check(const SmoothMap &map, const Vector &x, double step) {
  const Matrix jac = map.jacobian(x);
  double worst = 0.0;
  Vector xp = x, xm = x;
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    xp(j) = x(j) + step;
    xm(j) = x(j) - step;
    const Vector fd = (map.eval(xp) - map.eval(xm)) / (2.0 * step);
    xp(j) = xm(j) = x(j);
    for (Eigen::Index i = 0; i < fd.size(); ++i)
      worst = std::max(worst, std::abs(jac(i, j) - fd(i)) /
                                  (1.0 + std::abs(jac(i, j))));
  }
  return worst;
}

std::string format_index_set(const IndexSet &set) {
  std::string out = "{";
  for (std::size_t i = 0; i < set.size(); ++i) {
    if (i)
      out += ",";
    out += std::to_string(set[i] + 1);
  }
  return out + "}";
}

std::string format_vector(const Vector &v, int precision) {
  std::string out = "(";
  char buf[64];
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.*g", precision, v(i) == 0.0 ? 0.0 : v(i));
    if (i)
      out += ", ";
    out += buf;
  }
  return out + ")";
}

} // namespace actid
