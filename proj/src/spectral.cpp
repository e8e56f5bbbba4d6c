#include "actid/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace actid {

namespace {

double off_diagonal_norm(const Matrix &a) {
  double acc = 0.0;
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      if (i != j)
        acc += a(i, j) * a(i, j);
  return std::sqrt(acc);
}

void check_square_symmetric(const Matrix &a) {
  if (a.rows() != a.cols() || a.rows() == 0)
    throw DimensionError("expected a nonempty square matrix");
  if ((a - a.transpose()).cwiseAbs().maxCoeff() > 1e-12 * (1.0 + a.norm()))
    throw Error(ErrorCode::InvalidArgument, "matrix is not symmetric");
}

} // namespace

Eigensystem jacobi_eigen(const Matrix &symmetric, double offdiag_tol) {
  check_square_symmetric(symmetric);
  const Eigen::Index k = symmetric.rows();
  Matrix a = 0.5 * (symmetric + symmetric.transpose());
  Matrix v = Matrix::Identity(k, k);
  const double threshold = offdiag_tol * std::max(1.0, a.norm());

  for (int sweep = 0; sweep < 100 && off_diagonal_norm(a) > threshold;
       ++sweep) {
    for (Eigen::Index p = 0; p < k - 1; ++p) {
      for (Eigen::Index q = p + 1; q < k; ++q) {
        if (a(p, q) == 0.0)
          continue;
        // Rotation annihilating a(p,q), numerically stable form.
        const double theta = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (Eigen::Index i = 0; i < k; ++i) {
          const double aip = a(i, p), aiq = a(i, q);
          a(i, p) = c * aip - s * aiq;
          a(i, q) = s * aip + c * aiq;
        }
        for (Eigen::Index i = 0; i < k; ++i) {
          const double api = a(p, i), aqi = a(q, i);
          a(p, i) = c * api - s * aqi;
          a(q, i) = s * api + c * aqi;
        }
        for (Eigen::Index i = 0; i < k; ++i) {
          const double vip = v(i, p), viq = v(i, q);
          v(i, p) = c * vip - s * viq;
          v(i, q) = s * vip + c * viq;
        }
      }
    }
  }
  if (off_diagonal_norm(a) > threshold)
    throw NumericalError("Jacobi iteration did not converge");

  std::vector<Eigen::Index> order(static_cast<std::size_t>(k));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index i, Eigen::Index j) { return a(i, i) > a(j, j); });
  Eigensystem out{Vector(k), Matrix(k, k)};
  for (Eigen::Index i = 0; i < k; ++i) {
    out.values(i) = a(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(i)]);
    out.vectors.col(i) = v.col(order[static_cast<std::size_t>(i)]);
  }
  return out;
}

std::size_t packed_size(std::size_t k) { return k * (k + 1) / 2; }

std::size_t matrix_order(std::size_t m) {
  std::size_t k = 0;
  while (packed_size(k) < m)
    ++k;
  if (packed_size(k) != m || k == 0)
    throw DimensionError(std::to_string(m) +
                         " is not the packed size of a symmetric matrix");
  return k;
}

Vector svec(const Matrix &symmetric) {
  const Eigen::Index k = symmetric.rows();
  Vector out(static_cast<Eigen::Index>(packed_size(static_cast<std::size_t>(k))));
  Eigen::Index pos = 0;
  for (Eigen::Index i = 0; i < k; ++i)
    for (Eigen::Index j = i; j < k; ++j)
      out(pos++) = i == j ? symmetric(i, j)
                          : std::sqrt(2.0) * 0.5 * (symmetric(i, j) + symmetric(j, i));
  return out;
}

Matrix smat(const Vector &packed, std::size_t k) {
  if (static_cast<std::size_t>(packed.size()) != packed_size(k))
    throw DimensionError("packed vector has wrong length for order " +
                         std::to_string(k));
  const auto n = static_cast<Eigen::Index>(k);
  Matrix out(n, n);
  Eigen::Index pos = 0;
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i; j < n; ++j) {
      const double val = i == j ? packed(pos) : packed(pos) / std::sqrt(2.0);
      out(i, j) = out(j, i) = val;
      ++pos;
    }
  return out;
}

// ---------------------------------------------------------------------------

SpectralPoint SpectralPoint::from_matrices(const Matrix &X, const Matrix &Y,
                                           double multiplicity_tol) {
  check_square_symmetric(X);
  check_square_symmetric(Y);
  if (X.rows() != Y.rows())
    throw DimensionError("X and Y must have the same order");
  const Eigen::Index k = X.rows();

  const Eigensystem ex = jacobi_eigen(X);
  std::size_t p = 1;
  while (static_cast<Eigen::Index>(p) < k &&
         ex.values(0) - ex.values(static_cast<Eigen::Index>(p)) <= multiplicity_tol)
    ++p;

  // Rotate inside the top eigenspace so that Y is diagonal there too.
  Matrix basis = ex.vectors; // columns
  const auto pp = static_cast<Eigen::Index>(p);
  if (p > 1) {
    const Matrix top = basis.leftCols(pp);
    const Matrix compressed = top.transpose() * Y * top;
    const Eigensystem ey = jacobi_eigen(0.5 * (compressed + compressed.transpose()));
    basis.leftCols(pp) = top * ey.vectors;
  }

  SpectralPoint out;
  out.X = X;
  out.Y = Y;
  out.U = basis.transpose();
  out.multiplicity = p;
  // Jacobi eigenvalues are more accurate than the re-projected diagonal.
  out.x = ex.values;
  out.y = (out.U * Y * out.U.transpose()).diagonal();
  return out;
}

double SpectralPoint::decomposition_error() const {
  const Matrix rx = U.transpose() * x.asDiagonal() * U;
  const Matrix ry = U.transpose() * y.asDiagonal() * U;
  return std::max((X - rx).norm(), (Y - ry).norm());
}

SpectralProjection spectral_piece_distance(const SpectralPoint &point,
                                           std::size_t m, std::size_t r) {
  const std::size_t k = point.k();
  if (!(1 <= r && r <= m && m <= k))
    throw Error(ErrorCode::InvalidArgument,
                "spectral piece needs 1 <= r <= m <= k");
  const auto mm = static_cast<Eigen::Index>(m);

  SpectralProjection out;
  out.x_tilde = point.x;
  out.x_tilde.head(mm).setConstant(point.x.head(mm).mean());

  // Keep the r largest entries of y (ties by index) and project them onto
  // the unit simplex. Plain rescaling is feasible but not nearest once two
  // or more entries survive.
  std::vector<Eigen::Index> order(k);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index i, Eigen::Index j) {
    return point.y(i) > point.y(j);
  });
  double kept = 0.0, prefix = 0.0, shift = 0.0;
  for (std::size_t i = 0; i < r; ++i) {
    const double yi = point.y(order[i]);
    kept += std::max(yi, 0.0);
    // Sorted descending, so the active count is the last i with a positive entry.
    prefix += yi;
    const double t = (prefix - 1.0) / static_cast<double>(i + 1);
    if (yi - t > 0.0)
      shift = t;
  }
  out.y_tilde = Vector::Zero(static_cast<Eigen::Index>(k));
  for (std::size_t i = 0; i < r; ++i)
    out.y_tilde(order[i]) = std::max(point.y(order[i]) - shift, 0.0);
  out.rescale_fallback = !(kept > 0.0);

  out.distance = std::sqrt((point.x - out.x_tilde).squaredNorm() +
                           (point.y - out.y_tilde).squaredNorm());
  out.X = point.U.transpose() * out.x_tilde.asDiagonal() * point.U;
  out.Y = point.U.transpose() * out.y_tilde.asDiagonal() * point.U;
  out.X = 0.5 * (out.X + out.X.transpose());
  out.Y = 0.5 * (out.Y + out.Y.transpose());
  return out;
}

bool in_max_eig_graph(const Matrix &X, const Matrix &Y, double tol) {
  const Eigensystem ey = jacobi_eigen(Y);
  if (ey.values.minCoeff() < -tol)
    return false;
  if (std::abs(Y.trace() - 1.0) > tol)
    return false;
  const double lmax = jacobi_eigen(X).values(0);
  return std::abs((X * Y).trace() - lmax) <= tol;
}

bool in_spectral_piece(const Matrix &X, const Matrix &Y, std::size_t m,
                       std::size_t r, double tol, double multiplicity_tol) {
  if (!in_max_eig_graph(X, Y, tol))
    return false;
  const Eigensystem ex = jacobi_eigen(X);
  const auto k = static_cast<std::size_t>(X.rows());
  if (m > k)
    return false;
  if (ex.values(0) - ex.values(static_cast<Eigen::Index>(m - 1)) > multiplicity_tol)
    return false;
  const Eigensystem ey = jacobi_eigen(Y);
  for (std::size_t i = r; i < k; ++i)
    if (std::abs(ey.values(static_cast<Eigen::Index>(i))) > tol)
      return false;
  return true;
}

// ---------------------------------------------------------------------------

SpectralPiece::SpectralPiece(std::size_t k, std::size_t m, std::size_t r)
    : SpectralPiece("G_" + std::to_string(m) + "_" + std::to_string(r), k, m,
                    r) {}

SpectralPiece::SpectralPiece(std::string id, std::size_t k, std::size_t m,
                             std::size_t r)
    : GraphPiece(std::move(id), packed_size(k),
                 "gph(d lambda_max) with multiplicity >= " + std::to_string(m) +
                     " and rank(Y) <= " + std::to_string(r)),
      k_(k), mult_(m), rank_(r) {
  if (!(1 <= r && r <= m && m <= k))
    throw Error(ErrorCode::InvalidArgument,
                "spectral piece needs 1 <= r <= m <= k");
}

double SpectralPiece::distance(const Vector &c, const Vector &v) const {
  check_dims(c, v);
  // Equal to the eigenvalue formula on graph points; off the graph the
  // direct Frobenius gap to the constructed point is an upper bound.
  const Matrix X = smat(c, k_), Y = smat(v, k_);
  const auto point = SpectralPoint::from_matrices(X, Y);
  const auto proj = spectral_piece_distance(point, mult_, rank_);
  return std::sqrt((X - proj.X).squaredNorm() + (Y - proj.Y).squaredNorm());
}

std::pair<Vector, Vector> SpectralPiece::project(const Vector &c,
                                                 const Vector &v) const {
  check_dims(c, v);
  const auto point = SpectralPoint::from_matrices(smat(c, k_), smat(v, k_));
  const auto proj = spectral_piece_distance(point, mult_, rank_);
  return {svec(proj.X), svec(proj.Y)};
}

bool SpectralPiece::contains(const Vector &c, const Vector &v,
                             double tol) const {
  check_dims(c, v);
  return in_spectral_piece(smat(c, k_), smat(v, k_), mult_, rank_, tol);
}

PiecePtr SpectralPiece::relabel(const std::string &id) const {
  return std::make_shared<SpectralPiece>(id, k_, mult_, rank_);
}

} // namespace actid
