#pragma once

#include "actid/graph.hpp"

namespace actid {

/// Eigenpairs of a symmetric matrix, values nonincreasing, vectors as columns.
struct Eigensystem {
  Vector values;
  Matrix vectors;
};

/// Cyclic Jacobi rotations until the off-diagonal Frobenius norm drops below
/// offdiag_tol * max(1, |A|_F). Ties in the sort keep the original order.
Eigensystem jacobi_eigen(const Matrix &symmetric, double offdiag_tol = 1e-12);

/// Packed upper triangle, off-diagonals scaled by sqrt(2) so that
/// <svec(X), svec(Y)> = trace(XY).
Vector svec(const Matrix &symmetric);
Matrix smat(const Vector &packed, std::size_t k);
std::size_t packed_size(std::size_t k);
/// Inverse of packed_size; throws when m is not triangular.
std::size_t matrix_order(std::size_t m);

/// A pair (X, Y) with a simultaneous spectral decomposition
/// X = U^T Diag(x) U, Y = U^T Diag(y) U (rows of U are eigenvectors).
struct SpectralPoint {
  Matrix X;
  Matrix Y;
  Matrix U;
  Vector x; // nonincreasing
  Vector y;
  std::size_t multiplicity = 0; // of the largest component of x

  static SpectralPoint from_matrices(const Matrix &X, const Matrix &Y,
                                     double multiplicity_tol = 1e-8);
  std::size_t k() const { return static_cast<std::size_t>(X.rows()); }
  /// max(|X - U^T Diag(x) U|, |Y - U^T Diag(y) U|) in Frobenius norm.
  double decomposition_error() const;
};

struct SpectralProjection {
  double distance = 0.0;
  Vector x_tilde;
  Vector y_tilde;
  Matrix X;
  Matrix Y;
  /// Set when no retained y entry was positive, so y_tilde is a uniform
  /// weight on the retained slots (only reachable for points off the graph).
  bool rescale_fallback = false;
};

SpectralProjection spectral_piece_distance(const SpectralPoint &point,
                                           std::size_t m, std::size_t r);

/// Y in the subdifferential of lambda_max at X.
bool in_max_eig_graph(const Matrix &X, const Matrix &Y, double tol);
/// (X, Y) in G_{m,r}: graph point, multiplicity >= m, rank(Y) <= r.
bool in_spectral_piece(const Matrix &X, const Matrix &Y, std::size_t m,
                       std::size_t r, double tol,
                       double multiplicity_tol = 1e-8);

/// G_{m,r} as a graph piece over svec coordinates. Distances are exact for
/// graph points; off the graph the same construction gives an upper estimate.
class SpectralPiece final : public GraphPiece {
public:
  SpectralPiece(std::size_t k, std::size_t m, std::size_t r);
  SpectralPiece(std::string id, std::size_t k, std::size_t m, std::size_t r);

  PieceKind kind() const override { return PieceKind::Spectral; }
  double distance(const Vector &c, const Vector &v) const override;
  std::pair<Vector, Vector> project(const Vector &c,
                                    const Vector &v) const override;
  bool contains(const Vector &c, const Vector &v, double tol) const override;
  PiecePtr relabel(const std::string &id) const override;

  std::size_t order() const { return k_; }
  std::size_t multiplicity_bound() const { return mult_; }
  std::size_t rank_bound() const { return rank_; }

private:
  std::size_t k_;
  std::size_t mult_;
  std::size_t rank_;
};

} // namespace actid
