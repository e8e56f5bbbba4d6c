#include "actid/spectral.hpp"

#include "graph_samplers.hpp"

#include <Eigen/Eigenvalues>
#include <gtest/gtest.h>

#include <cmath>

using namespace actid;
using actid::testing::spectral_graph_point;
using actid::testing::spectral_piece_point;

namespace {

Matrix random_symmetric(std::size_t k, std::mt19937 &rng) {
  Matrix A(k, k);
  for (Eigen::Index i = 0; i < A.rows(); ++i)
    for (Eigen::Index j = 0; j < A.cols(); ++j)
      A(i, j) = actid::testing::uniform(rng, -1, 1);
  return 0.5 * (A + A.transpose());
}

double frob_distance(const Matrix &X, const Matrix &Y, const Matrix &X2,
                     const Matrix &Y2) {
  return std::sqrt((X - X2).squaredNorm() + (Y - Y2).squaredNorm());
}

} // namespace

TEST(Jacobi, MatchesEigenSelfAdjointSolver) {
  std::mt19937 rng(1);
  for (std::size_t k : {1u, 2u, 3u, 5u, 8u}) {
    const Matrix A = random_symmetric(k, rng);
    const Eigensystem es = jacobi_eigen(A);
    Eigen::SelfAdjointEigenSolver<Matrix> ref(A);
    const Vector expect = ref.eigenvalues().reverse();
    EXPECT_LT((es.values - expect).norm(), 1e-12);
    EXPECT_LT((es.vectors * es.values.asDiagonal() * es.vectors.transpose() - A).norm(),
              1e-12);
    EXPECT_LT((es.vectors.transpose() * es.vectors -
               Matrix::Identity(A.rows(), A.cols())).norm(), 1e-12);
    for (Eigen::Index i = 1; i < es.values.size(); ++i)
      EXPECT_GE(es.values(i - 1), es.values(i));
  }
}

TEST(Jacobi, TiesKeepOriginalOrder) {
  const Eigensystem es = jacobi_eigen(Matrix::Identity(3, 3));
  EXPECT_EQ(es.vectors, Matrix::Identity(3, 3));
}

TEST(Svec, IsAnIsometryAndInvertible) {
  std::mt19937 rng(2);
  const Matrix X = random_symmetric(4, rng), Y = random_symmetric(4, rng);
  EXPECT_NEAR(svec(X).dot(svec(Y)), (X * Y).trace(), 1e-13);
  EXPECT_LT((smat(svec(X), 4) - X).norm(), 1e-15);
  EXPECT_EQ(packed_size(3), 6u);
  EXPECT_EQ(matrix_order(10), 4u);
  EXPECT_THROW(matrix_order(5), Error);
  EXPECT_THROW(smat(Vector::Zero(5), 3), DimensionError);
}

TEST(SpectralPoint, SimultaneousDecomposition) {
  std::mt19937 rng(3);
  for (int trial = 0; trial < 100; ++trial) {
    const auto [X, Y] = spectral_graph_point(3, rng);
    const auto p = SpectralPoint::from_matrices(X, Y);
    EXPECT_LT(p.decomposition_error(), 1e-10);
    EXPECT_TRUE(in_max_eig_graph(X, Y, 1e-10));
    for (Eigen::Index i = 1; i < 3; ++i)
      EXPECT_GE(p.x(i - 1), p.x(i));
  }
}

TEST(SpectralDistance, WorkedExampleOrderTwo) {
  Vector y(2);
  y << 0.6, 0.4;
  const Matrix X = Matrix::Identity(2, 2);
  const Matrix Y = y.asDiagonal();
  const auto point = SpectralPoint::from_matrices(X, Y);
  const auto proj = spectral_piece_distance(point, 2, 1);
  EXPECT_NEAR(proj.x_tilde(0), 1.0, 1e-15);
  EXPECT_NEAR(proj.x_tilde(1), 1.0, 1e-15);
  EXPECT_NEAR(proj.y_tilde(0), 1.0, 1e-15);
  EXPECT_NEAR(proj.y_tilde(1), 0.0, 1e-15);
  EXPECT_NEAR(proj.distance, std::hypot(0.4, 0.4), 1e-12);
  EXPECT_NEAR(proj.distance, 0.565685, 1e-6);
  EXPECT_TRUE(in_spectral_piece(proj.X, proj.Y, 2, 1, 1e-10));
  EXPECT_FALSE(proj.rescale_fallback);
}

TEST(SpectralDistance, FixedPoints) {
  Vector x(3), y(3);
  x << 2, 1, 0;
  y << 1, 0, 0;
  const auto point = SpectralPoint::from_matrices(Matrix(x.asDiagonal()),
                                                  Matrix(y.asDiagonal()));
  EXPECT_EQ(point.multiplicity, 1u);
  EXPECT_NEAR(spectral_piece_distance(point, 1, 1).distance, 0.0, 1e-15);

  std::mt19937 rng(4);
  const auto [X, Y] = spectral_graph_point(3, rng);
  const auto p = SpectralPoint::from_matrices(X, Y);
  for (std::size_t m = 1; m <= 3; ++m)
    for (std::size_t r = 1; r <= m; ++r) {
      const auto proj = spectral_piece_distance(p, m, r);
      const auto again = spectral_piece_distance(
          SpectralPoint::from_matrices(proj.X, proj.Y), m, r);
      EXPECT_LT(again.distance, 1e-9) << m << "," << r;
    }
}

TEST(SpectralDistance, ExactAgainstSampledPiecePoints) {
  std::mt19937 rng(5);
  for (int trial = 0; trial < 25; ++trial) {
    const auto [X, Y] = spectral_graph_point(3, rng);
    const auto point = SpectralPoint::from_matrices(X, Y);
    for (std::size_t m = 1; m <= 3; ++m)
      for (std::size_t r = 1; r <= m; ++r) {
        const auto proj = spectral_piece_distance(point, m, r);
        EXPECT_TRUE(in_spectral_piece(proj.X, proj.Y, m, r, 1e-10));
        EXPECT_NEAR(frob_distance(X, Y, proj.X, proj.Y), proj.distance, 1e-10);
        for (int s = 0; s < 200; ++s) {
          const auto [Xs, Ys] =
              spectral_piece_point(point.U, point.x, point.y, m, r, rng);
          ASSERT_TRUE(in_spectral_piece(Xs, Ys, m, r, 1e-9));
          EXPECT_LE(proj.distance, frob_distance(X, Y, Xs, Ys) + 1e-9);
        }
      }
  }
}

TEST(SpectralDistance, RetainedWeightsAreProjectedNotRescaled) {
  // x = (1,1,1), y = (.5,.3,.2), m = 3, r = 2. Rescaling the kept pair gives
  // (.625,.375,0) at squared distance .06125; the simplex projection
  // (.6,.4,0) is a member of G_{3,2} at .06.
  Vector y(3);
  y << 0.5, 0.3, 0.2;
  const auto point =
      SpectralPoint::from_matrices(Matrix::Identity(3, 3), Matrix(y.asDiagonal()));
  const auto proj = spectral_piece_distance(point, 3, 2);
  EXPECT_NEAR(proj.y_tilde(0), 0.6, 1e-14);
  EXPECT_NEAR(proj.y_tilde(1), 0.4, 1e-14);
  EXPECT_EQ(proj.y_tilde(2), 0.0);
  EXPECT_NEAR(proj.distance, std::sqrt(0.06), 1e-14);
  EXPECT_TRUE(in_spectral_piece(proj.X, proj.Y, 3, 2, 1e-12));
  EXPECT_FALSE(proj.rescale_fallback);
}

TEST(SpectralDistance, RescaleFallbackIsFlagged) {
  // Off the graph: y vanishes on the retained entry.
  Vector x(2), y(2);
  x << 1, 0;
  y << 0, 0;
  const auto point = SpectralPoint::from_matrices(Matrix(x.asDiagonal()),
                                                  Matrix(y.asDiagonal()));
  const auto proj = spectral_piece_distance(point, 1, 1);
  EXPECT_TRUE(proj.rescale_fallback);
  EXPECT_NEAR(proj.y_tilde(0), 1.0, 0.0);
  EXPECT_THROW(spectral_piece_distance(point, 2, 3), Error);
}

TEST(SpectralPiece, GraphPieceInterface) {
  std::mt19937 rng(6);
  const SpectralPiece piece(3, 2, 1);
  EXPECT_EQ(piece.id(), "G_2_1");
  EXPECT_EQ(piece.m(), 6u);
  const auto [X, Y] = spectral_graph_point(3, rng);
  const auto [pc, pv] = piece.project(svec(X), svec(Y));
  EXPECT_TRUE(piece.contains(pc, pv, 1e-9));
  EXPECT_NEAR(piece.distance(svec(X), svec(Y)),
              std::hypot((svec(X) - pc).norm(), (svec(Y) - pv).norm()), 1e-10);
  EXPECT_THROW(SpectralPiece(3, 1, 2), Error);
}
