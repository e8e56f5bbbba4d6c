#pragma once

#include "actid/core.hpp"

#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace actid {

/// Closed interval of the extended real line. Endpoints may be infinite.
struct Interval {
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();

  static Interval point(double a) { return {a, a}; }
  static Interval real() { return {}; }
  static Interval nonneg() {
    return {0.0, std::numeric_limits<double>::infinity()};
  }
  static Interval nonpos() {
    return {-std::numeric_limits<double>::infinity(), 0.0};
  }

  bool is_point() const { return lo == hi; }
  double project(double t) const { return t < lo ? lo : (t > hi ? hi : t); }
  double distance(double t) const {
    return t < lo ? lo - t : (t > hi ? t - hi : 0.0);
  }
  std::string to_string() const;
};

/// A rectangle (I_c x I_v) in the (c_i, v_i) plane of one coordinate.
struct CoordinateSection {
  Interval c;
  Interval v;
};

enum class PieceKind { Polyhedral, Curve, Spectral, Product, Norm };

std::string to_string(PieceKind kind);

/// One closed subset G of gph(dh) in R^m x R^m, with exact distance and
/// projection oracles (Euclidean product norm).
class GraphPiece {
public:
  GraphPiece(std::string id, std::size_t m, std::string description);
  virtual ~GraphPiece() = default;

  const std::string &id() const { return id_; }
  std::size_t m() const { return m_; }
  std::size_t ambient_dim() const { return 2 * m_; }
  const std::string &description() const { return description_; }

  virtual PieceKind kind() const = 0;
  virtual double distance(const Vector &c, const Vector &v) const = 0;
  virtual std::pair<Vector, Vector> project(const Vector &c,
                                            const Vector &v) const = 0;
  virtual bool contains(const Vector &c, const Vector &v, double tol) const;

  /// Per-coordinate rectangle description when the piece is a Cartesian
  /// product of rectangles in the (c_i, v_i) planes.
  virtual std::optional<std::vector<CoordinateSection>> sections() const {
    return std::nullopt;
  }

  /// Copy of this piece under a new id.
  virtual std::shared_ptr<const GraphPiece>
  relabel(const std::string &id) const = 0;

protected:
  void check_dims(const Vector &c, const Vector &v) const;

private:
  std::string id_;
  std::size_t m_;
  std::string description_;
};

using PiecePtr = std::shared_ptr<const GraphPiece>;

/// Product of per-coordinate rectangles. Covers every polyhedral piece in
/// the catalog (abs, pos, indicator, G^J, and the penalty pieces).
class PolyhedralPiece final : public GraphPiece {
public:
  PolyhedralPiece(std::string id, std::vector<CoordinateSection> sections,
                  std::string description = {});

  PieceKind kind() const override { return PieceKind::Polyhedral; }
  double distance(const Vector &c, const Vector &v) const override;
  std::pair<Vector, Vector> project(const Vector &c,
                                    const Vector &v) const override;
  std::optional<std::vector<CoordinateSection>> sections() const override {
    return sections_;
  }
  PiecePtr relabel(const std::string &id) const override;

private:
  std::vector<CoordinateSection> sections_;
};

/// Graph of v = s * alpha * exp(-alpha * s * c) over s*c >= 0, s = +-1.
/// These are the two outer pieces of the exp-penalty decomposition.
class ExpCurvePiece final : public GraphPiece {
public:
  ExpCurvePiece(std::string id, double alpha, int sign);

  PieceKind kind() const override { return PieceKind::Curve; }
  double distance(const Vector &c, const Vector &v) const override;
  std::pair<Vector, Vector> project(const Vector &c,
                                    const Vector &v) const override;
  PiecePtr relabel(const std::string &id) const override;

  double alpha() const { return alpha_; }
  int sign() const { return sign_; }

private:
  /// Nearest curve parameter t >= 0 to (p, q) in the sign-normalized frame.
  double nearest_parameter(double p, double q) const;

  double alpha_;
  int sign_;
};

/// {(0, v) : |v| <= 1}.
class NormBallPiece final : public GraphPiece {
public:
  NormBallPiece(std::string id, std::size_t m);

  PieceKind kind() const override { return PieceKind::Norm; }
  double distance(const Vector &c, const Vector &v) const override;
  std::pair<Vector, Vector> project(const Vector &c,
                                    const Vector &v) const override;
  PiecePtr relabel(const std::string &id) const override;
};

/// {(t u, u) : |u| = 1, t >= 0}, the closure of {(c, c/|c|) : c != 0}
/// together with the unit sphere over c = 0.
class NormRayPiece final : public GraphPiece {
public:
  NormRayPiece(std::string id, std::size_t m);

  PieceKind kind() const override { return PieceKind::Norm; }
  double distance(const Vector &c, const Vector &v) const override;
  std::pair<Vector, Vector> project(const Vector &c,
                                    const Vector &v) const override;
  PiecePtr relabel(const std::string &id) const override;

private:
  Vector nearest_direction(const Vector &c, const Vector &v) const;
};

/// Cartesian product of factor pieces, coordinates concatenated per factor.
class ProductPiece final : public GraphPiece {
public:
  ProductPiece(std::string id, std::vector<PiecePtr> factors);

  PieceKind kind() const override { return PieceKind::Product; }
  double distance(const Vector &c, const Vector &v) const override;
  std::pair<Vector, Vector> project(const Vector &c,
                                    const Vector &v) const override;
  bool contains(const Vector &c, const Vector &v, double tol) const override;
  std::optional<std::vector<CoordinateSection>> sections() const override;
  PiecePtr relabel(const std::string &id) const override;

  const std::vector<PiecePtr> &factors() const { return factors_; }

private:
  std::vector<PiecePtr> factors_;
  std::vector<std::size_t> offsets_;
};

/// Finite ordered family of closed pieces covering gph(dh).
class GraphDecomposition {
public:
  GraphDecomposition() = default;
  explicit GraphDecomposition(std::vector<PiecePtr> pieces);

  std::size_t size() const { return pieces_.size(); }
  const std::vector<PiecePtr> &pieces() const { return pieces_; }
  const GraphPiece &piece(std::size_t i) const { return *pieces_.at(i); }
  const GraphPiece *find(const std::string &id) const;
  std::size_t m() const;

  std::vector<double> distances(const Vector &c, const Vector &v) const;
  double min_distance(const Vector &c, const Vector &v) const;

private:
  std::vector<PiecePtr> pieces_;
};

constexpr std::size_t kMaxProductPieces = 10000;

/// All cross products of the factor decompositions. Piece ids are "G1",
/// "G2", ... in lexicographic order with the last factor varying fastest.
GraphDecomposition
product_decomposition(const std::vector<GraphDecomposition> &factors);

} // namespace actid
