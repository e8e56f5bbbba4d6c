#pragma once

#include "actid/graph.hpp"

#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace actid {

enum class OuterKind {
  IndicatorNonneg,
  Abs,
  Pos,
  ExpPenalty,
  L1Two,
  EuclidNorm,
  MaxEig,
  Nlp,
  L1ExactPenalty,
};

std::string to_string(OuterKind kind);

/// One coordinate of a separable polyhedral outer function
/// h(c) = sum_i phi_i(c_i).
struct ScalarTerm {
  enum class Type {
    Linear,  // phi(t) = weight * t
    Zero,    // indicator of {0}
    NonPos,  // indicator of (-inf, 0]
    NonNeg,  // indicator of [0, inf)
    Abs,     // weight * |t|
    Pos,     // weight * max(t, 0)
  };
  Type type;
  double weight = 1.0;

  /// +inf outside the domain; domain membership uses feas_tol.
  double value(double t, double feas_tol) const;
  /// d phi(t) with t snapped to 0 when |t| <= tol; nullopt off the domain.
  std::optional<Interval> subdifferential(double t, double tol) const;
  /// Horizon subdifferential at t (t in the domain).
  Interval horizon(double t, double tol) const;
  /// Closed rectangles whose union is gph(d phi).
  std::vector<CoordinateSection> graph_sections() const;
};

/// Result of the horizon-cone query. For separable h the cone is the
/// product of per-coordinate intervals, each {0}, R, R_+ or R_-.
struct HorizonCone {
  bool trivial = true;
  std::optional<std::vector<Interval>> coordinates;
};

/// The outer function h : R^m -> (-inf, +inf].
class OuterFunction {
public:
  virtual ~OuterFunction() = default;

  virtual OuterKind kind() const = 0;
  virtual std::size_t m() const = 0;
  /// Canonical spec string, e.g. "nlp(s=0,t=2)".
  virtual std::string spec() const = 0;
  virtual bool convex() const = 0;

  virtual double value(const Vector &c) const = 0;
  /// v in dh(c) within tol.
  virtual bool subdiff_membership(const Vector &c, const Vector &v,
                                  double tol) const = 0;
  /// Throws when h(c) = +inf.
  virtual HorizonCone horizon(const Vector &c) const;
  bool horizon_trivial(const Vector &c) const { return horizon(c).trivial; }

  const GraphDecomposition &decomposition() const { return decomposition_; }

  /// Non-null for separable polyhedral kinds.
  virtual const std::vector<ScalarTerm> *separable_terms() const {
    return nullptr;
  }

  /// Tolerance used when deciding whether c lies in dom h.
  double feasibility_tol() const { return feas_tol_; }

protected:
  explicit OuterFunction(double feas_tol) : feas_tol_(feas_tol) {}
  void check_dim(const Vector &c) const;
  void set_decomposition(GraphDecomposition d) { decomposition_ = std::move(d); }

private:
  double feas_tol_;
  GraphDecomposition decomposition_;
};

using OuterPtr = std::shared_ptr<const OuterFunction>;

/// h(c) = sum_i phi_i(c_i) for polyhedral scalar terms.
class SeparableOuter final : public OuterFunction {
public:
  SeparableOuter(OuterKind kind, std::string spec,
                 std::vector<ScalarTerm> terms, GraphDecomposition decomposition,
                 double feas_tol = 1e-8);

  OuterKind kind() const override { return kind_; }
  std::size_t m() const override { return terms_.size(); }
  std::string spec() const override { return spec_; }
  bool convex() const override { return true; }
  double value(const Vector &c) const override;
  bool subdiff_membership(const Vector &c, const Vector &v,
                          double tol) const override;
  HorizonCone horizon(const Vector &c) const override;
  const std::vector<ScalarTerm> *separable_terms() const override {
    return &terms_;
  }

  /// Per-coordinate dh(c) boxes; nullopt when h(c) = +inf.
  std::optional<std::vector<Interval>> subdifferential_box(const Vector &c,
                                                           double tol) const;

private:
  OuterKind kind_;
  std::string spec_;
  std::vector<ScalarTerm> terms_;
};

/// h(c) = 1 - exp(-alpha |c|), nonconvex, m = 1.
class ExpPenaltyOuter final : public OuterFunction {
public:
  explicit ExpPenaltyOuter(double alpha);

  OuterKind kind() const override { return OuterKind::ExpPenalty; }
  std::size_t m() const override { return 1; }
  std::string spec() const override;
  bool convex() const override { return false; }
  double value(const Vector &c) const override;
  bool subdiff_membership(const Vector &c, const Vector &v,
                          double tol) const override;
  double alpha() const { return alpha_; }

private:
  double alpha_;
};

/// h(c) = |c| on R^n.
class EuclidNormOuter final : public OuterFunction {
public:
  explicit EuclidNormOuter(std::size_t n);

  OuterKind kind() const override { return OuterKind::EuclidNorm; }
  std::size_t m() const override { return n_; }
  std::string spec() const override;
  bool convex() const override { return true; }
  double value(const Vector &c) const override;
  bool subdiff_membership(const Vector &c, const Vector &v,
                          double tol) const override;

private:
  std::size_t n_;
};

/// h(c) = lambda_max(smat(c)) on svec coordinates of S^k.
class MaxEigOuter final : public OuterFunction {
public:
  explicit MaxEigOuter(std::size_t k);

  OuterKind kind() const override { return OuterKind::MaxEig; }
  std::size_t m() const override;
  std::string spec() const override;
  bool convex() const override { return true; }
  double value(const Vector &c) const override;
  bool subdiff_membership(const Vector &c, const Vector &v,
                          double tol) const override;
  std::size_t order() const { return k_; }

private:
  std::size_t k_;
};

/// Coordinates (u, y, w) of the nonlinear-programming encoding.
struct NlpData {
  std::size_t s = 0;
  std::size_t t = 0;

  std::size_t m() const { return 1 + s + t; }
  std::size_t eq_offset() const { return 1; }
  std::size_t ineq_offset() const { return 1 + s; }
};

constexpr std::size_t kMaxEnumeratedInequalities = 20;

/// G^J: y = 0, theta = 1, w <= 0, mu >= 0, w_J = 0, mu_{J^c} = 0.
/// The id is "G<1 + sum_{j in J} 2^j>" so that G^{} is G1.
PiecePtr gj_piece(const NlpData &nlp, const IndexSet &J);

OuterPtr make_indicator_nonneg(double feas_tol = 1e-8);
OuterPtr make_abs();
OuterPtr make_pos();
OuterPtr make_exp_penalty(double alpha);
OuterPtr make_l1_two();
OuterPtr make_euclid_norm(std::size_t n);
OuterPtr make_max_eig(std::size_t k);
OuterPtr make_nlp(std::size_t s, std::size_t t, double feas_tol = 1e-8);
OuterPtr make_l1_exact_penalty(std::size_t s, std::size_t t, double nu);

/// Parses "name" or "name(key=value, ...)".
OuterPtr parse_outer_spec(const std::string &text);

/// Returns the NLP layout when h is the nlp kind.
std::optional<NlpData> nlp_layout(const OuterFunction &h);

} // namespace actid
