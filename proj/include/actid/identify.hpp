#pragma once

#include "actid/graph.hpp"
#include "actid/proxlinear.hpp"

#include <map>

namespace actid {

struct RevealParams {
  double eps_reveal = 0.05;
  double delta = 0.01;
  std::size_t tail = 5;
  double membership_tol = 1e-8;

  void validate() const;
};

/// Raw (x, c_hat, v) triple; eps and step_norm only feed the trace.
struct Iterate {
  Vector x;
  Vector c_hat;
  Vector v;
  std::optional<double> eps;
  double step_norm = 0.0;

  static Iterate from_step(const ProxStep &step,
                           std::optional<double> eps = std::nullopt);
};

struct IterateRecord {
  std::size_t r = 0;
  std::optional<double> eps;
  double step_norm = 0.0;
  CriticalityResidual residual;
  bool member = false;     // v in dh(c_hat)
  bool gates_pass = false; // all residual gates and membership
  std::vector<double> distances; // one per piece, decomposition order
  std::vector<std::string> revealed;
};

/// Outcome of asking whether a piece contains a point (c(xbar), vbar) with
/// vbar a multiplier vector.
struct PieceCertificate {
  std::string piece_id;
  bool actively_sufficient = false;
  std::optional<Vector> witness;
  /// min |grad c(xbar)^* v|^2 over v in dh(c(xbar)) compatible with G;
  /// +inf when no such v exists.
  double min_norm_value = 0.0;
  /// Estimate of min over multipliers vbar of dist((c(xbar), vbar), G);
  /// zero for sufficient pieces, +inf when no multiplier exists.
  double margin = 0.0;
  bool best_effort = false;
  std::string note;
};

struct IdentificationReport {
  std::string problem_name;
  std::string h_spec;
  std::vector<std::string> piece_ids;
  RevealParams params;
  bool degraded = false; // no reference point, value-gap gate skipped
  bool hypothesis_warning = false;
  std::vector<IterateRecord> iterates;
  std::vector<std::string> summary; // revealed at every tail iterate
  std::vector<PieceCertificate> certification;

  /// Smallest distance to the piece over the tail window.
  double tail_min_distance(const std::string &piece_id) const;
  std::size_t tail_begin() const;
};

IdentificationReport reveal(const CompositeProblem &problem,
                            const GraphDecomposition &decomposition,
                            const std::vector<Iterate> &iterates,
                            const RevealParams &params);

PieceCertificate certify_piece(const CompositeProblem &problem,
                               const GraphPiece &piece, const Vector &xbar,
                               double tol = 1e-8);

/// q_i if q_i < -delta, else 0.
Vector q_delta(const Vector &q, double delta);

/// {j : q_lin_j >= -eps}.
IndexSet nlp_index_set(const Vector &q_lin, double eps);

struct SufficientIndexVerdict {
  IndexSet J;
  IndexSet active; // Jbar
  bool contained_in_active = false;
  double multiplier_value = 0.0;
  Vector lambda;
  Vector mu;
  bool sufficient = false;
};

SufficientIndexVerdict certify_sufficient_index(const CompositeProblem &problem,
                                                const Vector &xbar,
                                                const IndexSet &J,
                                                double tol = 1e-8);

/// Active inequality indices {j : |q_j(xbar)| <= tol}; throws when xbar is
/// infeasible beyond tol.
IndexSet nlp_active_set(const CompositeProblem &problem, const Vector &xbar,
                        double tol = 1e-8);

bool check_transversality(const CompositeProblem &problem, const Vector &xbar);

/// Vertices of the multiplier polytope, each as a full v = (1, lambda, mu).
std::vector<Vector> multiplier_set_vertices(const CompositeProblem &problem,
                                            const Vector &xbar);

struct ManifoldReveal {
  std::vector<bool> per_iterate;
  bool tail_in_manifold = false;
};

ManifoldReveal manifold_reveal(const CompositeProblem &problem,
                               const std::vector<Iterate> &iterates,
                               std::size_t tail, double tol = 1e-9);

/// Tab-separated trace, one row per iterate, followed by '#' summary lines.
std::string format_trace(const IdentificationReport &report);
std::string format_summary(const IdentificationReport &report);
/// Aligned columns for humans.
std::string format_pretty(const IdentificationReport &report);

} // namespace actid
