#include "actid/identify.hpp"
#include "actid/outer.hpp"
#include "actid/qp.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

namespace actid {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string num(double x, int precision = 10) {
  if (std::isinf(x))
    return x > 0 ? "inf" : "-inf";
  if (std::isnan(x))
    return "nan";
  if (x == 0.0)
    x = 0.0; // drop the sign of -0
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.*g", precision, x);
  return buf;
}

std::string join_ids(const std::vector<std::string> &ids) {
  std::string out = "{";
  for (std::size_t i = 0; i < ids.size(); ++i)
    out += (i ? ", " : "") + ids[i];
  return out + "}";
}

Vector evaluate_at_reference(const CompositeProblem &problem,
                             const Vector &xbar) {
  if (static_cast<std::size_t>(xbar.size()) != problem.n())
    throw DimensionError("reference point must have length n");
  const Vector c = problem.map->eval(xbar);
  if (std::isinf(problem.outer->value(c)))
    throw Error(ErrorCode::Infeasible,
                "h(c(xbar)) = +inf: the reference point is infeasible");
  return c;
}

struct NlpBlocks {
  NlpData layout;
  Vector c;
  Vector grad_f;
  Matrix P; // equality gradients as columns
  Matrix Q; // inequality gradients as columns
};

NlpBlocks nlp_blocks(const CompositeProblem &problem, const Vector &xbar) {
  const auto layout = nlp_layout(*problem.outer);
  if (!layout)
    throw UnsupportedError("index-set certification needs h = nlp(s,t), got " +
                           problem.outer->spec());
  NlpBlocks b;
  b.layout = *layout;
  b.c = problem.map->eval(xbar);
  const Matrix Jc = problem.map->jacobian(xbar);
  const auto s = static_cast<Eigen::Index>(layout->s);
  const auto t = static_cast<Eigen::Index>(layout->t);
  b.grad_f = Jc.row(0).transpose();
  b.P = Jc.middleRows(1, s).transpose();
  b.Q = Jc.middleRows(1 + s, t).transpose();
  return b;
}

VarSign sign_of_cone(const Interval &cone) {
  if (cone.lo == 0.0 && cone.hi == 0.0)
    return VarSign::Zero;
  if (cone.lo == 0.0)
    return VarSign::NonNeg;
  if (cone.hi == 0.0)
    return VarSign::NonPos;
  return VarSign::Free;
}

// Adds box constraints lo <= v_k <= hi on variable k of qp.
void add_box(QpProblem &qp, Eigen::Index k, const Interval &box) {
  const Eigen::Index N = qp.g.size();
  if (box.is_point()) {
    qp.Aeq.conservativeResize(qp.Aeq.rows() + 1, N);
    qp.beq.conservativeResize(qp.beq.size() + 1);
    qp.Aeq.row(qp.Aeq.rows() - 1).setZero();
    qp.Aeq(qp.Aeq.rows() - 1, k) = 1.0;
    qp.beq(qp.beq.size() - 1) = box.lo;
    return;
  }
  auto add_row = [&](double coef, double rhs) {
    qp.Ain.conservativeResize(qp.Ain.rows() + 1, N);
    qp.bin.conservativeResize(qp.bin.size() + 1);
    qp.Ain.row(qp.Ain.rows() - 1).setZero();
    qp.Ain(qp.Ain.rows() - 1, k) = coef;
    qp.bin(qp.bin.size() - 1) = rhs;
  };
  if (std::isfinite(box.hi))
    add_row(1.0, box.hi);
  if (std::isfinite(box.lo))
    add_row(-1.0, -box.lo);
}

PieceCertificate certify_polyhedral(const SeparableOuter &h,
                                    const GraphPiece &piece,
                                    const std::vector<CoordinateSection> &sec,
                                    const Vector &c, const Matrix &Jc,
                                    double tol) {
  PieceCertificate out;
  out.piece_id = piece.id();
  const auto m = static_cast<Eigen::Index>(sec.size());

  const auto subgrad = h.subdifferential_box(c, tol);
  if (!subgrad)
    throw Error(ErrorCode::Infeasible, "c(xbar) lies outside dom h");

  double dc2 = 0.0;
  bool empty = false;
  std::vector<Interval> combined;
  for (Eigen::Index i = 0; i < m; ++i) {
    const auto &s = sec[static_cast<std::size_t>(i)];
    dc2 += std::pow(s.c.distance(c(i)), 2);
    const Interval &g = (*subgrad)[static_cast<std::size_t>(i)];
    Interval both{std::max(g.lo, s.v.lo), std::min(g.hi, s.v.hi)};
    if (both.lo > both.hi + tol)
      empty = true;
    if (both.lo > both.hi)
      both.lo = both.hi = 0.5 * (both.lo + both.hi);
    combined.push_back(both);
  }
  const double dc = std::sqrt(dc2);

  // Best multiplier candidate inside the piece: min |grad c^* v|^2.
  out.min_norm_value = kInf;
  Vector best;
  if (!empty) {
    QpProblem qp = QpProblem::empty(static_cast<std::size_t>(m));
    qp.H = 2.0 * Jc * Jc.transpose();
    for (Eigen::Index i = 0; i < m; ++i)
      add_box(qp, i, combined[static_cast<std::size_t>(i)]);
    try {
      const QpSolution sol = solve_qp(qp);
      best = sol.d;
      out.min_norm_value = (Jc.transpose() * best).squaredNorm();
    } catch (const QpInfeasible &) {
    }
  }

  if (dc <= tol && out.min_norm_value <= tol * tol) {
    out.actively_sufficient = true;
    const double scale = std::max(1.0, best.lpNorm<Eigen::Infinity>());
    for (Eigen::Index i = 0; i < best.size(); ++i)
      if (std::abs(best(i)) <= 1e-12 * scale)
        best(i) = 0.0;
    out.witness = best;
    out.margin = 0.0;
    out.note = "witness multiplier found";
    return out;
  }

  // Separation: min |v - v'| over multipliers v and v' in the piece's
  // v-rectangle, combined with the c-gap.
  QpProblem qp = QpProblem::empty(static_cast<std::size_t>(2 * m));
  qp.H.topLeftCorner(m, m) = 2.0 * Matrix::Identity(m, m);
  qp.H.bottomRightCorner(m, m) = 2.0 * Matrix::Identity(m, m);
  qp.H.topRightCorner(m, m) = -2.0 * Matrix::Identity(m, m);
  qp.H.bottomLeftCorner(m, m) = -2.0 * Matrix::Identity(m, m);
  qp.Aeq = Matrix::Zero(Jc.cols(), 2 * m);
  qp.Aeq.leftCols(m) = Jc.transpose();
  qp.beq = Vector::Zero(Jc.cols());
  for (Eigen::Index i = 0; i < m; ++i) {
    add_box(qp, i, (*subgrad)[static_cast<std::size_t>(i)]);
    add_box(qp, m + i, sec[static_cast<std::size_t>(i)].v);
  }
  try {
    const QpSolution sol = solve_qp(qp);
    const double gap = (sol.d.head(m) - sol.d.tail(m)).squaredNorm();
    out.margin = std::sqrt(dc2 + gap);
    out.note = "no multiplier vector in this piece";
  } catch (const QpInfeasible &) {
    out.margin = kInf;
    out.note = "no multiplier vector exists at xbar";
  }
  return out;
}

PieceCertificate certify_by_projection(const CompositeProblem &problem,
                                       const GraphPiece &piece, const Vector &c,
                                       const Matrix &Jc, double tol) {
  PieceCertificate out;
  out.piece_id = piece.id();
  out.best_effort = true;

  // Orthogonal projector onto ker(grad c^*) = range(grad c)^perp in R^m.
  Eigen::ColPivHouseholderQR<Matrix> qr(Jc);
  qr.setThreshold(1e-10);
  const Matrix Qfull = qr.householderQ() * Matrix::Identity(Jc.rows(), Jc.rows());
  const Matrix Qr = Qfull.leftCols(qr.rank());
  const Matrix kernel =
      Matrix::Identity(Jc.rows(), Jc.rows()) - Qr * Qr.transpose();

  Vector v = Vector::Zero(c.size());
  double dist = piece.distance(c, v);
  for (int it = 0; it < 5000; ++it) {
    const auto projected = piece.project(c, v);
    const Vector next = kernel * projected.second;
    const double step = (next - v).norm();
    v = next;
    dist = piece.distance(c, v);
    if (dist <= 0.1 * tol || step <= 1e-15)
      break;
  }
  out.min_norm_value = (Jc.transpose() * v).squaredNorm();
  if (dist <= tol && problem.outer->subdiff_membership(c, v, 10 * tol)) {
    out.actively_sufficient = true;
    out.witness = v;
    out.margin = 0.0;
    out.note = "alternating projections converged to a witness";
  } else {
    out.margin = dist;
    out.note = "alternating projections found no witness (not a proof)";
  }
  return out;
}

} // namespace

void RevealParams::validate() const {
  if (!(eps_reveal >= 0.0) || !(delta > 0.0) || tail == 0)
    throw Error(ErrorCode::InvalidArgument,
                "reveal needs eps >= 0, delta > 0 and a tail window >= 1");
}

Iterate Iterate::from_step(const ProxStep &step, std::optional<double> eps) {
  return Iterate{step.x, step.c_hat, step.v, eps, step.d.norm()};
}

std::size_t IdentificationReport::tail_begin() const {
  return iterates.size() - std::min(iterates.size(), params.tail);
}

double IdentificationReport::tail_min_distance(const std::string &id) const {
  const auto it = std::find(piece_ids.begin(), piece_ids.end(), id);
  if (it == piece_ids.end())
    throw Error(ErrorCode::InvalidArgument, "unknown piece " + id);
  const auto k = static_cast<std::size_t>(it - piece_ids.begin());
  double best = kInf;
  for (std::size_t r = tail_begin(); r < iterates.size(); ++r)
    best = std::min(best, iterates[r].distances[k]);
  return best;
}

IdentificationReport reveal(const CompositeProblem &problem,
                            const GraphDecomposition &decomposition,
                            const std::vector<Iterate> &iterates,
                            const RevealParams &params) {
  params.validate();
  if (iterates.empty())
    throw Error(ErrorCode::InvalidArgument, "reveal needs at least one iterate");
  if (decomposition.m() != problem.m())
    throw DimensionError("decomposition does not match the dimension of h");

  IdentificationReport report;
  report.problem_name = problem.name;
  report.h_spec = problem.outer->spec();
  report.params = params;
  report.degraded = !problem.reference_point.has_value();
  for (const auto &piece : decomposition.pieces())
    report.piece_ids.push_back(piece->id());

  for (std::size_t r = 0; r < iterates.size(); ++r) {
    const Iterate &it = iterates[r];
    IterateRecord rec;
    rec.r = r;
    rec.eps = it.eps;
    rec.step_norm = it.step_norm;
    rec.residual = criticality_residual(problem, it.x, it.c_hat, it.v);
    rec.member =
        problem.outer->subdiff_membership(it.c_hat, it.v, params.membership_tol);
    rec.gates_pass = rec.member && rec.residual.subproblem_gap < params.delta &&
                     rec.residual.stationarity < params.delta &&
                     (!rec.residual.value_gap ||
                      *rec.residual.value_gap < params.delta);
    rec.distances = decomposition.distances(it.c_hat, it.v);
    if (rec.gates_pass)
      for (std::size_t k = 0; k < rec.distances.size(); ++k)
        if (rec.distances[k] <= params.eps_reveal)
          rec.revealed.push_back(report.piece_ids[k]);
    report.iterates.push_back(std::move(rec));
  }

  for (const auto &id : report.piece_ids) {
    bool everywhere = true;
    for (std::size_t r = report.tail_begin(); r < report.iterates.size(); ++r) {
      const auto &rev = report.iterates[r].revealed;
      if (std::find(rev.begin(), rev.end(), id) == rev.end()) {
        everywhere = false;
        break;
      }
    }
    if (everywhere)
      report.summary.push_back(id);
  }
  return report;
}

PieceCertificate certify_piece(const CompositeProblem &problem,
                               const GraphPiece &piece, const Vector &xbar,
                               double tol) {
  if (piece.m() != problem.m())
    throw DimensionError("piece does not match the dimension of h");
  const Vector c = evaluate_at_reference(problem, xbar);
  const Matrix Jc = problem.map->jacobian(xbar);
  const auto *sep = dynamic_cast<const SeparableOuter *>(problem.outer.get());
  if (sep) {
    if (const auto sec = piece.sections())
      return certify_polyhedral(*sep, piece, *sec, c, Jc, tol);
  }
  return certify_by_projection(problem, piece, c, Jc, tol);
}

Vector q_delta(const Vector &q, double delta) {
  if (!(delta >= 0.0))
    throw Error(ErrorCode::InvalidArgument, "delta must be >= 0");
  Vector out = Vector::Zero(q.size());
  for (Eigen::Index i = 0; i < q.size(); ++i)
    if (q(i) < -delta)
      out(i) = q(i);
  return out;
}

IndexSet nlp_index_set(const Vector &q_lin, double eps) {
  if (!(eps > 0.0))
    throw Error(ErrorCode::InvalidArgument, "index-set threshold must be > 0");
  IndexSet out;
  for (Eigen::Index j = 0; j < q_lin.size(); ++j)
    if (q_lin(j) >= -eps)
      out.push_back(static_cast<std::size_t>(j));
  return out;
}

IndexSet nlp_active_set(const CompositeProblem &problem, const Vector &xbar,
                        double tol) {
  const NlpBlocks b = nlp_blocks(problem, xbar);
  const auto s = static_cast<Eigen::Index>(b.layout.s);
  IndexSet active;
  for (Eigen::Index i = 0; i < s; ++i)
    if (std::abs(b.c(1 + i)) > tol)
      throw Error(ErrorCode::Infeasible,
                  "reference point violates equality " + std::to_string(i + 1));
  for (Eigen::Index j = 0; j < static_cast<Eigen::Index>(b.layout.t); ++j) {
    const double q = b.c(1 + s + j);
    if (q > tol)
      throw Error(ErrorCode::Infeasible,
                  "reference point violates inequality " + std::to_string(j + 1));
    if (q >= -tol)
      active.push_back(static_cast<std::size_t>(j));
  }
  return active;
}

SufficientIndexVerdict certify_sufficient_index(const CompositeProblem &problem,
                                                const Vector &xbar,
                                                const IndexSet &J, double tol) {
  SufficientIndexVerdict out;
  out.active = nlp_active_set(problem, xbar);
  const NlpBlocks b = nlp_blocks(problem, xbar);
  out.J = J;
  std::sort(out.J.begin(), out.J.end());
  out.J.erase(std::unique(out.J.begin(), out.J.end()), out.J.end());
  out.contained_in_active = std::includes(out.active.begin(), out.active.end(),
                                          out.J.begin(), out.J.end());
  const MinNormResult res = min_norm_stationarity(b.grad_f, b.P, b.Q, out.J);
  out.multiplier_value = res.value;
  out.lambda = res.lambda;
  out.mu = res.mu;
  out.sufficient = out.contained_in_active && res.value <= tol * tol;
  return out;
}

bool check_transversality(const CompositeProblem &problem, const Vector &xbar) {
  const Vector c = evaluate_at_reference(problem, xbar);
  const HorizonCone cone = problem.outer->horizon(c);
  if (cone.trivial || !cone.coordinates)
    return true;
  const Matrix Jc = problem.map->jacobian(xbar);
  std::vector<VarSign> signs;
  for (const auto &interval : *cone.coordinates)
    signs.push_back(sign_of_cone(interval));
  return lp_feasibility_bounded(Jc.transpose(), signs);
}

std::vector<Vector> multiplier_set_vertices(const CompositeProblem &problem,
                                            const Vector &xbar) {
  const IndexSet active = nlp_active_set(problem, xbar);
  const NlpBlocks b = nlp_blocks(problem, xbar);
  if (!check_transversality(problem, xbar))
    throw Error(ErrorCode::Unbounded,
                "MFCQ fails at the reference point: the multiplier set is "
                "unbounded");
  const auto s = static_cast<Eigen::Index>(b.layout.s);
  const auto t = static_cast<Eigen::Index>(b.layout.t);
  if (b.layout.s + active.size() > kMaxEnumeratedInequalities)
    throw UnsupportedError("too many active constraints to enumerate vertices");

  const double scale = std::max(1.0, b.grad_f.norm());
  std::vector<Vector> out;
  const std::size_t count = std::size_t{1} << active.size();
  for (std::size_t mask = 0; mask < count; ++mask) {
    std::vector<Eigen::Index> support;
    for (std::size_t k = 0; k < active.size(); ++k)
      if (mask & (std::size_t{1} << k))
        support.push_back(static_cast<Eigen::Index>(active[k]));
    const auto cols = s + static_cast<Eigen::Index>(support.size());
    Matrix A(b.grad_f.size(), cols);
    if (s)
      A.leftCols(s) = b.P;
    for (std::size_t k = 0; k < support.size(); ++k)
      A.col(s + static_cast<Eigen::Index>(k)) = b.Q.col(support[k]);

    Vector z = Vector::Zero(cols);
    if (cols > 0) {
      Eigen::ColPivHouseholderQR<Matrix> qr(A);
      qr.setThreshold(1e-10);
      if (qr.rank() < cols)
        continue;
      z = qr.solve(-b.grad_f);
    }
    if ((A * z + b.grad_f).norm() > 1e-9 * scale)
      continue;
    bool nonneg = true;
    for (std::size_t k = 0; k < support.size(); ++k)
      if (z(s + static_cast<Eigen::Index>(k)) < -1e-10)
        nonneg = false;
    if (!nonneg)
      continue;

    Vector v = Vector::Zero(1 + s + t);
    v(0) = 1.0;
    v.segment(1, s) = z.head(s);
    for (std::size_t k = 0; k < support.size(); ++k)
      v(1 + s + support[k]) = std::max(0.0, z(s + static_cast<Eigen::Index>(k)));
    const bool seen = std::any_of(out.begin(), out.end(), [&](const Vector &w) {
      return (w - v).lpNorm<Eigen::Infinity>() <= 1e-9;
    });
    if (!seen)
      out.push_back(v);
  }
  return out;
}

ManifoldReveal manifold_reveal(const CompositeProblem &problem,
                               const std::vector<Iterate> &iterates,
                               std::size_t tail, double tol) {
  const OuterKind kind = problem.outer->kind();
  if (kind != OuterKind::EuclidNorm && kind != OuterKind::Abs &&
      kind != OuterKind::Pos)
    throw UnsupportedError("no designated manifold for " +
                           problem.outer->spec());
  if (tail == 0)
    throw Error(ErrorCode::InvalidArgument, "tail window must be >= 1");
  ManifoldReveal out;
  for (const auto &it : iterates)
    out.per_iterate.push_back(it.c_hat.norm() <= tol);
  const std::size_t begin = iterates.size() - std::min(iterates.size(), tail);
  out.tail_in_manifold =
      !iterates.empty() &&
      std::all_of(out.per_iterate.begin() + static_cast<std::ptrdiff_t>(begin),
                  out.per_iterate.end(), [](bool b) { return b; });
  return out;
}

std::string format_summary(const IdentificationReport &report) {
  std::ostringstream os;
  os << "# problem\t" << report.problem_name << "\n";
  os << "# h\t" << report.h_spec << "\n";
  os << "# iterates\t" << report.iterates.size() << "\n";
  os << "# tail_window\t" << report.params.tail << " (r = "
     << report.tail_begin() << ".."
     << (report.iterates.empty() ? 0 : report.iterates.size() - 1) << ")\n";
  os << "# eps_reveal\t" << num(report.params.eps_reveal) << "\n";
  os << "# delta\t" << num(report.params.delta) << "\n";
  os << "# mode\t"
     << (report.degraded
             ? "degraded (no reference point; value-gap gate skipped)"
             : "full")
     << "\n";
  if (report.hypothesis_warning)
    os << "# warning\tmu_r |x_r - xbar| increases along the schedule\n";
  os << "# revealed\t" << join_ids(report.summary) << "\n";
  if (!report.iterates.empty()) {
    os << "# tail_min_distance";
    for (const auto &id : report.piece_ids)
      os << "\t" << id << "=" << num(report.tail_min_distance(id), 6);
    os << "\n";
  }
  for (const auto &cert : report.certification) {
    os << "# certify\t" << cert.piece_id << "\t"
       << (cert.actively_sufficient ? "sufficient" : "not sufficient");
    if (cert.witness)
      os << "\twitness=" << format_vector(*cert.witness, 8);
    else
      os << "\tmargin=" << num(cert.margin, 6);
    os << "\tmin_norm=" << num(cert.min_norm_value, 6);
    if (cert.best_effort)
      os << "\tbest_effort";
    os << "\n";
  }
  return os.str();
}

std::string format_trace(const IdentificationReport &report) {
  std::ostringstream os;
  os << "r\teps_r\tstep_norm\tstationarity\tvalue_gap";
  for (const auto &id : report.piece_ids)
    os << "\t" << id;
  os << "\n";
  for (const auto &rec : report.iterates) {
    os << rec.r << "\t" << (rec.eps ? num(*rec.eps) : "NA") << "\t"
       << num(rec.step_norm) << "\t" << num(rec.residual.stationarity) << "\t"
       << (rec.residual.value_gap ? num(*rec.residual.value_gap) : "NA");
    for (double d : rec.distances)
      os << "\t" << num(d);
    os << "\n";
  }
  os << format_summary(report);
  return os.str();
}

std::string format_pretty(const IdentificationReport &report) {
  std::vector<std::string> header{"r", "eps_r", "|d|", "stationarity",
                                  "value_gap"};
  for (const auto &id : report.piece_ids)
    header.push_back(id);
  header.push_back("revealed");
  std::vector<std::vector<std::string>> rows{header};
  for (const auto &rec : report.iterates) {
    std::vector<std::string> row{
        std::to_string(rec.r), rec.eps ? num(*rec.eps, 4) : "NA",
        num(rec.step_norm, 4), num(rec.residual.stationarity, 4),
        rec.residual.value_gap ? num(*rec.residual.value_gap, 4) : "NA"};
    for (double d : rec.distances)
      row.push_back(num(d, 4));
    row.push_back(join_ids(rec.revealed));
    rows.push_back(std::move(row));
  }
  std::vector<std::size_t> width(header.size(), 0);
  for (const auto &row : rows)
    for (std::size_t k = 0; k < row.size(); ++k)
      width[k] = std::max(width[k], row[k].size());
  std::ostringstream os;
  for (const auto &row : rows) {
    for (std::size_t k = 0; k < row.size(); ++k) {
      if (k)
        os << "  ";
      os << row[k];
      if (k + 1 < row.size())
        os << std::string(width[k] - row[k].size(), ' ');
    }
    os << "\n";
  }
  os << format_summary(report);
  return os.str();
}

} // namespace actid
