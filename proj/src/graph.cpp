#include "actid/graph.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace actid {

namespace {

std::string format_bound(double t) {
  if (std::isinf(t))
    return t > 0 ? "inf" : "-inf";
  std::ostringstream os;
  os << t;
  return os.str();
}

double sq(double t) { return t * t; }

} // namespace

std::string Interval::to_string() const {
  if (is_point())
    return "{" + format_bound(lo) + "}";
  return std::string(std::isinf(lo) ? "(" : "[") + format_bound(lo) + "," +
         format_bound(hi) + (std::isinf(hi) ? ")" : "]");
}

std::string to_string(PieceKind kind) {
  switch (kind) {
  case PieceKind::Polyhedral:
    return "polyhedral";
  case PieceKind::Curve:
    return "curve";
  case PieceKind::Spectral:
    return "spectral";
  case PieceKind::Product:
    return "product";
  case PieceKind::Norm:
    return "norm";
  }
  return "unknown";
}

GraphPiece::GraphPiece(std::string id, std::size_t m, std::string description)
    : id_(std::move(id)), m_(m), description_(std::move(description)) {}

void GraphPiece::check_dims(const Vector &c, const Vector &v) const {
  if (static_cast<std::size_t>(c.size()) != m_ ||
      static_cast<std::size_t>(v.size()) != m_)
    throw DimensionError("piece " + id_ + " expects points in R^" +
                         std::to_string(m_) + " x R^" + std::to_string(m_));
}

bool GraphPiece::contains(const Vector &c, const Vector &v, double tol) const {
  return distance(c, v) <= tol;
}

// ---------------------------------------------------------------------------

PolyhedralPiece::PolyhedralPiece(std::string id,
                                 std::vector<CoordinateSection> sections,
                                 std::string description)
    : GraphPiece(std::move(id), sections.size(), std::move(description)),
      sections_(std::move(sections)) {
  for (const auto &s : sections_)
    if (s.c.lo > s.c.hi || s.v.lo > s.v.hi)
      throw Error(ErrorCode::InvalidArgument, "empty section interval");
}

double PolyhedralPiece::distance(const Vector &c, const Vector &v) const {
  check_dims(c, v);
  double acc = 0.0;
  for (std::size_t i = 0; i < sections_.size(); ++i) {
    const auto k = static_cast<Eigen::Index>(i);
    acc += sq(sections_[i].c.distance(c(k))) + sq(sections_[i].v.distance(v(k)));
  }
  return std::sqrt(acc);
}

std::pair<Vector, Vector> PolyhedralPiece::project(const Vector &c,
                                                   const Vector &v) const {
  check_dims(c, v);
  Vector pc(c.size()), pv(v.size());
  for (std::size_t i = 0; i < sections_.size(); ++i) {
    const auto k = static_cast<Eigen::Index>(i);
    pc(k) = sections_[i].c.project(c(k));
    pv(k) = sections_[i].v.project(v(k));
  }
  return {pc, pv};
}

PiecePtr PolyhedralPiece::relabel(const std::string &id) const {
  return std::make_shared<PolyhedralPiece>(id, sections_, description());
}

// ---------------------------------------------------------------------------

ExpCurvePiece::ExpCurvePiece(std::string id, double alpha, int sign)
    : GraphPiece(std::move(id), 1,
                 sign > 0 ? "{(c, a*exp(-a*c)) : c >= 0}"
                          : "{(c, -a*exp(a*c)) : c <= 0}"),
      alpha_(alpha), sign_(sign > 0 ? 1 : -1) {
  if (!(alpha > 0.0))
    throw Error(ErrorCode::InvalidArgument, "exp_penalty needs alpha > 0");
}

// In the frame (p, q) = sign * (c, v) the curve is {(t, a e^{-a t}) : t >= 0}.
// The squared distance is phi(t) = (t - p)^2 + (a e^{-a t} - q)^2 and its
// derivative, halved, is g(t) = (t - p) - a^2 e^{-a t} (a e^{-a t} - q).
double ExpCurvePiece::nearest_parameter(double p, double q) const {
  const double a = alpha_;
  auto phi = [&](double t) { return sq(t - p) + sq(a * std::exp(-a * t) - q); };
  auto grad = [&](double t) {
    const double e = a * std::exp(-a * t);
    return (t - p) - a * e * (e - q);
  };
  auto hess = [&](double t) {
    const double e = a * std::exp(-a * t);
    return 1.0 + a * a * e * (2.0 * e - q);
  };

  // Past t = t0 + a + |q| the first term alone exceeds phi(t0).
  const double t0 = std::max(p, 0.0);
  const double upper = t0 + a + std::abs(q) + 1.0;
  constexpr int kGrid = 64;
  std::vector<double> grid(kGrid + 1);
  for (int i = 0; i <= kGrid; ++i)
    grid[i] = upper * static_cast<double>(i) / kGrid;

  double best_t = 0.0;
  double best_phi = phi(0.0);
  auto consider = [&](double t) {
    const double f = phi(t);
    if (f < best_phi) {
      best_phi = f;
      best_t = t;
    }
  };
  for (int i = 0; i <= kGrid; ++i)
    consider(grid[i]);

  // Safeguarded Newton on g inside every grid cell with a sign change.
  for (int i = 0; i < kGrid; ++i) {
    double lo = grid[i], hi = grid[i + 1];
    double glo = grad(lo), ghi = grad(hi);
    if (glo > 0.0 || ghi < 0.0)
      continue; // no minimizer bracketed
    double t = 0.5 * (lo + hi);
    for (int it = 0; it < 200 && hi - lo > 1e-15 * (1.0 + hi); ++it) {
      const double gt = grad(t);
      if (std::abs(gt) <= 1e-15)
        break;
      if (gt < 0.0)
        lo = t;
      else
        hi = t;
      const double h = hess(t);
      double next = h > 0.0 ? t - gt / h : 0.5 * (lo + hi);
      if (!(next > lo && next < hi))
        next = 0.5 * (lo + hi);
      t = next;
    }
    consider(t);
  }
  return best_t;
}

double ExpCurvePiece::distance(const Vector &c, const Vector &v) const {
  check_dims(c, v);
  const double p = sign_ * c(0), q = sign_ * v(0);
  const double t = nearest_parameter(p, q);
  return std::hypot(t - p, alpha_ * std::exp(-alpha_ * t) - q);
}

std::pair<Vector, Vector> ExpCurvePiece::project(const Vector &c,
                                                 const Vector &v) const {
  check_dims(c, v);
  const double t = nearest_parameter(sign_ * c(0), sign_ * v(0));
  Vector pc(1), pv(1);
  pc(0) = sign_ * t;
  pv(0) = sign_ * alpha_ * std::exp(-alpha_ * t);
  return {pc, pv};
}

PiecePtr ExpCurvePiece::relabel(const std::string &id) const {
  return std::make_shared<ExpCurvePiece>(id, alpha_, sign_);
}

// ---------------------------------------------------------------------------

NormBallPiece::NormBallPiece(std::string id, std::size_t m)
    : GraphPiece(std::move(id), m, "{(0, v) : |v| <= 1}") {}

double NormBallPiece::distance(const Vector &c, const Vector &v) const {
  check_dims(c, v);
  return std::hypot(c.norm(), std::max(0.0, v.norm() - 1.0));
}

std::pair<Vector, Vector> NormBallPiece::project(const Vector &c,
                                                 const Vector &v) const {
  check_dims(c, v);
  const double nv = v.norm();
  return {Vector::Zero(c.size()), nv > 1.0 ? Vector(v / nv) : v};
}

PiecePtr NormBallPiece::relabel(const std::string &id) const {
  return std::make_shared<NormBallPiece>(id, m());
}

// ---------------------------------------------------------------------------

NormRayPiece::NormRayPiece(std::string id, std::size_t m)
    : GraphPiece(std::move(id), m,
                 "{(c, c/|c|) : c != 0} u {(0, v) : |v| = 1}") {}

// For a unit u the best t is max(0, <c,u>), leaving
//   f(u) = |c|^2 - max(0,<c,u>)^2 + |v|^2 - 2<v,u> + 1.
// Components of u orthogonal to span{c, v} do not change the two inner
// products, so the minimizer lies on the unit circle of that span.
Vector NormRayPiece::nearest_direction(const Vector &c, const Vector &v) const {
  const auto m = c.size();
  auto f = [&](const Vector &u) {
    const double cu = std::max(0.0, c.dot(u));
    return -cu * cu - 2.0 * v.dot(u);
  };

  if (m == 1) {
    Vector plus = Vector::Ones(1), minus = -Vector::Ones(1);
    return f(plus) <= f(minus) ? plus : minus;
  }

  Vector e1, e2;
  if (c.norm() > 0.0)
    e1 = c.normalized();
  else if (v.norm() > 0.0)
    e1 = v.normalized();
  else {
    e1 = Vector::Unit(m, 0);
    return e1;
  }
  Vector r = v - v.dot(e1) * e1;
  if (r.norm() > 1e-14 * (1.0 + v.norm())) {
    e2 = r.normalized();
  } else {
    // Span is one dimensional: pick any unit vector orthogonal to e1.
    Eigen::Index j = 0;
    e1.cwiseAbs().minCoeff(&j);
    e2 = Vector::Unit(m, j) - e1(j) * e1;
    e2.normalize();
  }

  auto at = [&](double phi) -> Vector {
    return std::cos(phi) * e1 + std::sin(phi) * e2;
  };
  constexpr int kGrid = 720;
  const double step = 2.0 * std::numbers::pi / kGrid;
  int best = 0;
  double best_f = f(at(0.0));
  for (int i = 1; i < kGrid; ++i) {
    const double fi = f(at(i * step));
    if (fi < best_f) {
      best_f = fi;
      best = i;
    }
  }
  // Bisection on f'(phi) over the bracketing cell pair. Working with the
  // derivative keeps full precision in phi, which function values cannot.
  const double a = c.dot(e1), b = c.dot(e2), p = v.dot(e1), q = v.dot(e2);
  auto df = [&](double phi) {
    const double cs = std::cos(phi), sn = std::sin(phi);
    const double s = std::max(0.0, a * cs + b * sn);
    return -2.0 * s * (b * cs - a * sn) - 2.0 * (q * cs - p * sn);
  };
  double lo = (best - 1) * step, hi = (best + 1) * step;
  double phi = best * step;
  if (df(lo) <= 0.0 && df(hi) >= 0.0) {
    for (int it = 0; it < 200 && hi - lo > 0.0; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (mid == lo || mid == hi)
        break;
      (df(mid) < 0.0 ? lo : hi) = mid;
    }
    phi = 0.5 * (lo + hi);
  }
  Vector u = at(phi);
  if (f(u) > best_f)
    u = at(best * step);
  return u.normalized();
}

double NormRayPiece::distance(const Vector &c, const Vector &v) const {
  auto [pc, pv] = project(c, v);
  return std::sqrt((c - pc).squaredNorm() + (v - pv).squaredNorm());
}

std::pair<Vector, Vector> NormRayPiece::project(const Vector &c,
                                                const Vector &v) const {
  check_dims(c, v);
  const Vector u = nearest_direction(c, v);
  const double t = std::max(0.0, c.dot(u));
  return {t * u, u};
}

PiecePtr NormRayPiece::relabel(const std::string &id) const {
  return std::make_shared<NormRayPiece>(id, m());
}

// ---------------------------------------------------------------------------

namespace {

std::size_t total_dim(const std::vector<PiecePtr> &factors) {
  std::size_t m = 0;
  for (const auto &f : factors)
    m += f->m();
  return m;
}

std::string product_description(const std::vector<PiecePtr> &factors) {
  std::string out;
  for (std::size_t i = 0; i < factors.size(); ++i) {
    if (i)
      out += " x ";
    out += factors[i]->id();
  }
  return out;
}

} // namespace

ProductPiece::ProductPiece(std::string id, std::vector<PiecePtr> factors)
    : GraphPiece(std::move(id), total_dim(factors),
                 product_description(factors)),
      factors_(std::move(factors)) {
  if (factors_.empty())
    throw Error(ErrorCode::InvalidArgument, "product of zero pieces");
  std::size_t off = 0;
  for (const auto &f : factors_) {
    offsets_.push_back(off);
    off += f->m();
  }
}

double ProductPiece::distance(const Vector &c, const Vector &v) const {
  check_dims(c, v);
  double acc = 0.0;
  for (std::size_t i = 0; i < factors_.size(); ++i) {
    const auto off = static_cast<Eigen::Index>(offsets_[i]);
    const auto len = static_cast<Eigen::Index>(factors_[i]->m());
    acc += sq(factors_[i]->distance(c.segment(off, len), v.segment(off, len)));
  }
  return std::sqrt(acc);
}

std::pair<Vector, Vector> ProductPiece::project(const Vector &c,
                                                const Vector &v) const {
  check_dims(c, v);
  Vector pc(c.size()), pv(v.size());
  for (std::size_t i = 0; i < factors_.size(); ++i) {
    const auto off = static_cast<Eigen::Index>(offsets_[i]);
    const auto len = static_cast<Eigen::Index>(factors_[i]->m());
    auto [fc, fv] =
        factors_[i]->project(c.segment(off, len), v.segment(off, len));
    pc.segment(off, len) = fc;
    pv.segment(off, len) = fv;
  }
  return {pc, pv};
}

bool ProductPiece::contains(const Vector &c, const Vector &v,
                            double tol) const {
  check_dims(c, v);
  for (std::size_t i = 0; i < factors_.size(); ++i) {
    const auto off = static_cast<Eigen::Index>(offsets_[i]);
    const auto len = static_cast<Eigen::Index>(factors_[i]->m());
    if (!factors_[i]->contains(c.segment(off, len), v.segment(off, len), tol))
      return false;
  }
  return true;
}

std::optional<std::vector<CoordinateSection>> ProductPiece::sections() const {
  std::vector<CoordinateSection> out;
  for (const auto &f : factors_) {
    auto s = f->sections();
    if (!s)
      return std::nullopt;
    out.insert(out.end(), s->begin(), s->end());
  }
  return out;
}

PiecePtr ProductPiece::relabel(const std::string &id) const {
  return std::make_shared<ProductPiece>(id, factors_);
}

// ---------------------------------------------------------------------------

GraphDecomposition::GraphDecomposition(std::vector<PiecePtr> pieces)
    : pieces_(std::move(pieces)) {
  if (pieces_.empty())
    throw Error(ErrorCode::InvalidArgument, "empty decomposition");
  for (const auto &p : pieces_)
    if (p->m() != pieces_.front()->m())
      throw DimensionError("decomposition pieces disagree on dimension");
}

const GraphPiece *GraphDecomposition::find(const std::string &id) const {
  for (const auto &p : pieces_)
    if (p->id() == id)
      return p.get();
  return nullptr;
}

std::size_t GraphDecomposition::m() const {
  return pieces_.empty() ? 0 : pieces_.front()->m();
}

std::vector<double> GraphDecomposition::distances(const Vector &c,
                                                  const Vector &v) const {
  std::vector<double> out;
  out.reserve(pieces_.size());
  for (const auto &p : pieces_)
    out.push_back(p->distance(c, v));
  return out;
}

double GraphDecomposition::min_distance(const Vector &c,
                                        const Vector &v) const {
  auto d = distances(c, v);
  return *std::min_element(d.begin(), d.end());
}

GraphDecomposition
product_decomposition(const std::vector<GraphDecomposition> &factors) {
  if (factors.empty())
    throw Error(ErrorCode::InvalidArgument,
                "product_decomposition needs at least one factor");
  if (factors.size() == 1)
    return factors.front();

  std::size_t count = 1;
  for (const auto &f : factors) {
    count *= f.size();
    if (count > kMaxProductPieces)
      throw Error(ErrorCode::InvalidArgument,
                  "product decomposition exceeds " +
                      std::to_string(kMaxProductPieces) + " pieces");
  }

  std::vector<PiecePtr> pieces;
  pieces.reserve(count);
  std::vector<std::size_t> digit(factors.size(), 0);
  for (std::size_t k = 0; k < count; ++k) {
    std::vector<PiecePtr> parts;
    parts.reserve(factors.size());
    for (std::size_t i = 0; i < factors.size(); ++i)
      parts.push_back(factors[i].pieces()[digit[i]]);
    pieces.push_back(std::make_shared<ProductPiece>(
        "G" + std::to_string(k + 1), std::move(parts)));
    for (std::size_t i = factors.size(); i-- > 0;) {
      if (++digit[i] < factors[i].size())
        break;
      digit[i] = 0;
    }
  }
  return GraphDecomposition(std::move(pieces));
}

} // namespace actid
