#include "actid/outer.hpp"
#include "actid/expr.hpp"
#include "actid/spectral.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>

namespace actid {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string format_param(double value) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

std::string describe(const std::vector<CoordinateSection> &sections) {
  std::string out;
  for (std::size_t i = 0; i < sections.size(); ++i) {
    if (i)
      out += " ; ";
    out += sections[i].c.to_string() + " x " + sections[i].v.to_string();
  }
  return out;
}

PiecePtr rect_piece(const std::string &id, std::vector<CoordinateSection> s) {
  auto text = describe(s);
  return std::make_shared<PolyhedralPiece>(id, std::move(s), std::move(text));
}

// Pieces of one scalar term, labelled first_label, first_label + 1, ...
GraphDecomposition scalar_decomposition(const ScalarTerm &term,
                                        int first_label) {
  std::vector<PiecePtr> pieces;
  int label = first_label;
  for (const auto &s : term.graph_sections())
    pieces.push_back(rect_piece("G" + std::to_string(label++), {s}));
  return GraphDecomposition(std::move(pieces));
}

} // namespace

std::string to_string(OuterKind kind) {
  switch (kind) {
  case OuterKind::IndicatorNonneg:
    return "indicator_nonneg_scalar";
  case OuterKind::Abs:
    return "abs_scalar";
  case OuterKind::Pos:
    return "pos_scalar";
  case OuterKind::ExpPenalty:
    return "exp_penalty";
  case OuterKind::L1Two:
    return "l1_two";
  case OuterKind::EuclidNorm:
    return "euclid_norm";
  case OuterKind::MaxEig:
    return "max_eig";
  case OuterKind::Nlp:
    return "nlp";
  case OuterKind::L1ExactPenalty:
    return "l1_exact_penalty";
  }
  return "unknown";
}

// ---------------------------------------------------------------------------

double ScalarTerm::value(double t, double feas_tol) const {
  switch (type) {
  case Type::Linear:
    return weight * t;
  case Type::Zero:
    return std::abs(t) <= feas_tol ? 0.0 : kInf;
  case Type::NonPos:
    return t <= feas_tol ? 0.0 : kInf;
  case Type::NonNeg:
    return t >= -feas_tol ? 0.0 : kInf;
  case Type::Abs:
    return weight * std::abs(t);
  case Type::Pos:
    return weight * std::max(t, 0.0);
  }
  return kInf;
}

std::optional<Interval> ScalarTerm::subdifferential(double t, double tol) const {
  const bool at_zero = std::abs(t) <= tol;
  switch (type) {
  case Type::Linear:
    return Interval::point(weight);
  case Type::Zero:
    if (!at_zero)
      return std::nullopt;
    return Interval::real();
  case Type::NonPos:
    if (at_zero)
      return Interval::nonneg();
    if (t < 0.0)
      return Interval::point(0.0);
    return std::nullopt;
  case Type::NonNeg:
    if (at_zero)
      return Interval::nonpos();
    if (t > 0.0)
      return Interval::point(0.0);
    return std::nullopt;
  case Type::Abs:
    if (at_zero)
      return Interval{-weight, weight};
    return Interval::point(t > 0.0 ? weight : -weight);
  case Type::Pos:
    if (at_zero)
      return Interval{0.0, weight};
    return Interval::point(t > 0.0 ? weight : 0.0);
  }
  return std::nullopt;
}

Interval ScalarTerm::horizon(double t, double tol) const {
  const bool at_zero = std::abs(t) <= tol;
  switch (type) {
  case Type::Zero:
    return Interval::real();
  case Type::NonPos:
    return at_zero ? Interval::nonneg() : Interval::point(0.0);
  case Type::NonNeg:
    return at_zero ? Interval::nonpos() : Interval::point(0.0);
  default:
    return Interval::point(0.0);
  }
}

std::vector<CoordinateSection> ScalarTerm::graph_sections() const {
  switch (type) {
  case Type::Linear:
    return {{Interval::real(), Interval::point(weight)}};
  case Type::Zero:
    return {{Interval::point(0.0), Interval::real()}};
  case Type::NonPos:
    return {{Interval::nonpos(), Interval::point(0.0)},
            {Interval::point(0.0), Interval::nonneg()}};
  case Type::NonNeg:
    return {{Interval::point(0.0), Interval::nonpos()},
            {Interval::point(0.0), Interval::point(0.0)},
            {Interval::nonneg(), Interval::point(0.0)}};
  case Type::Abs:
    return {{Interval::nonpos(), Interval::point(-weight)},
            {Interval::point(0.0), Interval{-weight, weight}},
            {Interval::nonneg(), Interval::point(weight)}};
  case Type::Pos:
    return {{Interval::nonpos(), Interval::point(0.0)},
            {Interval::point(0.0), Interval{0.0, weight}},
            {Interval::nonneg(), Interval::point(weight)}};
  }
  return {};
}

// ---------------------------------------------------------------------------

void OuterFunction::check_dim(const Vector &c) const {
  if (static_cast<std::size_t>(c.size()) != m())
    throw DimensionError(spec() + " acts on R^" + std::to_string(m()) +
                         ", got R^" + std::to_string(c.size()));
}

HorizonCone OuterFunction::horizon(const Vector &c) const {
  if (std::isinf(value(c)))
    throw Error(ErrorCode::InvalidArgument,
                "horizon subdifferential requested where h = +inf");
  return HorizonCone{true, std::nullopt};
}

SeparableOuter::SeparableOuter(OuterKind kind, std::string spec,
                               std::vector<ScalarTerm> terms,
                               GraphDecomposition decomposition,
                               double feas_tol)
    : OuterFunction(feas_tol), kind_(kind), spec_(std::move(spec)),
      terms_(std::move(terms)) {
  if (terms_.empty())
    throw DimensionError("separable outer needs m >= 1");
  if (decomposition.m() != terms_.size())
    throw DimensionError("decomposition dimension mismatch");
  set_decomposition(std::move(decomposition));
}

double SeparableOuter::value(const Vector &c) const {
  check_dim(c);
  double acc = 0.0;
  for (std::size_t i = 0; i < terms_.size(); ++i) {
    const double t =
        terms_[i].value(c(static_cast<Eigen::Index>(i)), feasibility_tol());
    if (std::isinf(t))
      return kInf;
    acc += t;
  }
  return acc;
}

// Coordinatewise: (c_i, v_i) lies within tol (in max-norm) of gph(d phi_i).
bool SeparableOuter::subdiff_membership(const Vector &c, const Vector &v,
                                        double tol) const {
  check_dim(c);
  check_dim(v);
  for (std::size_t i = 0; i < terms_.size(); ++i) {
    const auto k = static_cast<Eigen::Index>(i);
    bool hit = false;
    for (const auto &s : terms_[i].graph_sections())
      if (std::max(s.c.distance(c(k)), s.v.distance(v(k))) <= tol) {
        hit = true;
        break;
      }
    if (!hit)
      return false;
  }
  return true;
}

HorizonCone SeparableOuter::horizon(const Vector &c) const {
  if (std::isinf(value(c)))
    throw Error(ErrorCode::InvalidArgument,
                "horizon subdifferential requested where h = +inf");
  HorizonCone out;
  out.coordinates.emplace();
  for (std::size_t i = 0; i < terms_.size(); ++i) {
    const Interval cone =
        terms_[i].horizon(c(static_cast<Eigen::Index>(i)), feasibility_tol());
    if (!(cone.lo == 0.0 && cone.hi == 0.0))
      out.trivial = false;
    out.coordinates->push_back(cone);
  }
  return out;
}

std::optional<std::vector<Interval>>
SeparableOuter::subdifferential_box(const Vector &c, double tol) const {
  check_dim(c);
  std::vector<Interval> out;
  for (std::size_t i = 0; i < terms_.size(); ++i) {
    auto box = terms_[i].subdifferential(c(static_cast<Eigen::Index>(i)), tol);
    if (!box)
      return std::nullopt;
    out.push_back(*box);
  }
  return out;
}

// ---------------------------------------------------------------------------

ExpPenaltyOuter::ExpPenaltyOuter(double alpha)
    : OuterFunction(1e-8), alpha_(alpha) {
  if (!(alpha > 0.0) || !std::isfinite(alpha))
    throw Error(ErrorCode::InvalidArgument, "exp_penalty needs alpha > 0");
  std::vector<PiecePtr> pieces{
      std::make_shared<ExpCurvePiece>("G1", alpha, -1),
      rect_piece("G2", {{Interval::point(0.0), Interval{-alpha, alpha}}}),
      std::make_shared<ExpCurvePiece>("G3", alpha, 1)};
  set_decomposition(GraphDecomposition(std::move(pieces)));
}

std::string ExpPenaltyOuter::spec() const {
  return "exp_penalty(alpha=" + format_param(alpha_) + ")";
}

double ExpPenaltyOuter::value(const Vector &c) const {
  check_dim(c);
  return 1.0 - std::exp(-alpha_ * std::abs(c(0)));
}

bool ExpPenaltyOuter::subdiff_membership(const Vector &c, const Vector &v,
                                         double tol) const {
  check_dim(c);
  check_dim(v);
  return decomposition().min_distance(c, v) <= tol;
}

// ---------------------------------------------------------------------------

EuclidNormOuter::EuclidNormOuter(std::size_t n) : OuterFunction(1e-8), n_(n) {
  if (n == 0)
    throw DimensionError("euclid_norm needs n >= 1");
  set_decomposition(
      GraphDecomposition({std::make_shared<NormBallPiece>("G1", n),
                          std::make_shared<NormRayPiece>("G2", n)}));
}

std::string EuclidNormOuter::spec() const {
  return "euclid_norm(n=" + std::to_string(n_) + ")";
}

double EuclidNormOuter::value(const Vector &c) const {
  check_dim(c);
  return c.norm();
}

bool EuclidNormOuter::subdiff_membership(const Vector &c, const Vector &v,
                                         double tol) const {
  check_dim(c);
  check_dim(v);
  const double nc = c.norm();
  if (nc <= tol)
    return v.norm() <= 1.0 + tol;
  return (v - c / nc).norm() <= tol;
}

// ---------------------------------------------------------------------------

MaxEigOuter::MaxEigOuter(std::size_t k) : OuterFunction(1e-8), k_(k) {
  if (k == 0)
    throw DimensionError("max_eig needs k >= 1");
  std::vector<PiecePtr> pieces;
  for (std::size_t m = 1; m <= k; ++m)
    for (std::size_t r = 1; r <= m; ++r)
      pieces.push_back(std::make_shared<SpectralPiece>(k, m, r));
  set_decomposition(GraphDecomposition(std::move(pieces)));
}

std::size_t MaxEigOuter::m() const { return packed_size(k_); }

std::string MaxEigOuter::spec() const {
  return "max_eig(k=" + std::to_string(k_) + ")";
}

double MaxEigOuter::value(const Vector &c) const {
  check_dim(c);
  return jacobi_eigen(smat(c, k_)).values(0);
}

bool MaxEigOuter::subdiff_membership(const Vector &c, const Vector &v,
                                     double tol) const {
  check_dim(c);
  check_dim(v);
  return in_max_eig_graph(smat(c, k_), smat(v, k_), tol);
}

// ---------------------------------------------------------------------------

PiecePtr gj_piece(const NlpData &nlp, const IndexSet &J) {
  std::vector<bool> in_j(nlp.t, false);
  for (auto j : J) {
    if (j >= nlp.t)
      throw Error(ErrorCode::InvalidArgument,
                  "index " + std::to_string(j + 1) + " outside 1..t");
    in_j[j] = true;
  }
  std::vector<CoordinateSection> sections;
  sections.push_back({Interval::real(), Interval::point(1.0)});
  for (std::size_t i = 0; i < nlp.s; ++i)
    sections.push_back({Interval::point(0.0), Interval::real()});
  for (std::size_t j = 0; j < nlp.t; ++j)
    sections.push_back(in_j[j]
                           ? CoordinateSection{Interval::point(0.0), Interval::nonneg()}
                           : CoordinateSection{Interval::nonpos(), Interval::point(0.0)});

  std::string id;
  if (nlp.t < 63) {
    unsigned long long mask = 0;
    for (auto j : J)
      mask |= 1ULL << j;
    id = "G" + std::to_string(mask + 1);
  } else {
    id = "GJ" + format_index_set(J);
  }
  return std::make_shared<PolyhedralPiece>(id, std::move(sections),
                                           "G^J with J = " + format_index_set(J));
}

OuterPtr make_indicator_nonneg(double feas_tol) {
  ScalarTerm term{ScalarTerm::Type::NonNeg, 1.0};
  return std::make_shared<SeparableOuter>(
      OuterKind::IndicatorNonneg, "indicator_nonneg_scalar",
      std::vector<ScalarTerm>{term}, scalar_decomposition(term, 1), feas_tol);
}

OuterPtr make_abs() {
  ScalarTerm term{ScalarTerm::Type::Abs, 1.0};
  return std::make_shared<SeparableOuter>(OuterKind::Abs, "abs_scalar",
                                          std::vector<ScalarTerm>{term},
                                          scalar_decomposition(term, 1));
}

OuterPtr make_pos() {
  ScalarTerm term{ScalarTerm::Type::Pos, 1.0};
  return std::make_shared<SeparableOuter>(OuterKind::Pos, "pos_scalar",
                                          std::vector<ScalarTerm>{term},
                                          scalar_decomposition(term, 4));
}

OuterPtr make_exp_penalty(double alpha) {
  return std::make_shared<ExpPenaltyOuter>(alpha);
}

OuterPtr make_l1_two() {
  ScalarTerm abs_term{ScalarTerm::Type::Abs, 1.0};
  ScalarTerm pos_term{ScalarTerm::Type::Pos, 1.0};
  auto decomposition = product_decomposition(
      {scalar_decomposition(abs_term, 1), scalar_decomposition(pos_term, 4)});
  return std::make_shared<SeparableOuter>(
      OuterKind::L1Two, "l1_two", std::vector<ScalarTerm>{abs_term, pos_term},
      std::move(decomposition));
}

OuterPtr make_euclid_norm(std::size_t n) {
  return std::make_shared<EuclidNormOuter>(n);
}

OuterPtr make_max_eig(std::size_t k) { return std::make_shared<MaxEigOuter>(k); }

OuterPtr make_nlp(std::size_t s, std::size_t t, double feas_tol) {
  if (t > kMaxEnumeratedInequalities)
    throw Error(ErrorCode::InvalidArgument,
                "nlp decomposition with t > " +
                    std::to_string(kMaxEnumeratedInequalities) +
                    " is too large; enumerate pieces with gj_piece");
  NlpData nlp{s, t};
  std::vector<ScalarTerm> terms;
  terms.push_back({ScalarTerm::Type::Linear, 1.0});
  for (std::size_t i = 0; i < s; ++i)
    terms.push_back({ScalarTerm::Type::Zero, 1.0});
  for (std::size_t j = 0; j < t; ++j)
    terms.push_back({ScalarTerm::Type::NonPos, 1.0});

  std::vector<PiecePtr> pieces;
  const std::size_t count = std::size_t{1} << t;
  for (std::size_t mask = 0; mask < count; ++mask) {
    IndexSet J;
    for (std::size_t j = 0; j < t; ++j)
      if (mask & (std::size_t{1} << j))
        J.push_back(j);
    pieces.push_back(gj_piece(nlp, J));
  }
  return std::make_shared<SeparableOuter>(
      OuterKind::Nlp,
      "nlp(s=" + std::to_string(s) + ",t=" + std::to_string(t) + ")",
      std::move(terms), GraphDecomposition(std::move(pieces)), feas_tol);
}

OuterPtr make_l1_exact_penalty(std::size_t s, std::size_t t, double nu) {
  if (!(nu > 0.0) || !std::isfinite(nu))
    throw Error(ErrorCode::InvalidArgument, "l1_exact_penalty needs nu > 0");
  std::vector<ScalarTerm> terms;
  std::vector<GraphDecomposition> factors;
  ScalarTerm objective{ScalarTerm::Type::Linear, 1.0};
  terms.push_back(objective);
  factors.push_back(
      GraphDecomposition({rect_piece("U", objective.graph_sections())}));
  ScalarTerm abs_term{ScalarTerm::Type::Abs, nu};
  ScalarTerm pos_term{ScalarTerm::Type::Pos, nu};
  for (std::size_t i = 0; i < s; ++i) {
    terms.push_back(abs_term);
    factors.push_back(scalar_decomposition(abs_term, 1));
  }
  for (std::size_t j = 0; j < t; ++j) {
    terms.push_back(pos_term);
    factors.push_back(scalar_decomposition(pos_term, 4));
  }
  auto decomposition = product_decomposition(factors);
  return std::make_shared<SeparableOuter>(
      OuterKind::L1ExactPenalty,
      "l1_exact_penalty(s=" + std::to_string(s) + ",t=" + std::to_string(t) +
          ",nu=" + format_param(nu) + ")",
      std::move(terms), std::move(decomposition));
}

std::optional<NlpData> nlp_layout(const OuterFunction &h) {
  if (h.kind() != OuterKind::Nlp)
    return std::nullopt;
  const auto *terms = h.separable_terms();
  NlpData out;
  for (const auto &term : *terms) {
    if (term.type == ScalarTerm::Type::Zero)
      ++out.s;
    else if (term.type == ScalarTerm::Type::NonPos)
      ++out.t;
  }
  return out;
}

// ---------------------------------------------------------------------------

namespace {

class SpecReader {
public:
  explicit SpecReader(const std::string &text) : text_(text) {}

  OuterPtr read() {
    skip();
    const std::size_t name_start = pos_;
    while (pos_ < text_.size() &&
           (std::isalnum(static_cast<unsigned char>(text_[pos_])) ||
            text_[pos_] == '_'))
      ++pos_;
    const std::string name = text_.substr(name_start, pos_ - name_start);
    if (name.empty())
      throw ParseError("expected an outer function name", name_start);
    skip();
    if (pos_ < text_.size() && text_[pos_] == '(') {
      ++pos_;
      read_arguments();
    }
    skip();
    if (pos_ != text_.size())
      throw ParseError("unexpected trailing text in h spec", pos_);
    return build(name, name_start);
  }

private:
  void skip() {
    while (pos_ < text_.size() &&
           std::isspace(static_cast<unsigned char>(text_[pos_])))
      ++pos_;
  }

  void read_arguments() {
    skip();
    if (pos_ < text_.size() && text_[pos_] == ')') {
      ++pos_;
      return;
    }
    for (;;) {
      skip();
      const std::size_t start = pos_;
      std::string key;
      while (pos_ < text_.size() &&
             (std::isalnum(static_cast<unsigned char>(text_[pos_])) ||
              text_[pos_] == '_' || text_[pos_] == '.' || text_[pos_] == '-' ||
              text_[pos_] == '+'))
        ++pos_;
      std::string token = text_.substr(start, pos_ - start);
      skip();
      std::string value_text;
      std::size_t value_pos = start;
      if (pos_ < text_.size() && text_[pos_] == '=') {
        ++pos_;
        skip();
        key = token;
        value_pos = pos_;
        while (pos_ < text_.size() && text_[pos_] != ',' && text_[pos_] != ')' &&
               !std::isspace(static_cast<unsigned char>(text_[pos_])))
          ++pos_;
        value_text = text_.substr(value_pos, pos_ - value_pos);
      } else {
        value_text = token; // positional
      }
      if (value_text.empty())
        throw ParseError("missing parameter value", value_pos);
      char *end = nullptr;
      const double value = std::strtod(value_text.c_str(), &end);
      if (end == value_text.c_str() || *end != '\0')
        throw ParseError("parameter value '" + value_text + "' is not a number",
                         value_pos);
      if (key.empty()) {
        if (!args_.empty())
          throw ParseError("only one positional parameter is allowed", start);
        positional_ = value;
        positional_pos_ = start;
      } else {
        if (args_.count(key))
          throw ParseError("duplicate parameter '" + key + "'", start);
        args_[key] = {value, start};
      }
      skip();
      if (pos_ < text_.size() && text_[pos_] == ',') {
        ++pos_;
        continue;
      }
      if (pos_ < text_.size() && text_[pos_] == ')') {
        ++pos_;
        return;
      }
      throw ParseError("expected ',' or ')' in parameter list", pos_);
    }
  }

  double take(const std::string &key, std::optional<double> fallback,
              bool allow_positional) {
    auto it = args_.find(key);
    if (it != args_.end()) {
      const double v = it->second.first;
      args_.erase(it);
      return v;
    }
    if (allow_positional && positional_) {
      const double v = *positional_;
      positional_.reset();
      return v;
    }
    if (fallback)
      return *fallback;
    throw ParseError("missing parameter '" + key + "'", text_.size());
  }

  std::size_t take_count(const std::string &key, bool allow_positional,
                         std::optional<double> fallback = std::nullopt) {
    const double v = take(key, fallback, allow_positional);
    if (v < 0.0 || v != std::floor(v) || v > 1e6)
      throw ParseError("parameter '" + key + "' must be a nonnegative integer",
                       0);
    return static_cast<std::size_t>(v);
  }

  OuterPtr build(const std::string &name, std::size_t name_pos) {
    OuterPtr out;
    if (name == "indicator_nonneg_scalar")
      out = make_indicator_nonneg();
    else if (name == "abs_scalar")
      out = make_abs();
    else if (name == "pos_scalar")
      out = make_pos();
    else if (name == "l1_two")
      out = make_l1_two();
    else if (name == "exp_penalty")
      out = make_exp_penalty(take("alpha", 1.0, true));
    else if (name == "euclid_norm")
      out = make_euclid_norm(take_count("n", true));
    else if (name == "max_eig")
      out = make_max_eig(take_count("k", true));
    else if (name == "nlp") {
      const auto s = take_count("s", false, 0.0);
      const auto t = take_count("t", false, 0.0);
      out = make_nlp(s, t);
    } else if (name == "l1_exact_penalty") {
      const auto s = take_count("s", false, 0.0);
      const auto t = take_count("t", false, 0.0);
      out = make_l1_exact_penalty(s, t, take("nu", std::nullopt, false));
    } else {
      throw ParseError("unknown outer function '" + name + "'", name_pos);
    }
    if (!args_.empty())
      throw ParseError("unknown parameter '" + args_.begin()->first + "' for " +
                           name,
                       args_.begin()->second.second);
    if (positional_)
      throw ParseError("unexpected positional parameter for " + name,
                       positional_pos_);
    return out;
  }

  const std::string &text_;
  std::size_t pos_ = 0;
  std::map<std::string, std::pair<double, std::size_t>> args_;
  std::optional<double> positional_;
  std::size_t positional_pos_ = 0;
};

} // namespace

OuterPtr parse_outer_spec(const std::string &text) {
  return SpecReader(text).read();
}

} // namespace actid
