#include "actid/problem.hpp"
#include "actid/expr.hpp"
#include "actid/outer.hpp"
#include "actid/spectral.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

namespace actid {

namespace {

struct Entry {
  std::string value;
  std::size_t line = 0;
  std::size_t key_column = 0;
  std::size_t value_column = 0;
};

using Section = std::map<std::string, Entry>;

std::string trim(const std::string &s, std::size_t &lead) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a])))
    ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1])))
    --b;
  lead = a;
  return s.substr(a, b - a);
}

double parse_number(const Entry &e, const std::string &text, std::size_t column) {
  char *end = nullptr;
  const double v = std::strtod(text.c_str(), &end);
  if (text.empty() || end != text.c_str() + text.size() || !std::isfinite(v))
    throw ProblemFileError(e.line, column, "expected a number, got '" + text + "'");
  return v;
}

double number_of(const Entry &e) {
  return parse_number(e, e.value, e.value_column);
}

std::size_t count_of(const Entry &e) {
  const double v = number_of(e);
  if (v < 0.0 || v != std::floor(v) || v > 1e6)
    throw ProblemFileError(e.line, e.value_column,
                           "expected a nonnegative integer, got '" + e.value + "'");
  return static_cast<std::size_t>(v);
}

Vector vector_of(const Entry &e) {
  std::vector<double> values;
  std::size_t pos = 0;
  while (pos <= e.value.size()) {
    std::size_t comma = e.value.find(',', pos);
    if (comma == std::string::npos)
      comma = e.value.size();
    std::size_t lead = 0;
    const std::string raw = e.value.substr(pos, comma - pos);
    const std::string item = trim(raw, lead);
    values.push_back(parse_number(e, item, e.value_column + pos + lead));
    pos = comma + 1;
  }
  Vector out(static_cast<Eigen::Index>(values.size()));
  for (std::size_t i = 0; i < values.size(); ++i)
    out(static_cast<Eigen::Index>(i)) = values[i];
  return out;
}

std::map<std::string, Section> split_sections(const std::string &text) {
  std::map<std::string, Section> out;
  std::string current;
  std::istringstream in(text);
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    if (!raw.empty() && raw.back() == '\r')
      raw.pop_back();
    const std::size_t hash = raw.find('#');
    const std::string body = hash == std::string::npos ? raw : raw.substr(0, hash);
    std::size_t lead = 0;
    const std::string line = trim(body, lead);
    if (line.empty())
      continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ProblemFileError(line_no, lead + line.size(), "expected ']'");
      std::size_t inner_lead = 0;
      current = trim(line.substr(1, line.size() - 2), inner_lead);
      if (current != "problem" && current != "reference" && current != "schedule")
        throw ProblemFileError(line_no, lead + 2 + inner_lead,
                               "unknown section [" + current + "]");
      if (out.count(current))
        throw ProblemFileError(line_no, lead + 1,
                               "section [" + current + "] appears twice");
      out[current];
      continue;
    }
    if (current.empty())
      throw ProblemFileError(line_no, lead + 1,
                             "entry outside a section; start with [problem]");
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ProblemFileError(line_no, lead + 1, "expected 'key = value'");
    std::size_t key_lead = 0, value_lead = 0;
    const std::string key = trim(line.substr(0, eq), key_lead);
    const std::string value = trim(line.substr(eq + 1), value_lead);
    if (key.empty())
      throw ProblemFileError(line_no, lead + 1, "missing key before '='");
    if (value.empty())
      throw ProblemFileError(line_no, lead + eq + 2, "missing value for " + key);
    Section &sec = out[current];
    if (sec.count(key))
      throw ProblemFileError(line_no, lead + key_lead + 1,
                             "duplicate key '" + key + "'");
    sec[key] = Entry{value, line_no, lead + key_lead + 1,
                     lead + eq + 1 + value_lead + 1};
  }
  return out;
}

void reject_unknown(const Section &sec, const std::vector<std::string> &allowed,
                    const std::string &section) {
  for (const auto &[key, e] : sec) {
    bool ok = false;
    for (const auto &a : allowed)
      ok = ok || key == a;
    if (!ok)
      throw ProblemFileError(e.line, e.key_column,
                             "unknown key '" + key + "' in [" + section + "]");
  }
}

const std::map<std::string, std::string> &demo_sources() {
  static const std::map<std::string, std::string> sources{
      {"two-circle", R"(# min -x1 subject to two circle constraints; xbar = (1, 0)
[problem]
name = two-circle
n = 2
h = nlp(s=0, t=2)
c1 = -x1
c2 = x1^2 + x2^2 - 1
c3 = (x1 + 1)^2 + x2^2 - 4

[reference]
x = 1, 0

[schedule]
eps0 = 0.1
shrink = 0.5
steps = 16
mu = 1
direction = -1, 0
)"},
      {"abs-1d", R"(# |x^2 - 1| near its minimizer x = 1
[problem]
name = abs-1d
n = 1
h = abs_scalar
c1 = x1^2 - 1

[reference]
x = 1

[schedule]
eps0 = 0.1
shrink = 0.5
steps = 16
mu = 1
direction = 1
)"},
      {"l1-2d", R"(# |x1 - x2| + max(x1^2 + x2^2 - 2, 0) around xbar = (1, 1)
[problem]
name = l1-2d
n = 2
h = l1_two
c1 = x1 - x2
c2 = x1^2 + x2^2 - 2

[reference]
x = 1, 1

[schedule]
eps0 = 0.1
shrink = 0.5
steps = 16
mu = 1
direction = 1, 0.5
)"},
  };
  return sources;
}

} // namespace

ProblemSpec parse_problem_text(const std::string &text,
                               const std::string &fallback_name) {
  const auto sections = split_sections(text);
  const auto found = sections.find("problem");
  if (found == sections.end())
    throw ProblemFileError(1, 1, "missing [problem] section");
  const Section &prob = found->second;

  auto require = [&](const std::string &key) -> const Entry & {
    const auto it = prob.find(key);
    if (it == prob.end())
      throw ProblemFileError(1, 1, "[problem] needs '" + key + " = ...'");
    return it->second;
  };

  std::string name = fallback_name;
  if (const auto it = prob.find("name"); it != prob.end())
    name = it->second.value;

  const Entry &n_entry = require("n");
  const std::size_t n = count_of(n_entry);
  if (n == 0)
    throw ProblemFileError(n_entry.line, n_entry.value_column, "n must be >= 1");

  const Entry &h_entry = require("h");
  OuterPtr outer;
  try {
    outer = parse_outer_spec(h_entry.value);
  } catch (const ParseError &e) {
    throw ProblemFileError(h_entry.line, h_entry.value_column + e.offset(),
                           e.detail());
  } catch (const Error &e) {
    throw ProblemFileError(h_entry.line, h_entry.value_column, e.what());
  }

  // Components c1..cm, contiguous.
  std::size_t m = 0;
  for (const auto &[key, e] : prob) {
    if (key == "name" || key == "n" || key == "h")
      continue;
    bool numbered = key.size() > 1 && key[0] == 'c';
    for (std::size_t i = 1; numbered && i < key.size(); ++i)
      numbered = std::isdigit(static_cast<unsigned char>(key[i])) != 0;
    if (!numbered || key[1] == '0')
      throw ProblemFileError(e.line, e.key_column,
                             "unknown key '" + key + "' in [problem]");
    m = std::max(m, static_cast<std::size_t>(std::stoul(key.substr(1))));
  }
  if (m == 0)
    throw ProblemFileError(h_entry.line, 1, "no component lines c1 = ...");

  std::vector<Expression> exprs;
  std::vector<std::string> texts;
  for (std::size_t i = 1; i <= m; ++i) {
    const auto it = prob.find("c" + std::to_string(i));
    if (it == prob.end())
      throw ProblemFileError(h_entry.line, 1,
                             "component c" + std::to_string(i) + " is missing");
    try {
      exprs.push_back(parse_expression(it->second.value, n));
    } catch (const ParseError &e) {
      throw ProblemFileError(it->second.line, it->second.value_column + e.offset(),
                             e.detail());
    }
    texts.push_back(it->second.value);
  }
  if (outer->m() != m)
    throw ProblemFileError(h_entry.line, h_entry.value_column,
                           outer->spec() + " acts on R^" +
                               std::to_string(outer->m()) + " but " +
                               std::to_string(m) + " components are given");

  std::optional<Vector> reference;
  if (const auto it = sections.find("reference"); it != sections.end()) {
    reject_unknown(it->second, {"x"}, "reference");
    const auto x = it->second.find("x");
    if (x != it->second.end()) {
      reference = vector_of(x->second);
      if (static_cast<std::size_t>(reference->size()) != n)
        throw ProblemFileError(x->second.line, x->second.value_column,
                               "reference point needs " + std::to_string(n) +
                                   " coordinates");
    }
  }

  ProblemSpec spec{CompositeProblem(name,
                                    std::make_shared<SmoothMap>(
                                        expression_map(std::move(exprs))),
                                    outer, reference),
                   Schedule{}, std::nullopt, std::move(texts)};

  if (const auto it = sections.find("schedule"); it != sections.end()) {
    const Section &sec = it->second;
    reject_unknown(sec, {"eps0", "shrink", "steps", "mu", "direction", "start"},
                   "schedule");
    auto positive = [](const Entry &e, double v) {
      if (!(v > 0.0))
        throw ProblemFileError(e.line, e.value_column, "value must be > 0");
      return v;
    };
    if (auto e = sec.find("eps0"); e != sec.end())
      spec.schedule.eps0 = positive(e->second, number_of(e->second));
    if (auto e = sec.find("shrink"); e != sec.end()) {
      spec.schedule.shrink = positive(e->second, number_of(e->second));
      if (spec.schedule.shrink >= 1.0)
        throw ProblemFileError(e->second.line, e->second.value_column,
                               "shrink must lie in (0, 1)");
    }
    if (auto e = sec.find("steps"); e != sec.end())
      spec.schedule.steps = count_of(e->second);
    if (auto e = sec.find("mu"); e != sec.end())
      spec.schedule.mu = positive(e->second, number_of(e->second));
    for (const char *key : {"direction", "start"}) {
      if (auto e = sec.find(key); e != sec.end()) {
        Vector v = vector_of(e->second);
        if (static_cast<std::size_t>(v.size()) != n)
          throw ProblemFileError(e->second.line, e->second.value_column,
                                 std::string(key) + " needs " +
                                     std::to_string(n) + " coordinates");
        if (std::string(key) == "direction")
          spec.schedule.direction = v;
        else
          spec.start = v;
      }
    }
  }
  return spec;
}

ProblemSpec load_problem_file(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw Error(ErrorCode::InvalidArgument, "cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  std::string stem = path;
  if (const auto slash = stem.find_last_of('/'); slash != std::string::npos)
    stem = stem.substr(slash + 1);
  if (const auto dot = stem.find_last_of('.'); dot != std::string::npos && dot > 0)
    stem = stem.substr(0, dot);
  return parse_problem_text(buf.str(), stem);
}

const std::vector<std::string> &demo_names() {
  static const std::vector<std::string> names{"two-circle", "abs-1d", "l1-2d",
                                              "eig"};
  return names;
}

std::string demo_source(const std::string &name) {
  const auto &src = demo_sources();
  const auto it = src.find(name);
  if (it == src.end())
    throw Error(ErrorCode::InvalidArgument, "unknown demo '" + name + "'");
  return it->second;
}

ProblemSpec make_demo(const std::string &name) {
  return parse_problem_text(demo_source(name), name);
}

std::string spectral_demo(std::size_t k) {
  if (k == 0 || k > 64)
    throw Error(ErrorCode::InvalidArgument, "eig demo needs 1 <= k <= 64");
  const auto kk = static_cast<Eigen::Index>(k);
  Vector y(kk);
  for (Eigen::Index i = 0; i < kk; ++i)
    y(i) = k == 1 ? 1.0
                  : 1.0 / static_cast<double>(k) +
                        static_cast<double>(kk + 1 - 2 * (i + 1)) * 0.1 /
                            static_cast<double>(k - 1);
  const Matrix X = Matrix::Identity(kk, kk);
  const Matrix Y = y.asDiagonal();
  const SpectralPoint point = SpectralPoint::from_matrices(X, Y);

  std::ostringstream os;
  os << "# eig demo k=" << k << "\n";
  os << "# X = I_" << k << "\n";
  os << "# Y = diag" << format_vector(y, 6) << "\n";
  os << "# in gph(d lambda_max): "
     << (in_max_eig_graph(X, Y, 1e-10) ? "yes" : "no") << "\n";
  os << "m\tr\tpiece\tdistance\tprojection_in_piece\n";
  char buf[32];
  for (std::size_t m = 1; m <= k; ++m)
    for (std::size_t r = 1; r <= m; ++r) {
      const auto proj = spectral_piece_distance(point, m, r);
      std::snprintf(buf, sizeof buf, "%.6f", proj.distance);
      os << m << "\t" << r << "\tG_" << m << "_" << r << "\t" << buf << "\t"
         << (in_spectral_piece(proj.X, proj.Y, m, r, 1e-10) ? "yes" : "no")
         << "\n";
    }
  return os.str();
}

RunResult run_identification(const ProblemSpec &spec, const RunOptions &options) {
  const CompositeProblem &problem = spec.problem;
  Schedule schedule = spec.schedule;
  if (options.mu) {
    if (!(*options.mu > 0.0))
      throw Error(ErrorCode::InvalidArgument, "--mu must be > 0");
    schedule.mu = *options.mu;
  }
  if (options.steps)
    schedule.steps = *options.steps;
  if (schedule.steps == 0)
    throw Error(ErrorCode::InvalidArgument, "the schedule needs at least one step");

  RunResult out;
  const std::vector<double> mus(schedule.steps, schedule.mu);
  if (problem.reference_point) {
    const auto eps = schedule.epsilons();
    out.sequence = run_prox_sequence(problem, schedule.points(*problem.reference_point),
                                     mus);
    for (std::size_t r = 0; r < out.sequence.steps.size(); ++r)
      out.iterates.push_back(Iterate::from_step(out.sequence.steps[r], eps[r]));
  } else {
    if (!spec.start)
      throw Error(ErrorCode::InvalidArgument,
                  "without a reference point the schedule needs 'start = ...'");
    Vector x = *spec.start;
    for (std::size_t r = 0; r < schedule.steps; ++r) {
      out.sequence.steps.push_back(solve_prox_subproblem(problem, x, schedule.mu));
      x = x + out.sequence.steps.back().d;
    }
    for (const auto &step : out.sequence.steps)
      out.iterates.push_back(Iterate::from_step(step));
  }

  out.report = reveal(problem, problem.outer->decomposition(), out.iterates,
                      options.reveal);
  out.report.hypothesis_warning = out.sequence.hypothesis_warning;

  if (problem.reference_point) {
    const auto &dec = problem.outer->decomposition();
    const bool all = dec.size() <= options.certify_limit;
    for (const auto &piece : dec.pieces()) {
      const bool revealed =
          std::find(out.report.summary.begin(), out.report.summary.end(),
                    piece->id()) != out.report.summary.end();
      if (all || revealed)
        out.report.certification.push_back(
            certify_piece(problem, *piece, *problem.reference_point));
    }
  }
  return out;
}

} // namespace actid
