#pragma once

#include "actid/identify.hpp"
#include "actid/proxlinear.hpp"

#include <string>
#include <vector>

namespace actid {

/// Parse failure inside a problem file, with 1-based line and column.
class ProblemFileError : public Error {
public:
  ProblemFileError(std::size_t line, std::size_t column, const std::string &what)
      : Error(ErrorCode::Parse, "line " + std::to_string(line) + ", column " +
                                    std::to_string(column) + ": " + what),
        line_(line), column_(column) {}
  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }

private:
  std::size_t line_;
  std::size_t column_;
};

/// A composite problem together with the run schedule.
struct ProblemSpec {
  CompositeProblem problem;
  Schedule schedule;
  /// Start of the plain prox-linear iteration x_{r+1} = x_r + d_r, used when
  /// no reference point is known.
  std::optional<Vector> start;
  std::vector<std::string> components; // source text of c1..cm
};

ProblemSpec parse_problem_text(const std::string &text,
                               const std::string &fallback_name = "problem");
ProblemSpec load_problem_file(const std::string &path);

/// Built-in problems: two-circle, abs-1d, l1-2d.
const std::vector<std::string> &demo_names();
ProblemSpec make_demo(const std::string &name);
/// Source text of a built-in problem in the file format.
std::string demo_source(const std::string &name);

/// Distances of the test pair X = I_k, Y = diag(y) to every G_{m,r}, with
/// y_i = 1/k + (k + 1 - 2i) * 0.1 / (k - 1) (y = 1 for k = 1).
std::string spectral_demo(std::size_t k);

struct RunOptions {
  RevealParams reveal;
  std::optional<double> mu;
  std::optional<std::size_t> steps;
  /// Certify every piece when the decomposition has at most this many.
  std::size_t certify_limit = 64;
};

struct RunResult {
  ProxSequence sequence;
  std::vector<Iterate> iterates;
  IdentificationReport report;
};

/// Prox-linear steps along the schedule, reveal, and (with a reference
/// point) piece certification.
RunResult run_identification(const ProblemSpec &spec, const RunOptions &options);

} // namespace actid
