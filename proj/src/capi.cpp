#include "actid/actid.h"

#include "actid/identify.hpp"
#include "actid/outer.hpp"
#include "actid/problem.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <limits>
#include <new>
#include <sstream>

struct actid_problem {
  actid::ProblemSpec spec;
  std::string h_spec;
};

struct actid_report {
  actid::RunResult result;
  std::string trace;
  std::string summary;
  std::string pretty;
};

namespace {

thread_local std::string g_last_error;

actid_status to_status(actid::ErrorCode code) {
  switch (code) {
  case actid::ErrorCode::InvalidArgument:
    return ACTID_ERR_INVALID_ARGUMENT;
  case actid::ErrorCode::Parse:
    return ACTID_ERR_PARSE;
  case actid::ErrorCode::Numerical:
    return ACTID_ERR_NUMERICAL;
  case actid::ErrorCode::Infeasible:
    return ACTID_ERR_INFEASIBLE;
  case actid::ErrorCode::Unbounded:
    return ACTID_ERR_UNBOUNDED;
  case actid::ErrorCode::Unsupported:
    return ACTID_ERR_UNSUPPORTED;
  }
  return ACTID_ERR_INTERNAL;
}

template <class F> actid_status guarded(F &&body) {
  try {
    g_last_error.clear();
    body();
    return ACTID_OK;
  } catch (const actid::Error &e) {
    g_last_error = e.what();
    return to_status(e.code());
  } catch (const std::bad_alloc &) {
    g_last_error = "out of memory";
    return ACTID_ERR_INTERNAL;
  } catch (const std::exception &e) {
    g_last_error = e.what();
    return ACTID_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown error";
    return ACTID_ERR_INTERNAL;
  }
}

actid_status null_argument(const char *what) {
  g_last_error = std::string("null argument: ") + what;
  return ACTID_ERR_INVALID_ARGUMENT;
}

actid_problem *make_handle(actid::ProblemSpec spec) {
  auto *out = new actid_problem{std::move(spec), {}};
  out->h_spec = out->spec.problem.outer->spec();
  return out;
}

char *duplicate(const std::string &s) {
  char *out = static_cast<char *>(std::malloc(s.size() + 1));
  if (!out)
    throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

const actid::Vector &reference_of(const actid_problem *problem) {
  const auto &ref = problem->spec.problem.reference_point;
  if (!ref)
    throw actid::Error(actid::ErrorCode::InvalidArgument,
                       "the problem has no reference point ([reference] x = ...)");
  return *ref;
}

std::string yes_no(bool b) { return b ? "yes" : "no"; }

std::string number(double x) {
  if (std::isinf(x))
    return x > 0 ? "inf" : "-inf";
  if (x == 0.0)
    x = 0.0;
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", x);
  return buf;
}

} // namespace

extern "C" {

void actid_run_options_init(actid_run_options *options) {
  if (!options)
    return;
  const actid::RevealParams defaults;
  options->eps_reveal = defaults.eps_reveal;
  options->delta = defaults.delta;
  options->tail = defaults.tail;
  options->mu = 0.0;
  options->steps = 0;
}

const char *actid_last_error(void) { return g_last_error.c_str(); }

const char *actid_status_name(actid_status status) {
  switch (status) {
  case ACTID_OK:
    return "ok";
  case ACTID_ERR_INVALID_ARGUMENT:
    return "invalid argument";
  case ACTID_ERR_PARSE:
    return "parse error";
  case ACTID_ERR_NUMERICAL:
    return "numerical failure";
  case ACTID_ERR_INFEASIBLE:
    return "infeasible";
  case ACTID_ERR_UNBOUNDED:
    return "unbounded";
  case ACTID_ERR_UNSUPPORTED:
    return "unsupported";
  case ACTID_ERR_IO:
    return "i/o error";
  case ACTID_ERR_INTERNAL:
    return "internal error";
  }
  return "unknown status";
}

void actid_string_free(char *s) { std::free(s); }

actid_status actid_problem_load_file(const char *path, actid_problem **out) {
  if (!path || !out)
    return null_argument("path/out");
  *out = nullptr;
  {
    std::FILE *f = std::fopen(path, "rb");
    if (!f) {
      g_last_error = std::string("cannot open ") + path;
      return ACTID_ERR_IO;
    }
    std::fclose(f);
  }
  return guarded([&] {
    *out = make_handle(actid::load_problem_file(path));
  });
}

actid_status actid_problem_load_text(const char *text, const char *name,
                                     actid_problem **out) {
  if (!text || !out)
    return null_argument("text/out");
  *out = nullptr;
  return guarded([&] {
    *out = make_handle(actid::parse_problem_text(text, name ? name : "problem"));
  });
}

actid_status actid_problem_demo(const char *name, actid_problem **out) {
  if (!name || !out)
    return null_argument("name/out");
  *out = nullptr;
  return guarded([&] { *out = make_handle(actid::make_demo(name)); });
}

void actid_problem_free(actid_problem *problem) { delete problem; }

const char *actid_problem_name(const actid_problem *problem) {
  return problem ? problem->spec.problem.name.c_str() : "";
}

const char *actid_problem_h_spec(const actid_problem *problem) {
  return problem ? problem->h_spec.c_str() : "";
}

size_t actid_problem_n(const actid_problem *problem) {
  return problem ? problem->spec.problem.n() : 0;
}

size_t actid_problem_m(const actid_problem *problem) {
  return problem ? problem->spec.problem.m() : 0;
}

int actid_problem_has_reference(const actid_problem *problem) {
  return problem && problem->spec.problem.reference_point ? 1 : 0;
}

size_t actid_problem_piece_count(const actid_problem *problem) {
  return problem ? problem->spec.problem.outer->decomposition().size() : 0;
}

const char *actid_problem_piece_id(const actid_problem *problem, size_t index) {
  if (!problem || index >= actid_problem_piece_count(problem))
    return nullptr;
  return problem->spec.problem.outer->decomposition().piece(index).id().c_str();
}

const char *actid_problem_piece_description(const actid_problem *problem,
                                            size_t index) {
  if (!problem || index >= actid_problem_piece_count(problem))
    return nullptr;
  return problem->spec.problem.outer->decomposition()
      .piece(index)
      .description()
      .c_str();
}

actid_status actid_run(const actid_problem *problem,
                       const actid_run_options *options, actid_report **out) {
  if (!problem || !out)
    return null_argument("problem/out");
  *out = nullptr;
  actid_run_options opts;
  actid_run_options_init(&opts);
  if (options)
    opts = *options;
  return guarded([&] {
    actid::RunOptions run;
    run.reveal.eps_reveal = opts.eps_reveal;
    run.reveal.delta = opts.delta;
    run.reveal.tail = opts.tail;
    if (opts.mu > 0.0)
      run.mu = opts.mu;
    else if (opts.mu < 0.0 || std::isnan(opts.mu))
      throw actid::Error(actid::ErrorCode::InvalidArgument, "mu must be > 0");
    if (opts.steps > 0)
      run.steps = opts.steps;
    auto *report = new actid_report{actid::run_identification(problem->spec, run),
                                    {}, {}, {}};
    report->trace = actid::format_trace(report->result.report);
    report->summary = actid::format_summary(report->result.report);
    report->pretty = actid::format_pretty(report->result.report);
    *out = report;
  });
}

void actid_report_free(actid_report *report) { delete report; }

const char *actid_report_trace(const actid_report *report) {
  return report ? report->trace.c_str() : "";
}

const char *actid_report_summary(const actid_report *report) {
  return report ? report->summary.c_str() : "";
}

const char *actid_report_pretty(const actid_report *report) {
  return report ? report->pretty.c_str() : "";
}

size_t actid_report_iterations(const actid_report *report) {
  return report ? report->result.report.iterates.size() : 0;
}

size_t actid_report_revealed_count(const actid_report *report) {
  return report ? report->result.report.summary.size() : 0;
}

const char *actid_report_revealed_id(const actid_report *report, size_t index) {
  if (!report || index >= report->result.report.summary.size())
    return nullptr;
  return report->result.report.summary[index].c_str();
}

double actid_report_distance(const actid_report *report, size_t iteration,
                             size_t piece) {
  if (!report || iteration >= report->result.report.iterates.size() ||
      piece >= report->result.report.piece_ids.size())
    return std::numeric_limits<double>::quiet_NaN();
  return report->result.report.iterates[iteration].distances[piece];
}

int actid_report_degraded(const actid_report *report) {
  return report && report->result.report.degraded ? 1 : 0;
}

actid_status actid_certify_index(const actid_problem *problem,
                                 const size_t *indices, size_t count,
                                 int *sufficient, char **text) {
  if (!problem || (count && !indices))
    return null_argument("problem/indices");
  if (text)
    *text = nullptr;
  return guarded([&] {
    actid::IndexSet J;
    for (size_t k = 0; k < count; ++k) {
      if (indices[k] == 0)
        throw actid::Error(actid::ErrorCode::InvalidArgument,
                           "index sets are 1-based");
      J.push_back(indices[k] - 1);
    }
    const auto &xbar = reference_of(problem);
    const auto verdict =
        actid::certify_sufficient_index(problem->spec.problem, xbar, J);
    if (sufficient)
      *sufficient = verdict.sufficient ? 1 : 0;
    if (text) {
      std::ostringstream os;
      os << "J\t" << actid::format_index_set(verdict.J) << "\n";
      os << "active\t" << actid::format_index_set(verdict.active) << "\n";
      os << "contained_in_active\t" << yes_no(verdict.contained_in_active) << "\n";
      os << "multiplier_value\t" << number(verdict.multiplier_value) << "\n";
      os << "sufficient\t" << yes_no(verdict.sufficient) << "\n";
      if (verdict.sufficient) {
        os << "lambda\t" << actid::format_vector(verdict.lambda) << "\n";
        os << "mu\t" << actid::format_vector(verdict.mu) << "\n";
      } else {
        os << "margin\t" << number(verdict.multiplier_value) << "\n";
      }
      *text = duplicate(os.str());
    }
  });
}

actid_status actid_certify_piece(const actid_problem *problem,
                                 const char *piece_id, int *sufficient,
                                 char **text) {
  if (!problem || !piece_id)
    return null_argument("problem/piece_id");
  if (text)
    *text = nullptr;
  return guarded([&] {
    const auto &xbar = reference_of(problem);
    const auto &dec = problem->spec.problem.outer->decomposition();
    const actid::GraphPiece *piece = dec.find(piece_id);
    if (!piece)
      throw actid::Error(actid::ErrorCode::InvalidArgument,
                         std::string("unknown piece '") + piece_id + "'");
    const auto cert = actid::certify_piece(problem->spec.problem, *piece, xbar);
    if (sufficient)
      *sufficient = cert.actively_sufficient ? 1 : 0;
    if (text) {
      std::ostringstream os;
      os << "piece\t" << cert.piece_id << "\n";
      os << "description\t" << piece->description() << "\n";
      os << "sufficient\t" << yes_no(cert.actively_sufficient) << "\n";
      if (cert.witness)
        os << "witness\t" << actid::format_vector(*cert.witness) << "\n";
      os << "min_norm\t" << number(cert.min_norm_value) << "\n";
      os << "margin\t" << number(cert.margin) << "\n";
      if (cert.best_effort)
        os << "best_effort\tyes\n";
      os << "note\t" << cert.note << "\n";
      *text = duplicate(os.str());
    }
  });
}

actid_status actid_multiplier_vertices(const actid_problem *problem,
                                       char **text) {
  if (!problem || !text)
    return null_argument("problem/text");
  *text = nullptr;
  return guarded([&] {
    const auto vertices =
        actid::multiplier_set_vertices(problem->spec.problem, reference_of(problem));
    std::ostringstream os;
    for (const auto &v : vertices)
      os << "vertex\t" << actid::format_vector(v) << "\n";
    *text = duplicate(os.str());
  });
}

actid_status actid_transversality(const actid_problem *problem, int *holds) {
  if (!problem || !holds)
    return null_argument("problem/holds");
  return guarded([&] {
    *holds = actid::check_transversality(problem->spec.problem,
                                         reference_of(problem))
                 ? 1
                 : 0;
  });
}

actid_status actid_spectral_demo(size_t k, char **text) {
  if (!text)
    return null_argument("text");
  *text = nullptr;
  return guarded([&] { *text = duplicate(actid::spectral_demo(k)); });
}

} // extern "C"
