// Command-line front end over the C interface.
#include "actid/actid.h"

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitNumerical = 3;

int exit_code(actid_status status) {
  switch (status) {
  case ACTID_OK:
    return 0;
  case ACTID_ERR_PARSE:
  case ACTID_ERR_INVALID_ARGUMENT:
  case ACTID_ERR_IO:
  case ACTID_ERR_UNSUPPORTED:
    return kExitUsage;
  default:
    return kExitNumerical;
  }
}

int fail(actid_status status) {
  std::cerr << "error (" << actid_status_name(status)
            << "): " << actid_last_error() << "\n";
  return exit_code(status);
}

struct Problem {
  actid_problem *handle = nullptr;
  ~Problem() { actid_problem_free(handle); }
};

struct Report {
  actid_report *handle = nullptr;
  ~Report() { actid_report_free(handle); }
};

struct OwnedText {
  char *text = nullptr;
  ~OwnedText() { actid_string_free(text); }
};

struct RunFlags {
  double eps_reveal = 0.05;
  double delta = 0.01;
  double mu = 0.0;
  std::size_t steps = 0;
  std::size_t tail = 5;
  std::string out;
  bool pretty = false;
};

void add_run_flags(CLI::App *cmd, RunFlags &flags) {
  cmd->add_option("--eps-reveal", flags.eps_reveal,
                  "distance threshold for revealing a piece")
      ->capture_default_str();
  cmd->add_option("--delta", flags.delta, "residual gate")->capture_default_str();
  cmd->add_option("--mu", flags.mu, "prox parameter (overrides the schedule)");
  cmd->add_option("--steps", flags.steps,
                  "number of iterates (overrides the schedule)");
  cmd->add_option("--tail", flags.tail, "trailing iterates that must agree")
      ->capture_default_str();
  cmd->add_option("--out", flags.out, "write the TSV trace to this file");
  cmd->add_flag("--pretty", flags.pretty, "aligned table instead of TSV");
}

std::string piece_listing(const actid_problem *problem) {
  std::ostringstream os;
  for (std::size_t i = 0; i < actid_problem_piece_count(problem); ++i)
    os << "# piece\t" << actid_problem_piece_id(problem, i) << "\t"
       << actid_problem_piece_description(problem, i) << "\n";
  return os.str();
}

int run_problem(const actid_problem *problem, const RunFlags &flags,
                const std::string &extra) {
  actid_run_options options;
  actid_run_options_init(&options);
  options.eps_reveal = flags.eps_reveal;
  options.delta = flags.delta;
  options.tail = flags.tail;
  options.mu = flags.mu;
  options.steps = flags.steps;
  if (flags.mu < 0.0) {
    std::cerr << "error: --mu must be > 0\n";
    return kExitUsage;
  }

  Report report;
  if (const auto st = actid_run(problem, &options, &report.handle); st != ACTID_OK)
    return fail(st);
  if (actid_report_degraded(report.handle))
    std::cerr << "note: no reference point; value-gap gate skipped and no "
                 "certification\n";

  const std::string body = std::string(flags.pretty
                                           ? actid_report_pretty(report.handle)
                                           : actid_report_trace(report.handle)) +
                           piece_listing(problem) + extra;
  if (flags.out.empty()) {
    std::cout << body;
  } else {
    std::ofstream file(flags.out, std::ios::binary);
    if (!file) {
      std::cerr << "error: cannot write " << flags.out << "\n";
      return kExitUsage;
    }
    file << body;
    std::cout << actid_report_summary(report.handle) << extra;
  }
  return 0;
}

std::vector<std::size_t> parse_index_list(const std::string &text) {
  std::vector<std::size_t> out;
  std::string token;
  std::istringstream in(text);
  while (std::getline(in, token, ',')) {
    const auto a = token.find_first_not_of(" \t{}");
    const auto b = token.find_last_not_of(" \t{}");
    if (a == std::string::npos)
      continue;
    token = token.substr(a, b - a + 1);
    std::size_t used = 0;
    unsigned long value = 0;
    try {
      value = std::stoul(token, &used);
    } catch (const std::exception &) {
      used = 0;
    }
    if (used != token.size() || value == 0)
      throw CLI::ValidationError("--J", "expected 1-based indices like \"1,2\"");
    out.push_back(value);
  }
  return out;
}

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"Active-set identification for composite problems h(c(x))"};
  app.require_subcommand(1);

  RunFlags run_flags;
  std::string run_file;
  auto *run = app.add_subcommand("run", "prox-linear run with piece reveal");
  run->add_option("file", run_file, "problem file")->required();
  add_run_flags(run, run_flags);

  RunFlags demo_flags;
  std::string demo_name;
  std::size_t demo_k = 2;
  auto *demo = app.add_subcommand("demo", "built-in examples: two-circle, "
                                          "abs-1d, l1-2d, eig [k]");
  demo->add_option("name", demo_name, "demo name")->required();
  demo->add_option("k", demo_k, "matrix order for the eig demo");
  add_run_flags(demo, demo_flags);

  std::string cert_file, cert_J, cert_piece;
  bool cert_vertices = false;
  auto *certify = app.add_subcommand("certify", "sufficiency at the reference point");
  certify->add_option("file", cert_file, "problem file")->required();
  auto *opt_J = certify->add_option("--J", cert_J, "1-based index set, e.g. \"1,2\"");
  auto *opt_piece = certify->add_option("--piece", cert_piece, "piece id, e.g. G3");
  auto *opt_vertices =
      certify->add_flag("--vertices", cert_vertices, "list multiplier vertices");
  opt_J->excludes(opt_piece)->excludes(opt_vertices);
  opt_piece->excludes(opt_vertices);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp &e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp &e) {
    return app.exit(e);
  } catch (const CLI::ParseError &e) {
    app.exit(e);
    return kExitUsage;
  }

  if (*run) {
    Problem problem;
    if (const auto st = actid_problem_load_file(run_file.c_str(), &problem.handle);
        st != ACTID_OK)
      return fail(st);
    return run_problem(problem.handle, run_flags, "");
  }

  if (*demo) {
    if (demo_name == "eig") {
      OwnedText text;
      if (const auto st = actid_spectral_demo(demo_k, &text.text); st != ACTID_OK)
        return fail(st);
      std::cout << text.text;
      return 0;
    }
    Problem problem;
    if (const auto st = actid_problem_demo(demo_name.c_str(), &problem.handle);
        st != ACTID_OK) {
      std::cerr << "error: unknown demo '" << demo_name
                << "'; available: two-circle, abs-1d, l1-2d, eig [k]\n";
      return kExitUsage;
    }
    std::string extra;
    if (demo_name == "two-circle") {
      OwnedText text;
      if (const auto st = actid_multiplier_vertices(problem.handle, &text.text);
          st != ACTID_OK)
        return fail(st);
      std::istringstream lines(text.text);
      std::string line;
      while (std::getline(lines, line))
        extra += "# " + line + "\n";
    }
    return run_problem(problem.handle, demo_flags, extra);
  }

  // certify
  Problem problem;
  if (const auto st = actid_problem_load_file(cert_file.c_str(), &problem.handle);
      st != ACTID_OK)
    return fail(st);
  if (!actid_problem_has_reference(problem.handle)) {
    std::cerr << "error: certify needs a reference point ([reference] x = ...)\n";
    return kExitUsage;
  }
  OwnedText text;
  actid_status st = ACTID_OK;
  int sufficient = 0;
  if (*opt_piece) {
    st = actid_certify_piece(problem.handle, cert_piece.c_str(), &sufficient,
                             &text.text);
  } else if (cert_vertices) {
    st = actid_multiplier_vertices(problem.handle, &text.text);
  } else if (*opt_J) {
    std::vector<std::size_t> J;
    try {
      J = parse_index_list(cert_J);
    } catch (const CLI::ValidationError &e) {
      std::cerr << "error: " << e.what() << "\n";
      return kExitUsage;
    }
    st = actid_certify_index(problem.handle, J.data(), J.size(), &sufficient,
                             &text.text);
  } else {
    std::cerr << "error: certify needs --J, --piece or --vertices\n";
    return kExitUsage;
  }
  if (st != ACTID_OK)
    return fail(st);
  std::cout << text.text;
  return 0;
}
