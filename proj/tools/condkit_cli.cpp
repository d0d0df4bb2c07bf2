// Command-line front end. One binary, subcommand per capability.
//
// Output protocol: effective configuration as "# key = value" comment rows,
// then data as "key = value" rows, all on stdout with 17 significant digits.
// Prose and error messages go to stderr only.
//
// Exit codes: 0 success/accepted, 2 usage or input error, 3 numerically
// singular, 4 verification rejected.

#include <CLI11.hpp>

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "condkit/bench.hpp"
#include "condkit/condest.hpp"
#include "condkit/error_bounds.hpp"
#include "condkit/format.hpp"
#include "condkit/lu.hpp"
#include "condkit/matrix_market.hpp"
#include "condkit/solvers.hpp"
#include "condkit/sparse.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitSingular = 3;
constexpr int kExitRejected = 4;

condkit::SparseMatrix load_matrix(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open matrix file: " + path);
  return condkit::read_matrix_market(in);
}

condkit::DenseVector load_vector(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open vector file: " + path);
  return condkit::read_vector(in);
}

void save_matrix(const condkit::SparseMatrix& a, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open output file: " + path);
  condkit::write_matrix_market(a, out);
}

void save_vector(const condkit::DenseVector& v, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open output file: " + path);
  condkit::write_vector(v, out);
}

void kv(const std::string& key, const std::string& value) {
  std::cout << key << " = " << value << "\n";
}

void kv(const std::string& key, double value) { kv(key, condkit::format_significant17(value)); }

void kv(const std::string& key, std::size_t value) { kv(key, std::to_string(value)); }

void kv(const std::string& key, bool value) { kv(key, value ? std::string("true") : std::string("false")); }

void header(const std::string& key, const std::string& value) {
  std::cout << "# " << key << " = " << value << "\n";
}

void header(const std::string& key, double value) {
  header(key, condkit::format_significant17(value));
}

void header(const std::string& key, std::size_t value) { header(key, std::to_string(value)); }

// Shared estimator flags.
struct AdamFlags {
  double alpha = 0.05;
  std::size_t max_iter = 2000;
  double rel_tol = 1e-12;
  std::size_t patience = 100;
  std::uint64_t seed = 1;
  std::size_t restarts = 3;
  double pivot_tol = 1e-14;

  condkit::AdamConfig config() const {
    condkit::AdamConfig cfg;
    cfg.alpha = alpha;
    cfg.max_iter = max_iter;
    cfg.rel_tol = rel_tol;
    cfg.patience = patience;
    cfg.seed = seed;
    return cfg;
  }

  void attach(CLI::App* cmd) {
    cmd->add_option("--alpha", alpha, "optimizer step size");
    cmd->add_option("--max-iter", max_iter, "optimizer iteration budget");
    cmd->add_option("--rel-tol", rel_tol, "relative improvement that resets patience");
    cmd->add_option("--patience", patience, "iterations without improvement before stopping");
    cmd->add_option("--seed", seed, "random seed");
    cmd->add_option("--restarts", restarts, "independent estimator restarts (best kept)");
    cmd->add_option("--pivot-tol", pivot_tol, "relative pivot tolerance for the factorization");
  }

  void echo() const {
    header("alpha", alpha);
    header("max_iter", max_iter);
    header("rel_tol", rel_tol);
    header("patience", patience);
    header("seed", std::to_string(seed));
    header("restarts", restarts);
    header("pivot_tol", pivot_tol);
  }
};

// "kind[+preconditioner][+scaling]", e.g. "gmres+jacobi+column".
condkit::SolverSpec parse_solver_label(const std::string& label) {
  condkit::SolverSpec spec;
  std::vector<std::string> parts;
  std::string cur;
  for (char ch : label) {
    if (ch == '+') {
      parts.push_back(cur);
      cur.clear();
    } else {
      cur += ch;
    }
  }
  parts.push_back(cur);
  if (parts.empty() || parts.size() > 3)
    throw std::invalid_argument("bad solver label: " + label);
  spec.kind = condkit::parse_solver_kind(parts[0]);
  if (parts.size() > 1) spec.precond = condkit::parse_preconditioner(parts[1]);
  if (parts.size() > 2) spec.scaling = condkit::parse_scaling(parts[2]);
  return spec;
}

// ---------------------------------------------------------------------------
// cond

struct CondOpts {
  std::string matrix;
  std::string scale = "none";
  AdamFlags adam;
};

int run_cond(const CondOpts& opt) {
  header("subcommand", "cond");
  header("matrix", opt.matrix);
  header("scale", opt.scale);
  opt.adam.echo();

  condkit::SparseMatrix a = load_matrix(opt.matrix);
  if (opt.scale == "column") {
    a = condkit::column_scale(a).first;
  } else if (opt.scale == "row") {
    condkit::DenseVector dummy(a.nrows(), 0.0);
    a = condkit::row_scale(a, dummy).first;
  }

  condkit::Cond2Result r =
      condkit::cond2(a, opt.adam.config(), opt.adam.restarts, opt.adam.pivot_tol);

  kv("n", a.nrows());
  kv("nnz", a.nnz());
  kv("kappa2", r.kappa);
  kv("operator_norm", r.operator_norm.value);
  kv("operator_norm_iterations", r.operator_norm.iterations);
  kv("operator_norm_converged", r.operator_norm.converged);
  // Witness check: the reported norm is re-derivable from the stored unit
  // direction, so the estimate is a genuine attained lower bound.
  double op_check = std::numeric_limits<double>::quiet_NaN();
  if (!r.operator_norm.witness.empty())
    op_check = condkit::two_norm(condkit::matvec(a, r.operator_norm.witness));
  kv("operator_norm_recomputed", op_check);
  kv("inverse_norm", r.inverse_norm.value);
  kv("inverse_norm_iterations", r.inverse_norm.iterations);
  kv("inverse_norm_converged", r.inverse_norm.converged);
  double inv_check = std::numeric_limits<double>::quiet_NaN();
  if (r.factors && !r.inverse_norm.witness.empty())
    inv_check = condkit::two_norm(condkit::lu_solve(*r.factors, r.inverse_norm.witness));
  kv("inverse_norm_recomputed", inv_check);
  kv("singularity_cap", condkit::singularity_bound(std::max(1.0, r.kappa)));

  bool singular = r.kappa >= 1.0 / condkit::kEpsMach;
  kv("verdict", singular ? std::string("numerically_singular") : std::string("regular"));
  return singular ? kExitSingular : kExitOk;
}

// ---------------------------------------------------------------------------
// norm

struct NormOpts {
  std::string matrix;
  AdamFlags adam;
};

int run_norm(const NormOpts& opt) {
  header("subcommand", "norm");
  header("matrix", opt.matrix);
  opt.adam.echo();

  condkit::SparseMatrix a = load_matrix(opt.matrix);
  condkit::ExplicitOracle oracle(a);
  condkit::NormEstimate est =
      condkit::estimate_norm(oracle, opt.adam.config(), opt.adam.restarts);

  kv("n", a.nrows());
  kv("nnz", a.nnz());
  kv("operator_norm", est.value);
  kv("iterations", est.iterations);
  kv("converged", est.converged);
  double check = std::numeric_limits<double>::quiet_NaN();
  if (!est.witness.empty()) check = condkit::two_norm(condkit::matvec(a, est.witness));
  kv("operator_norm_recomputed", check);
  return kExitOk;
}

// ---------------------------------------------------------------------------
// solve

struct SolveOpts {
  std::string matrix;
  std::string rhs;
  std::string out;
  std::string solver = "direct_lu";
  std::string precond = "none";
  std::string scale = "none";
  double tol = 1e-7;
  std::size_t max_iter = 1000;
  std::size_t restart = 50;
  double pivot_tol = 1e-12;
  std::uint64_t seed = 1;
};

int run_solve(const SolveOpts& opt) {
  header("subcommand", "solve");
  header("matrix", opt.matrix);
  header("rhs", opt.rhs);
  header("solver", opt.solver);
  header("precond", opt.precond);
  header("scale", opt.scale);
  header("tol", opt.tol);
  header("max_iter", opt.max_iter);
  header("restart", opt.restart);
  header("pivot_tol", opt.pivot_tol);
  header("seed", std::to_string(opt.seed));

  condkit::SparseMatrix a = load_matrix(opt.matrix);
  condkit::DenseVector b = load_vector(opt.rhs);

  condkit::SolverSpec spec;
  spec.kind = condkit::parse_solver_kind(opt.solver);
  spec.precond = condkit::parse_preconditioner(opt.precond);
  spec.scaling = condkit::parse_scaling(opt.scale);
  spec.tol = opt.tol;
  spec.max_iter = opt.max_iter;
  spec.restart = opt.restart;
  spec.pivot_tol = opt.pivot_tol;

  condkit::SolveOutcome outcome = condkit::solve(a, b, spec);

  kv("n", a.nrows());
  kv("nnz", a.nnz());
  kv("solver", condkit::solver_label(spec));
  kv("converged", outcome.converged);
  kv("iterations", outcome.iterations);
  kv("relative_residual", outcome.relative_residual);
  kv("wall_time", outcome.wall_time);
  kv("diagnostic", outcome.diagnostic.empty() ? std::string("none") : outcome.diagnostic);
  if (!opt.out.empty()) {
    save_vector(outcome.x, opt.out);
    kv("solution_file", opt.out);
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------
// verify

struct VerifyOpts {
  std::string matrix;
  std::string rhs;
  std::string solution;
  double threshold = 1e-7;
  std::optional<double> kappa;
  std::optional<double> a_norm;
  AdamFlags adam;
};

int run_verify(const VerifyOpts& opt) {
  header("subcommand", "verify");
  header("matrix", opt.matrix);
  header("rhs", opt.rhs);
  header("solution", opt.solution);
  header("threshold", opt.threshold);
  if (opt.kappa) header("kappa", *opt.kappa);
  if (opt.a_norm) header("a_norm", *opt.a_norm);
  opt.adam.echo();

  condkit::SparseMatrix a = load_matrix(opt.matrix);
  condkit::DenseVector b = load_vector(opt.rhs);
  condkit::DenseVector x = load_vector(opt.solution);

  condkit::VerifyOptions vopt;
  vopt.threshold = opt.threshold;
  vopt.kappa = opt.kappa;
  vopt.a_norm = opt.a_norm;
  vopt.adam = opt.adam.config();
  vopt.restarts = opt.adam.restarts;
  vopt.pivot_tol = opt.adam.pivot_tol;

  condkit::BoundsReport report = condkit::verify_solution(a, x, b, vopt);
  for (const auto& [key, value] : report.to_kv()) kv(key, value);

  switch (report.verdict) {
    case condkit::Verdict::accepted: return kExitOk;
    case condkit::Verdict::numerically_singular: return kExitSingular;
    case condkit::Verdict::rejected: return kExitRejected;
  }
  return kExitUsage;
}

// ---------------------------------------------------------------------------
// gen

struct GenOpts {
  std::size_t n = 100;
  double fraction = 0.324;
  double small_scale = 1e-2;
  double large_scale = 1e10;
  double density = 0.05;
  std::uint64_t seed = 1;
  std::string out;
  std::string rhs_out;
  std::string solution_out;
};

int run_gen(const GenOpts& opt) {
  header("subcommand", "gen");
  header("n", opt.n);
  header("small_col_fraction", opt.fraction);
  header("small_scale", opt.small_scale);
  header("large_scale", opt.large_scale);
  header("density", opt.density);
  header("seed", std::to_string(opt.seed));
  header("out", opt.out);

  condkit::GeneratorSpec spec;
  spec.n = opt.n;
  spec.small_col_fraction = opt.fraction;
  spec.small_scale = opt.small_scale;
  spec.large_scale = opt.large_scale;
  spec.density = opt.density;
  spec.seed = opt.seed;

  condkit::SparseMatrix a = condkit::generate_illconditioned(spec);
  save_matrix(a, opt.out);
  kv("n", a.nrows());
  kv("nnz", a.nnz());
  kv("matrix_file", opt.out);

  if (!opt.rhs_out.empty() || !opt.solution_out.empty()) {
    condkit::KnownSystem ks = condkit::make_known_solution(a, condkit::mix_seed(opt.seed, 0x1001));
    if (!opt.rhs_out.empty()) {
      save_vector(ks.b, opt.rhs_out);
      kv("rhs_file", opt.rhs_out);
    }
    if (!opt.solution_out.empty()) {
      save_vector(ks.x_true, opt.solution_out);
      kv("solution_file", opt.solution_out);
    }
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------
// bench

struct BenchOpts {
  std::vector<std::string> matrices;
  std::vector<std::size_t> gen_sizes;
  double fraction = 0.324;
  double small_scale = 1e-2;
  double large_scale = 1e10;
  double density = 0.05;
  std::vector<std::string> solvers = {"direct_lu"};
  double tol = 1e-7;
  std::size_t max_iter = 1000;
  std::size_t restart = 50;
  std::size_t repetitions = 5;
  std::size_t bootstrap_samples = 1000;
  double threshold = 1e-7;
  std::size_t jobs = 1;
  std::uint64_t seed = 1;
  std::string csv = "-";
  std::string jsonl;
};

int run_bench_cmd(const BenchOpts& opt) {
  header("subcommand", "bench");
  header("repetitions", opt.repetitions);
  header("bootstrap_samples", opt.bootstrap_samples);
  header("threshold", opt.threshold);
  header("tol", opt.tol);
  header("max_iter", opt.max_iter);
  header("restart", opt.restart);
  header("jobs", opt.jobs);
  header("seed", std::to_string(opt.seed));

  condkit::BenchConfig cfg;
  cfg.repetitions = opt.repetitions;
  cfg.bootstrap_samples = opt.bootstrap_samples;
  cfg.threshold = opt.threshold;
  cfg.jobs = opt.jobs;
  cfg.seed = opt.seed;

  for (std::size_t i = 0; i < opt.gen_sizes.size(); ++i) {
    condkit::GeneratorSpec g;
    g.n = opt.gen_sizes[i];
    g.small_col_fraction = opt.fraction;
    g.small_scale = opt.small_scale;
    g.large_scale = opt.large_scale;
    g.density = opt.density;
    g.seed = condkit::mix_seed(opt.seed, 0x4000 + i);
    cfg.generators.push_back(g);
    header("generator_" + std::to_string(i),
           "n=" + std::to_string(g.n) + " seed=" + std::to_string(g.seed));
  }
  for (std::size_t i = 0; i < opt.matrices.size(); ++i) {
    condkit::BenchInput input;
    input.name = opt.matrices[i];
    input.a = load_matrix(opt.matrices[i]);
    // File inputs get a manufactured solution too, so their rows carry
    // measured-error columns alongside the bounds.
    condkit::KnownSystem ks =
        condkit::make_known_solution(input.a, condkit::mix_seed(opt.seed, 0x5000 + i));
    input.b = std::move(ks.b);
    input.x_true = std::move(ks.x_true);
    cfg.inputs.push_back(std::move(input));
    header("matrix_" + std::to_string(i), opt.matrices[i]);
  }
  for (const std::string& label : opt.solvers) {
    condkit::SolverSpec spec = parse_solver_label(label);
    spec.tol = opt.tol;
    spec.max_iter = opt.max_iter;
    spec.restart = opt.restart;
    cfg.solvers.push_back(spec);
    header("solver", condkit::solver_label(spec));
  }

  condkit::BenchReport report = condkit::run_bench(cfg);

  if (opt.csv == "-") {
    condkit::write_csv(report, std::cout);
  } else {
    std::ofstream out(opt.csv);
    if (!out) throw std::runtime_error("cannot open output file: " + opt.csv);
    condkit::write_csv(report, out);
    kv("csv_file", opt.csv);
  }
  if (!opt.jsonl.empty()) {
    std::ofstream out(opt.jsonl);
    if (!out) throw std::runtime_error("cannot open output file: " + opt.jsonl);
    condkit::write_jsonl(report, out);
    kv("jsonl_file", opt.jsonl);
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"sparse direct and iterative solves with verified error bounds"};
  app.require_subcommand(1);

  CondOpts cond_opts;
  CLI::App* cond_cmd = app.add_subcommand("cond", "estimate the spectral condition number");
  cond_cmd->add_option("--matrix", cond_opts.matrix, "Matrix Market file")->required();
  cond_cmd->add_option("--scale", cond_opts.scale, "apply scaling before estimating")
      ->check(CLI::IsMember({"none", "column", "row"}));
  cond_opts.adam.attach(cond_cmd);

  NormOpts norm_opts;
  CLI::App* norm_cmd = app.add_subcommand("norm", "estimate the operator 2-norm");
  norm_cmd->add_option("--matrix", norm_opts.matrix, "Matrix Market file")->required();
  norm_opts.adam.attach(norm_cmd);

  SolveOpts solve_opts;
  CLI::App* solve_cmd = app.add_subcommand("solve", "solve a linear system");
  solve_cmd->add_option("--matrix", solve_opts.matrix, "Matrix Market file")->required();
  solve_cmd->add_option("--rhs", solve_opts.rhs, "right-hand side vector file")->required();
  solve_cmd->add_option("--out", solve_opts.out, "write the solution vector here");
  solve_cmd->add_option("--solver", solve_opts.solver, "direct_lu | gmres | bicgstab")
      ->check(CLI::IsMember({"direct_lu", "gmres", "bicgstab"}));
  solve_cmd->add_option("--precond", solve_opts.precond, "none | jacobi | ilu0")
      ->check(CLI::IsMember({"none", "jacobi", "ilu0"}));
  solve_cmd->add_option("--scale", solve_opts.scale, "none | column | row")
      ->check(CLI::IsMember({"none", "column", "row"}));
  solve_cmd->add_option("--tol", solve_opts.tol, "relative residual tolerance");
  solve_cmd->add_option("--max-iter", solve_opts.max_iter, "iteration budget");
  solve_cmd->add_option("--restart", solve_opts.restart, "GMRES restart length");
  solve_cmd->add_option("--pivot-tol", solve_opts.pivot_tol, "LU relative pivot tolerance");
  solve_cmd->add_option("--seed", solve_opts.seed, "random seed");

  VerifyOpts verify_opts;
  double verify_kappa = 0.0;
  double verify_a_norm = 0.0;
  CLI::App* verify_cmd = app.add_subcommand("verify", "bound the error of a candidate solution");
  verify_cmd->add_option("--matrix", verify_opts.matrix, "Matrix Market file")->required();
  verify_cmd->add_option("--rhs", verify_opts.rhs, "right-hand side vector file")->required();
  verify_cmd->add_option("--solution", verify_opts.solution, "candidate solution vector file")
      ->required();
  verify_cmd->add_option("--threshold", verify_opts.threshold, "acceptance threshold");
  CLI::Option* kappa_opt =
      verify_cmd->add_option("--kappa", verify_kappa, "known condition number (skips estimation)");
  CLI::Option* a_norm_opt =
      verify_cmd->add_option("--a-norm", verify_a_norm, "known operator norm (skips estimation)");
  verify_opts.adam.attach(verify_cmd);

  GenOpts gen_opts;
  CLI::App* gen_cmd = app.add_subcommand("gen", "generate an ill-conditioned test matrix");
  gen_cmd->add_option("--n", gen_opts.n, "dimension");
  gen_cmd->add_option("--fraction", gen_opts.fraction, "fraction of small-norm columns");
  gen_cmd->add_option("--small-scale", gen_opts.small_scale, "small column-norm plateau");
  gen_cmd->add_option("--large-scale", gen_opts.large_scale, "large column-norm plateau");
  gen_cmd->add_option("--density", gen_opts.density, "off-diagonal fill probability");
  gen_cmd->add_option("--seed", gen_opts.seed, "random seed");
  gen_cmd->add_option("--out", gen_opts.out, "output Matrix Market file")->required();
  gen_cmd->add_option("--rhs-out", gen_opts.rhs_out, "write a manufactured right-hand side");
  gen_cmd->add_option("--solution-out", gen_opts.solution_out, "write the manufactured solution");

  BenchOpts bench_opts;
  CLI::App* bench_cmd = app.add_subcommand("bench", "benchmark solvers with verified bounds");
  bench_cmd->add_option("--matrix", bench_opts.matrices, "Matrix Market files")->delimiter(',');
  bench_cmd->add_option("--gen-n", bench_opts.gen_sizes, "generator dimensions")->delimiter(',');
  bench_cmd->add_option("--fraction", bench_opts.fraction, "generator small-column fraction");
  bench_cmd->add_option("--small-scale", bench_opts.small_scale, "generator small plateau");
  bench_cmd->add_option("--large-scale", bench_opts.large_scale, "generator large plateau");
  bench_cmd->add_option("--density", bench_opts.density, "generator density");
  bench_cmd
      ->add_option("--solver", bench_opts.solvers,
                   "solver labels: kind[+precond][+scaling], e.g. gmres+jacobi+column")
      ->delimiter(',');
  bench_cmd->add_option("--tol", bench_opts.tol, "iterative relative residual tolerance");
  bench_cmd->add_option("--max-iter", bench_opts.max_iter, "iterative iteration budget");
  bench_cmd->add_option("--restart", bench_opts.restart, "GMRES restart length");
  bench_cmd->add_option("--repetitions", bench_opts.repetitions, "timed solves per row");
  bench_cmd->add_option("--bootstrap-samples", bench_opts.bootstrap_samples,
                        "bootstrap resamples for the timing CI");
  bench_cmd->add_option("--threshold", bench_opts.threshold, "verification threshold");
  bench_cmd->add_option("--jobs", bench_opts.jobs, "worker threads over rows");
  bench_cmd->add_option("--seed", bench_opts.seed, "random seed");
  bench_cmd->add_option("--csv", bench_opts.csv, "CSV output path, or - for stdout");
  bench_cmd->add_option("--jsonl", bench_opts.jsonl, "line-delimited JSON output path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);  // prints help or the error message
    return code == 0 ? kExitOk : kExitUsage;
  }

  if (*kappa_opt) verify_opts.kappa = verify_kappa;
  if (*a_norm_opt) verify_opts.a_norm = verify_a_norm;

  try {
    if (cond_cmd->parsed()) return run_cond(cond_opts);
    if (norm_cmd->parsed()) return run_norm(norm_opts);
    if (solve_cmd->parsed()) return run_solve(solve_opts);
    if (verify_cmd->parsed()) return run_verify(verify_opts);
    if (gen_cmd->parsed()) return run_gen(gen_opts);
    if (bench_cmd->parsed()) return run_bench_cmd(bench_opts);
  } catch (const condkit::StructurallySingular& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitSingular;
  } catch (const condkit::NumericallySingular& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitSingular;
  } catch (const std::exception& e) {
    // Everything else reachable here is an input or usage problem: file
    // parse errors, dimension mismatches, zero columns/diagonals, bad flags.
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}
