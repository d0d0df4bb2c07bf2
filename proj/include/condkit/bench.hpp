#pragma once

// Benchmark harness: ill-conditioned test-matrix generator, timed solver
// runs with bootstrap confidence intervals, and verified error bounds per
// (matrix, solver) row. Reports serialize to CSV and line-delimited JSON.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "condkit/condest.hpp"
#include "condkit/error_bounds.hpp"
#include "condkit/format.hpp"
#include "condkit/rng.hpp"
#include "condkit/solvers.hpp"
#include "condkit/sparse.hpp"

namespace condkit {

// ---------------------------------------------------------------------------
// Test-matrix generator

/// Recipe for a square matrix whose column norms split into two plateaus
/// (small_scale and large_scale), so its condition number is at least
/// large_scale / small_scale while the column-scaled matrix stays tame.
struct GeneratorSpec {
  std::size_t n = 100;
  double small_col_fraction = 0.324;  // fraction of columns on the small plateau
  double small_scale = 1e-2;
  double large_scale = 1e10;
  double density = 0.05;  // expected fraction of off-diagonal entries present
  std::uint64_t seed = 1;
};

namespace detail {

inline void validate_generator(const GeneratorSpec& g) {
  if (g.n == 0) throw std::invalid_argument("generator: n must be positive");
  if (!(g.small_col_fraction > 0.0) || !(g.small_col_fraction < 1.0))
    throw std::invalid_argument("generator: small_col_fraction must lie in (0, 1)");
  if (!(g.small_scale > 0.0) || !(g.small_scale < g.large_scale))
    throw std::invalid_argument("generator: need 0 < small_scale < large_scale");
  if (!(g.density >= 0.0) || !(g.density <= 1.0))
    throw std::invalid_argument("generator: density must lie in [0, 1]");
}

}  // namespace detail

/// Builds the two-plateau matrix A = B̂ · D.
///
/// B = I + R where R's row and column absolute sums are capped at 0.45, so
/// ‖R‖₂ ≤ √(‖R‖₁‖R‖∞) ≤ 0.45 and every singular value of B lies in
/// [0.55, 1.45]. B̂ is B with its columns normalized to unit norm (which at
/// most squares the condition bound), and D assigns small_scale to a seeded
/// random choice of round(fraction·n) columns and large_scale to the rest.
///
/// Consequences: A is nonsingular with a nonzero diagonal, its column-norm
/// CDF has exactly two plateaus, κ₂(A) ≥ large_scale/small_scale, and the
/// column-scaled A recovers B̂'s small condition number, so scaling drops κ
/// by at least (large_scale/small_scale)/10.
inline SparseMatrix generate_illconditioned(const GeneratorSpec& spec) {
  detail::validate_generator(spec);
  const std::size_t n = spec.n;
  constexpr double kCap = 0.45;
  std::mt19937_64 gen(spec.seed);

  // Off-diagonal entries of R, row by row.
  std::vector<std::vector<std::pair<std::size_t, double>>> rows(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      if (uniform01(gen) < spec.density) rows[i].emplace_back(j, uniform_in(gen, -1.0, 1.0));
    }
  }

  // Cap each row's absolute sum, then each column's. The column pass only
  // shrinks entries, so the row cap survives it.
  for (auto& row : rows) {
    double s = 0.0;
    for (const auto& e : row) s += std::abs(e.second);
    if (s > kCap) {
      double f = kCap / s;
      for (auto& e : row) e.second *= f;
    }
  }
  std::vector<double> colsum(n, 0.0);
  for (const auto& row : rows)
    for (const auto& e : row) colsum[e.first] += std::abs(e.second);
  std::vector<double> colfactor(n, 1.0);
  for (std::size_t j = 0; j < n; ++j)
    if (colsum[j] > kCap) colfactor[j] = kCap / colsum[j];
  for (auto& row : rows)
    for (auto& e : row) e.second *= colfactor[e.first];

  std::vector<Triplet> triplets;
  triplets.reserve(n * 2);
  for (std::size_t i = 0; i < n; ++i) {
    triplets.push_back({i, i, 1.0});
    for (const auto& e : rows[i]) triplets.push_back({i, e.first, e.second});
  }
  SparseMatrix b = SparseMatrix::from_triplets(n, n, triplets);
  SparseMatrix bhat = column_scale(b).first;

  // Assign the plateau scales to a seeded random subset of columns.
  auto k_signed = std::llround(spec.small_col_fraction * static_cast<double>(n));
  std::size_t k = static_cast<std::size_t>(std::clamp<long long>(k_signed, 0, static_cast<long long>(n)));
  std::vector<std::size_t> order(n);
  for (std::size_t j = 0; j < n; ++j) order[j] = j;
  shuffle_portable(order, gen);
  std::vector<double> scale(n, spec.large_scale);
  for (std::size_t t = 0; t < k; ++t) scale[order[t]] = spec.small_scale;

  std::vector<Triplet> scaled;
  scaled.reserve(bhat.nnz());
  const auto& offs = bhat.row_offsets();
  const auto& cols = bhat.col_indices();
  const auto& vals = bhat.values();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t p = offs[i]; p < offs[i + 1]; ++p)
      scaled.push_back({i, cols[p], vals[p] * scale[cols[p]]});
  return SparseMatrix::from_triplets(n, n, scaled);
}

/// A right-hand side manufactured from a known solution, so measured errors
/// can be compared against computed bounds.
struct KnownSystem {
  DenseVector x_true;
  DenseVector b;  // A · x_true
};

/// x_true has entries uniform in [-1, 1); b = A·x_true.
inline KnownSystem make_known_solution(const SparseMatrix& a, std::uint64_t seed) {
  if (a.nrows() != a.ncols())
    throw DimensionMismatch("make_known_solution: matrix must be square");
  std::mt19937_64 gen(seed);
  KnownSystem ks;
  ks.x_true.resize(a.ncols());
  for (auto& v : ks.x_true) v = uniform_in(gen, -1.0, 1.0);
  ks.b = matvec(a, ks.x_true);
  return ks;
}

// ---------------------------------------------------------------------------
// Bootstrap confidence interval for the median

struct Interval {
  double low = 0.0;
  double high = 0.0;
};

namespace detail {

/// Linearly interpolated quantile (type 7) of an already sorted sample.
inline double quantile_sorted(const std::vector<double>& sorted, double p) {
  const std::size_t m = sorted.size();
  if (m == 1) return sorted[0];
  double h = p * static_cast<double>(m - 1);
  auto lo = static_cast<std::size_t>(h);
  if (lo >= m - 1) return sorted[m - 1];
  double frac = h - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

inline double median_sorted(const std::vector<double>& sorted) {
  return quantile_sorted(sorted, 0.5);
}

}  // namespace detail

/// Interpolated median of an unsorted sample.
inline double median(std::vector<double> samples) {
  if (samples.empty()) throw std::invalid_argument("median: empty sample");
  std::sort(samples.begin(), samples.end());
  return detail::median_sorted(samples);
}

/// Seeded percentile-bootstrap confidence interval for the median.
///
/// Draws `resamples` with-replacement resamples, takes each median, and
/// returns the (1-confidence)/2 and 1-(1-confidence)/2 quantiles of those
/// medians. A single-element sample yields the degenerate interval (v, v).
inline Interval bootstrap_ci(const std::vector<double>& samples, double confidence = 0.95,
                             std::size_t resamples = 1000, std::uint64_t seed = 1) {
  if (samples.empty()) throw std::invalid_argument("bootstrap_ci: empty sample");
  if (!(confidence > 0.0) || !(confidence < 1.0))
    throw std::invalid_argument("bootstrap_ci: confidence must lie in (0, 1)");
  if (resamples == 0) throw std::invalid_argument("bootstrap_ci: resamples must be positive");
  const std::size_t m = samples.size();
  std::mt19937_64 gen(seed);
  std::vector<double> medians(resamples);
  std::vector<double> draw(m);
  for (std::size_t r = 0; r < resamples; ++r) {
    for (std::size_t i = 0; i < m; ++i) draw[i] = samples[uniform_below(gen, m)];
    std::sort(draw.begin(), draw.end());
    medians[r] = detail::median_sorted(draw);
  }
  std::sort(medians.begin(), medians.end());
  double tail = (1.0 - confidence) / 2.0;
  return {detail::quantile_sorted(medians, tail), detail::quantile_sorted(medians, 1.0 - tail)};
}

// ---------------------------------------------------------------------------
// Benchmark harness

/// One system to benchmark. x_true, when present, enables measured-error
/// columns in the report.
struct BenchInput {
  std::string name;
  SparseMatrix a;
  DenseVector b;
  std::optional<DenseVector> x_true;
};

struct BenchConfig {
  std::vector<GeneratorSpec> generators;  // materialized with manufactured solutions
  std::vector<BenchInput> inputs;         // used as given
  std::vector<SolverSpec> solvers;
  std::size_t repetitions = 5;        // timed solves per row; each refactorizes
  std::size_t bootstrap_samples = 1000;
  std::uint64_t seed = 1;
  double threshold = 1e-7;            // verification acceptance threshold
  AdamConfig adam;                    // condition-number estimator settings
  std::size_t restarts = 3;
  double pivot_tol = 1e-14;
  std::size_t jobs = 1;               // worker threads over rows
};

/// One (matrix, solver) result. Quantities that were not computed (because
/// an earlier stage failed or x_true is unknown) stay NaN.
struct BenchRow {
  std::string matrix;
  std::string solver;
  std::size_t n = 0;
  std::size_t nnz = 0;

  bool solver_ok = false;   // every repetition completed without throwing
  std::string error;        // first exception text when something failed
  std::size_t iterations = 0;
  bool converged = false;
  double relative_residual = std::numeric_limits<double>::quiet_NaN();
  std::string diagnostic;   // solver-side breakdown reason, if any

  double time_to_solution = std::numeric_limits<double>::quiet_NaN();  // sum over repetitions
  double median_time = std::numeric_limits<double>::quiet_NaN();
  double ci_low = std::numeric_limits<double>::quiet_NaN();
  double ci_high = std::numeric_limits<double>::quiet_NaN();

  double kappa = std::numeric_limits<double>::quiet_NaN();
  double a_norm = std::numeric_limits<double>::quiet_NaN();
  double loose_lower = std::numeric_limits<double>::quiet_NaN();
  double loose_upper = std::numeric_limits<double>::quiet_NaN();
  double tight_lower = std::numeric_limits<double>::quiet_NaN();
  double tight_upper = std::numeric_limits<double>::quiet_NaN();
  double true_error_cap = std::numeric_limits<double>::quiet_NaN();
  double singularity_cap = std::numeric_limits<double>::quiet_NaN();
  std::string verdict;      // accepted | rejected | numerically_singular | failed

  // Measured only when x_true is known.
  double rel_error_true = std::numeric_limits<double>::quiet_NaN();  // ‖x̂-x‖/‖x‖
  double rel_error_xhat = std::numeric_limits<double>::quiet_NaN();  // ‖x̂-x‖/‖x̂‖
};

struct BenchReport {
  std::vector<BenchRow> rows;
};

/// "kind+preconditioner+scaling", e.g. "gmres+jacobi+column".
inline std::string solver_label(const SolverSpec& spec) {
  std::string label = to_string(spec.kind);
  label += '+';
  label += to_string(spec.precond);
  label += '+';
  label += to_string(spec.scaling);
  return label;
}

namespace detail {

inline bool all_finite(const DenseVector& v) {
  for (double x : v)
    if (!std::isfinite(x)) return false;
  return true;
}

struct BenchMatrixEntry {
  BenchInput input;
  double kappa = std::numeric_limits<double>::quiet_NaN();
  double a_norm = std::numeric_limits<double>::quiet_NaN();
  std::string cond_error;  // nonempty when estimation itself failed
};

inline void run_bench_row(const BenchMatrixEntry& entry, const SolverSpec& spec,
                          const BenchConfig& cfg, std::size_t row_index, BenchRow& row) {
  const BenchInput& input = entry.input;
  row.matrix = input.name;
  row.solver = solver_label(spec);
  row.n = input.a.nrows();
  row.nnz = input.a.nnz();
  row.kappa = entry.kappa;
  row.a_norm = entry.a_norm;

  SolveOutcome outcome;
  std::vector<double> times;
  times.reserve(cfg.repetitions);
  try {
    for (std::size_t rep = 0; rep < cfg.repetitions; ++rep) {
      outcome = solve(input.a, input.b, spec);
      times.push_back(outcome.wall_time);
    }
    row.solver_ok = true;
  } catch (const std::exception& e) {
    row.error = e.what();
    row.verdict = "failed";
    return;
  }

  row.iterations = outcome.iterations;
  row.converged = outcome.converged;
  row.relative_residual = outcome.relative_residual;
  row.diagnostic = outcome.diagnostic;
  double total = 0.0;
  for (double t : times) total += t;
  row.time_to_solution = total;
  row.median_time = median(times);
  Interval ci = bootstrap_ci(times, 0.95, cfg.bootstrap_samples, mix_seed(cfg.seed, 0x2000 + row_index));
  // An interval for the median that excludes the point estimate is useless;
  // widen by at most one endpoint so ci_low <= median <= ci_high always holds.
  row.ci_low = std::min(ci.low, row.median_time);
  row.ci_high = std::max(ci.high, row.median_time);

  if (!entry.cond_error.empty()) {
    row.error = entry.cond_error;
    row.verdict = "failed";
    return;
  }
  if (!all_finite(outcome.x)) {
    // A non-finite iterate can never verify; bounds are undefined for it.
    row.error = "solution contains non-finite entries";
    row.verdict = "rejected";
    return;
  }

  try {
    VerifyOptions opt;
    opt.threshold = cfg.threshold;
    opt.kappa = entry.kappa;
    if (entry.a_norm > 0.0) opt.a_norm = entry.a_norm;
    opt.adam = cfg.adam;
    opt.restarts = cfg.restarts;
    opt.pivot_tol = cfg.pivot_tol;
    BoundsReport rep = verify_solution(input.a, outcome.x, input.b, opt);
    row.loose_lower = rep.loose_lower;
    row.loose_upper = rep.loose_upper;
    row.tight_lower = rep.tight_lower;
    row.tight_upper = rep.tight_upper;
    row.true_error_cap = rep.true_error_cap;
    row.singularity_cap = rep.singularity_cap;
    row.verdict = to_string(rep.verdict);
  } catch (const std::exception& e) {
    row.error = e.what();
    row.verdict = "failed";
    return;
  }

  if (input.x_true) {
    const DenseVector& xt = *input.x_true;
    DenseVector diff(xt.size());
    for (std::size_t i = 0; i < xt.size(); ++i) diff[i] = outcome.x[i] - xt[i];
    double dn = two_norm(diff);
    double tn = two_norm(xt);
    double hn = two_norm(outcome.x);
    if (tn > 0.0) row.rel_error_true = dn / tn;
    if (hn > 0.0) row.rel_error_xhat = dn / hn;
  }
}

}  // namespace detail

/// Runs the full (matrix × solver) grid.
///
/// Matrices come from the generators (with manufactured known solutions)
/// followed by the explicit inputs. κ₂ and ‖A‖₂ are estimated once per
/// matrix and shared by its rows. Each row times `repetitions` independent
/// solves (factorizations are not reused across repetitions), then verifies
/// the last solution against the computed bounds. A failure inside one row
/// is recorded in that row and never aborts the run.
///
/// With a fixed config the report is reproducible field for field, except
/// for the wall-time-derived columns (time_to_solution, median_time,
/// ci_low, ci_high).
inline BenchReport run_bench(const BenchConfig& cfg) {
  if (cfg.repetitions == 0) throw std::invalid_argument("run_bench: repetitions must be positive");
  if (cfg.bootstrap_samples < 100)
    throw std::invalid_argument("run_bench: bootstrap_samples must be at least 100");
  if (cfg.solvers.empty()) throw std::invalid_argument("run_bench: no solvers given");
  if (!(cfg.threshold > 0.0)) throw std::invalid_argument("run_bench: threshold must be positive");
  if (cfg.jobs == 0) throw std::invalid_argument("run_bench: jobs must be positive");

  std::vector<detail::BenchMatrixEntry> entries;
  entries.reserve(cfg.generators.size() + cfg.inputs.size());
  for (std::size_t g = 0; g < cfg.generators.size(); ++g) {
    const GeneratorSpec& spec = cfg.generators[g];
    detail::BenchMatrixEntry entry;
    entry.input.name = "gen" + std::to_string(g) + "_n" + std::to_string(spec.n);
    entry.input.a = generate_illconditioned(spec);
    KnownSystem ks = make_known_solution(entry.input.a, mix_seed(spec.seed, 0x1001 + g));
    entry.input.b = std::move(ks.b);
    entry.input.x_true = std::move(ks.x_true);
    entries.push_back(std::move(entry));
  }
  for (const BenchInput& input : cfg.inputs) {
    if (input.a.nrows() != input.a.ncols())
      throw DimensionMismatch("run_bench: input '" + input.name + "' is not square");
    if (input.b.size() != input.a.nrows())
      throw DimensionMismatch("run_bench: rhs length mismatch for input '" + input.name + "'");
    detail::BenchMatrixEntry entry;
    entry.input = input;
    entries.push_back(std::move(entry));
  }

  // One condition-number estimate per matrix, sequential for determinism.
  for (std::size_t m = 0; m < entries.size(); ++m) {
    auto& entry = entries[m];
    try {
      AdamConfig adam = cfg.adam;
      adam.seed = mix_seed(cfg.seed, 0x1000 + m);
      Cond2Result c = cond2(entry.input.a, adam, cfg.restarts, cfg.pivot_tol);
      entry.kappa = std::max(1.0, c.kappa);
      entry.a_norm = c.operator_norm.value;
    } catch (const std::exception& e) {
      entry.cond_error = std::string("condition estimate failed: ") + e.what();
    }
  }

  const std::size_t n_solvers = cfg.solvers.size();
  BenchReport report;
  report.rows.resize(entries.size() * n_solvers);
  auto work = [&](std::size_t row_index) {
    std::size_t m = row_index / n_solvers;
    std::size_t s = row_index % n_solvers;
    detail::run_bench_row(entries[m], cfg.solvers[s], cfg, row_index, report.rows[row_index]);
  };

  if (cfg.jobs == 1 || report.rows.size() <= 1) {
    for (std::size_t r = 0; r < report.rows.size(); ++r) work(r);
  } else {
    std::atomic<std::size_t> next{0};
    std::size_t n_threads = std::min(cfg.jobs, report.rows.size());
    std::vector<std::thread> pool;
    pool.reserve(n_threads);
    for (std::size_t t = 0; t < n_threads; ++t) {
      pool.emplace_back([&]() {
        for (;;) {
          std::size_t r = next.fetch_add(1);
          if (r >= report.rows.size()) return;
          work(r);
        }
      });
    }
    for (auto& th : pool) th.join();
  }
  return report;
}

// ---------------------------------------------------------------------------
// Serialization

namespace detail {

inline const char* kBenchColumns[] = {
    "matrix", "solver", "n", "nnz", "solver_ok", "error", "iterations", "converged",
    "relative_residual", "diagnostic", "time_to_solution", "median_time", "ci_low",
    "ci_high", "kappa", "a_norm", "loose_lower", "loose_upper", "tight_lower",
    "tight_upper", "true_error_cap", "singularity_cap", "verdict", "rel_error_true",
    "rel_error_xhat"};

/// Field values in kBenchColumns order; numeric fields already formatted.
inline std::vector<std::string> row_fields(const BenchRow& r) {
  auto num = [](double v) { return format_significant17(v); };
  return {r.matrix,
          r.solver,
          std::to_string(r.n),
          std::to_string(r.nnz),
          r.solver_ok ? "true" : "false",
          r.error,
          std::to_string(r.iterations),
          r.converged ? "true" : "false",
          num(r.relative_residual),
          r.diagnostic,
          num(r.time_to_solution),
          num(r.median_time),
          num(r.ci_low),
          num(r.ci_high),
          num(r.kappa),
          num(r.a_norm),
          num(r.loose_lower),
          num(r.loose_upper),
          num(r.tight_lower),
          num(r.tight_upper),
          num(r.true_error_cap),
          num(r.singularity_cap),
          r.verdict,
          num(r.rel_error_true),
          num(r.rel_error_xhat)};
}

/// Which columns hold numbers (indexes into kBenchColumns).
inline bool column_is_numeric(std::size_t c) {
  switch (c) {
    case 0:   // matrix
    case 1:   // solver
    case 4:   // solver_ok
    case 5:   // error
    case 7:   // converged
    case 9:   // diagnostic
    case 22:  // verdict
      return false;
    default:
      return true;
  }
}

inline bool column_is_bool(std::size_t c) { return c == 4 || c == 7; }

inline void csv_field(std::ostream& out, const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) {
    out << s;
    return;
  }
  out << '"';
  for (char ch : s) {
    if (ch == '"') out << '"';
    out << ch;
  }
  out << '"';
}

inline void json_string(std::ostream& out, const std::string& s) {
  out << '"';
  for (char ch : s) {
    switch (ch) {
      case '"': out << "\\\""; break;
      case '\\': out << "\\\\"; break;
      case '\n': out << "\\n"; break;
      case '\r': out << "\\r"; break;
      case '\t': out << "\\t"; break;
      default:
        if (static_cast<unsigned char>(ch) < 0x20) {
          const char* hex = "0123456789abcdef";
          out << "\\u00" << hex[(ch >> 4) & 0xF] << hex[ch & 0xF];
        } else {
          out << ch;
        }
    }
  }
  out << '"';
}

}  // namespace detail

/// CSV with a header row. Fields containing commas, quotes, or newlines are
/// quoted with doubled inner quotes. Numbers carry 17 significant digits.
inline void write_csv(const BenchReport& report, std::ostream& out) {
  constexpr std::size_t n_cols = std::size(detail::kBenchColumns);
  for (std::size_t c = 0; c < n_cols; ++c) {
    if (c) out << ',';
    out << detail::kBenchColumns[c];
  }
  out << '\n';
  for (const BenchRow& row : report.rows) {
    auto fields = detail::row_fields(row);
    for (std::size_t c = 0; c < n_cols; ++c) {
      if (c) out << ',';
      detail::csv_field(out, fields[c]);
    }
    out << '\n';
  }
}

/// One JSON object per line, same fields as the CSV. JSON has no literal for
/// non-finite numbers, so inf/-inf/nan are emitted as strings.
inline void write_jsonl(const BenchReport& report, std::ostream& out) {
  constexpr std::size_t n_cols = std::size(detail::kBenchColumns);
  for (const BenchRow& row : report.rows) {
    auto fields = detail::row_fields(row);
    out << '{';
    for (std::size_t c = 0; c < n_cols; ++c) {
      if (c) out << ',';
      detail::json_string(out, detail::kBenchColumns[c]);
      out << ':';
      const std::string& v = fields[c];
      if (detail::column_is_bool(c)) {
        out << v;
      } else if (detail::column_is_numeric(c)) {
        bool finite = v.find_first_not_of("+-0123456789.eE") == std::string::npos && !v.empty();
        if (finite) out << v;
        else detail::json_string(out, v);
      } else {
        detail::json_string(out, v);
      }
    }
    out << "}\n";
  }
}

}  // namespace condkit
