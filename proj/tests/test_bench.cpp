#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <sstream>
#include <string>
#include <vector>

#include "condkit/bench.hpp"
#include "condkit/sparse.hpp"
#include "oracles.hpp"

using condkit::BenchConfig;
using condkit::BenchInput;
using condkit::BenchReport;
using condkit::BenchRow;
using condkit::DenseVector;
using condkit::GeneratorSpec;
using condkit::Interval;
using condkit::SolverSpec;
using condkit::SparseMatrix;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

SolverSpec make_spec(condkit::SolverKind kind, condkit::Preconditioner precond,
                     condkit::Scaling scaling, double tol = 1e-7) {
  SolverSpec spec;
  spec.kind = kind;
  spec.precond = precond;
  spec.scaling = scaling;
  spec.tol = tol;
  return spec;
}

// Splits one CSV record, honoring double-quote escaping.
std::vector<std::string> parse_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    char ch = line[i];
    if (quoted) {
      if (ch == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur += ch;
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      fields.push_back(cur);
      cur.clear();
    } else {
      cur += ch;
    }
  }
  fields.push_back(cur);
  return fields;
}

const BenchRow& find_row(const BenchReport& report, const std::string& matrix,
                         const std::string& solver) {
  for (const auto& row : report.rows)
    if (row.matrix == matrix && row.solver == solver) return row;
  FAIL("no row for " << matrix << " / " << solver);
  return report.rows.front();
}

}  // namespace

TEST_CASE("generator validates its spec") {
  GeneratorSpec g;
  g.n = 0;
  CHECK_THROWS_AS(condkit::generate_illconditioned(g), std::invalid_argument);
  g = {};
  g.small_col_fraction = 0.0;
  CHECK_THROWS_AS(condkit::generate_illconditioned(g), std::invalid_argument);
  g.small_col_fraction = 1.0;
  CHECK_THROWS_AS(condkit::generate_illconditioned(g), std::invalid_argument);
  g = {};
  g.small_scale = 2.0;
  g.large_scale = 1.0;
  CHECK_THROWS_AS(condkit::generate_illconditioned(g), std::invalid_argument);
  g = {};
  g.small_scale = 0.0;
  CHECK_THROWS_AS(condkit::generate_illconditioned(g), std::invalid_argument);
  g = {};
  g.density = -0.1;
  CHECK_THROWS_AS(condkit::generate_illconditioned(g), std::invalid_argument);
  g.density = 1.5;
  CHECK_THROWS_AS(condkit::generate_illconditioned(g), std::invalid_argument);
}

TEST_CASE("generator produces the documented column-norm plateaus") {
  GeneratorSpec g;  // defaults: n=100, fraction 0.324, scales 1e-2 / 1e10
  SparseMatrix a = condkit::generate_illconditioned(g);
  REQUIRE(a.nrows() == 100);
  REQUIRE(a.ncols() == 100);

  // Diagonal stays nonzero.
  for (std::size_t i = 0; i < 100; ++i) REQUIRE(a.coeff(i, i) != 0.0);

  // Every column norm sits on one of the two plateaus; round(0.324*100) = 32
  // of them on the small one, i.e. 32% of the norms fall below 1e-1.
  DenseVector norms = condkit::column_norms(a);
  std::size_t small_count = 0;
  for (double nrm : norms) {
    bool small = std::abs(nrm - g.small_scale) <= 1e-12 * g.small_scale;
    bool large = std::abs(nrm - g.large_scale) <= 1e-12 * g.large_scale;
    REQUIRE((small || large));
    if (nrm < 1e-1) ++small_count;
  }
  CHECK(small_count == 32);

  // Nonsingular: the factorization the estimator uses pivots through it.
  CHECK_NOTHROW(condkit::lu_factorize(a, 1e-14));
}

TEST_CASE("generator is deterministic and seed-sensitive") {
  GeneratorSpec g;
  g.n = 60;
  g.seed = 42;
  SparseMatrix a1 = condkit::generate_illconditioned(g);
  SparseMatrix a2 = condkit::generate_illconditioned(g);
  REQUIRE(a1.values() == a2.values());
  REQUIRE(a1.col_indices() == a2.col_indices());
  REQUIRE(a1.row_offsets() == a2.row_offsets());

  g.seed = 43;
  SparseMatrix a3 = condkit::generate_illconditioned(g);
  CHECK(a1.values() != a3.values());
}

TEST_CASE("tiny small_col_fraction yields all-large columns and moderate conditioning") {
  GeneratorSpec g;
  g.n = 40;
  g.small_col_fraction = 1e-9;  // rounds to zero small columns
  g.seed = 5;
  SparseMatrix a = condkit::generate_illconditioned(g);
  DenseVector norms = condkit::column_norms(a);
  for (double nrm : norms) REQUIRE_THAT(nrm, WithinRel(g.large_scale, 1e-12));
  // All columns on one plateau: conditioning is that of the capped core.
  CHECK(oracle::dense_cond2(oracle::to_dense(a)) < 10.0);
}

TEST_CASE("column scaling collapses the generator's condition number") {
  GeneratorSpec g;  // scales 1e-2 vs 1e10: ratio 1e12
  g.n = 50;
  g.seed = 11;
  SparseMatrix a = condkit::generate_illconditioned(g);
  double kappa_before = oracle::dense_cond2(oracle::to_dense(a));
  SparseMatrix scaled = condkit::column_scale(a).first;
  double kappa_after = oracle::dense_cond2(oracle::to_dense(scaled));

  CHECK(kappa_before >= g.large_scale / g.small_scale);  // at least the plateau ratio
  CHECK(kappa_after < 10.0);                             // construction caps it near 7
  CHECK(kappa_before / kappa_after >= (g.large_scale / g.small_scale) / 10.0);
}

TEST_CASE("make_known_solution manufactures a consistent system") {
  GeneratorSpec g;
  g.n = 30;
  SparseMatrix a = condkit::generate_illconditioned(g);
  condkit::KnownSystem ks = condkit::make_known_solution(a, 99);
  REQUIRE(ks.x_true.size() == 30);
  REQUIRE(ks.b.size() == 30);
  for (double v : ks.x_true) {
    REQUIRE(v >= -1.0);
    REQUIRE(v < 1.0);
  }
  DenseVector ax = condkit::matvec(a, ks.x_true);
  for (std::size_t i = 0; i < 30; ++i) REQUIRE(ax[i] == ks.b[i]);

  condkit::KnownSystem again = condkit::make_known_solution(a, 99);
  CHECK(again.x_true == ks.x_true);

  SparseMatrix rect = SparseMatrix::from_triplets(2, 3, {{0, 0, 1.0}, {1, 1, 1.0}});
  CHECK_THROWS_AS(condkit::make_known_solution(rect, 1), condkit::DimensionMismatch);
}

TEST_CASE("bootstrap_ci degenerate and invalid inputs") {
  CHECK_THROWS_AS(condkit::bootstrap_ci({}, 0.95, 100, 1), std::invalid_argument);
  CHECK_THROWS_AS(condkit::bootstrap_ci({1.0}, 0.0, 100, 1), std::invalid_argument);
  CHECK_THROWS_AS(condkit::bootstrap_ci({1.0}, 1.0, 100, 1), std::invalid_argument);
  CHECK_THROWS_AS(condkit::bootstrap_ci({1.0}, 0.95, 0, 1), std::invalid_argument);

  Interval single = condkit::bootstrap_ci({3.25}, 0.95, 500, 7);
  CHECK(single.low == 3.25);
  CHECK(single.high == 3.25);

  std::vector<double> constant(12, 1.5);
  Interval flat = condkit::bootstrap_ci(constant, 0.95, 500, 7);
  CHECK(flat.low == 1.5);
  CHECK(flat.high == 1.5);
}

TEST_CASE("bootstrap_ci is seeded-deterministic and ordered") {
  std::vector<double> samples(30);
  for (std::size_t i = 0; i < samples.size(); ++i)
    samples[i] = 1.0 + 0.37 * static_cast<double>(i * i % 17);
  Interval a = condkit::bootstrap_ci(samples, 0.9, 200, 31);
  Interval b = condkit::bootstrap_ci(samples, 0.9, 200, 31);
  CHECK(a.low == b.low);
  CHECK(a.high == b.high);
  CHECK(a.low <= a.high);

  // Few resamples on a rich sample: the seed visibly moves the endpoints.
  Interval c = condkit::bootstrap_ci(samples, 0.9, 200, 32);
  CHECK((c.low != a.low || c.high != a.high));
}

TEST_CASE("bootstrap_ci matches a high-resample reference within 2%") {
  std::vector<double> samples(100);
  for (std::size_t i = 0; i < 100; ++i) samples[i] = static_cast<double>(i + 1);

  // 20k resamples keeps the Monte Carlo error of the quantiles well under
  // the 2% comparison budget against the million-resample reference.
  Interval got = condkit::bootstrap_ci(samples, 0.95, 20000, 17);
  Interval ref = condkit::bootstrap_ci(samples, 0.95, 1000000, 1);

  CHECK_THAT(got.low, WithinRel(ref.low, 0.02));
  CHECK_THAT(got.high, WithinRel(ref.high, 0.02));
  CHECK(got.low < 50.5);
  CHECK(got.high > 50.5);
}

TEST_CASE("median interpolates") {
  CHECK(condkit::median({3.0, 1.0, 2.0}) == 2.0);
  CHECK(condkit::median({4.0, 1.0, 2.0, 3.0}) == 2.5);
  CHECK(condkit::median({5.0}) == 5.0);
  CHECK_THROWS_AS(condkit::median({}), std::invalid_argument);
}

TEST_CASE("run_bench validates its config") {
  BenchConfig cfg;
  cfg.solvers.push_back(SolverSpec{});
  cfg.repetitions = 0;
  CHECK_THROWS_AS(condkit::run_bench(cfg), std::invalid_argument);
  cfg.repetitions = 1;
  cfg.bootstrap_samples = 99;
  CHECK_THROWS_AS(condkit::run_bench(cfg), std::invalid_argument);
  cfg.bootstrap_samples = 100;
  cfg.solvers.clear();
  CHECK_THROWS_AS(condkit::run_bench(cfg), std::invalid_argument);
  cfg.solvers.push_back(SolverSpec{});
  cfg.jobs = 0;
  CHECK_THROWS_AS(condkit::run_bench(cfg), std::invalid_argument);
}

TEST_CASE("identity system under direct_lu is accepted with zero bounds") {
  BenchConfig cfg;
  BenchInput input;
  input.name = "identity";
  input.a = SparseMatrix::identity(10);
  input.x_true = DenseVector(10, 1.0);
  input.b = DenseVector(10, 1.0);
  cfg.inputs.push_back(input);
  cfg.solvers.push_back(SolverSpec{});  // direct_lu
  cfg.repetitions = 2;
  cfg.bootstrap_samples = 100;

  BenchReport report = condkit::run_bench(cfg);
  REQUIRE(report.rows.size() == 1);
  const BenchRow& row = report.rows[0];
  CHECK(row.matrix == "identity");
  CHECK(row.solver == "direct_lu+none+none");
  CHECK(row.n == 10);
  CHECK(row.nnz == 10);
  CHECK(row.solver_ok);
  CHECK(row.error.empty());
  CHECK(row.verdict == "accepted");
  CHECK(row.loose_lower == 0.0);
  CHECK(row.loose_upper == 0.0);
  CHECK(row.tight_lower == 0.0);
  CHECK(row.tight_upper == 0.0);
  CHECK(row.rel_error_true == 0.0);
  CHECK_THAT(row.kappa, WithinRel(1.0, 1e-9));
  CHECK(row.time_to_solution >= row.median_time);
}

TEST_CASE("repetitions=1 degenerates the confidence interval") {
  BenchConfig cfg;
  BenchInput input;
  input.name = "identity";
  input.a = SparseMatrix::identity(5);
  input.b = DenseVector(5, 2.0);
  cfg.inputs.push_back(input);
  cfg.solvers.push_back(SolverSpec{});
  cfg.repetitions = 1;
  cfg.bootstrap_samples = 100;

  BenchReport report = condkit::run_bench(cfg);
  REQUIRE(report.rows.size() == 1);
  const BenchRow& row = report.rows[0];
  CHECK(row.ci_low == row.median_time);
  CHECK(row.ci_high == row.median_time);
  CHECK(row.median_time == row.time_to_solution);
}

TEST_CASE("confidence interval brackets the median") {
  BenchConfig cfg;
  GeneratorSpec g;
  g.n = 25;
  g.large_scale = 1e2;
  cfg.generators.push_back(g);
  cfg.solvers.push_back(SolverSpec{});
  cfg.repetitions = 7;
  cfg.bootstrap_samples = 200;
  BenchReport report = condkit::run_bench(cfg);
  REQUIRE(report.rows.size() == 1);
  const BenchRow& row = report.rows[0];
  CHECK(row.ci_low <= row.median_time);
  CHECK(row.median_time <= row.ci_high);
}

TEST_CASE("generated rows satisfy the bound sandwiches") {
  BenchConfig cfg;
  GeneratorSpec g;
  g.n = 60;
  g.small_scale = 1e-2;
  g.large_scale = 1e2;  // kappa ~ 1e4: safely inside LU's comfort zone
  g.seed = 3;
  cfg.generators.push_back(g);
  GeneratorSpec g2 = g;
  g2.n = 45;
  g2.seed = 8;
  cfg.generators.push_back(g2);
  cfg.solvers.push_back(SolverSpec{});
  cfg.solvers.push_back(make_spec(condkit::SolverKind::gmres, condkit::Preconditioner::none,
                                  condkit::Scaling::column, 1e-10));
  cfg.repetitions = 2;
  cfg.bootstrap_samples = 100;

  BenchReport report = condkit::run_bench(cfg);
  REQUIRE(report.rows.size() == 4);
  // Estimated kappa can sit a hair below the true value; allow that slack.
  constexpr double kSlack = 1e-6;
  for (const BenchRow& row : report.rows) {
    INFO(row.matrix << " / " << row.solver);
    REQUIRE(row.solver_ok);
    REQUIRE(std::isfinite(row.rel_error_true));
    REQUIRE(std::isfinite(row.rel_error_xhat));
    CHECK(row.rel_error_true >= row.loose_lower * (1.0 - kSlack));
    CHECK(row.rel_error_true <= row.loose_upper * (1.0 + kSlack));
    CHECK(row.rel_error_xhat >= row.tight_lower * (1.0 - kSlack));
    CHECK(row.rel_error_xhat <= row.tight_upper * (1.0 + kSlack));
    CHECK(row.tight_upper <= row.loose_upper * (1.0 + kSlack));
  }
}

TEST_CASE("ill-conditioned n=200 system: direct accepted, iteratives rejected") {
  BenchConfig cfg;
  GeneratorSpec g;
  g.n = 200;
  g.small_scale = 1e-2;
  g.large_scale = 1e2;  // kappa >= 1e4 keeps direct_lu under the 1e-7 threshold
  g.seed = 7;
  cfg.generators.push_back(g);
  cfg.solvers.push_back(SolverSpec{});
  for (auto precond : {condkit::Preconditioner::none, condkit::Preconditioner::jacobi,
                       condkit::Preconditioner::ilu0}) {
    cfg.solvers.push_back(
        make_spec(condkit::SolverKind::gmres, precond, condkit::Scaling::column));
  }
  cfg.repetitions = 1;
  cfg.bootstrap_samples = 100;
  cfg.threshold = 1e-7;

  BenchReport report = condkit::run_bench(cfg);
  REQUIRE(report.rows.size() == 4);
  const BenchRow& direct = find_row(report, "gen0_n200", "direct_lu+none+none");
  CHECK(direct.verdict == "accepted");
  CHECK(direct.tight_upper <= 1e-7);

  for (const char* solver : {"gmres+none+column", "gmres+jacobi+column", "gmres+ilu0+column"}) {
    const BenchRow& row = find_row(report, "gen0_n200", solver);
    INFO(solver);
    REQUIRE(row.solver_ok);
    // The kernel reports success at its own tolerance, yet verification
    // rejects the solution: a small residual is not a small error here.
    CHECK(row.verdict == "rejected");
    CHECK(row.tight_upper > 1e-7);
  }
}

TEST_CASE("per-row failures are isolated") {
  // Duplicate rows: structurally fine, numerically singular.
  SparseMatrix singular = SparseMatrix::from_triplets(
      3, 3, {{0, 0, 1.0}, {0, 1, 2.0}, {1, 0, 1.0}, {1, 1, 2.0}, {2, 2, 1.0}});
  BenchConfig cfg;
  BenchInput bad;
  bad.name = "singular";
  bad.a = singular;
  bad.b = DenseVector(3, 1.0);
  cfg.inputs.push_back(bad);
  BenchInput good;
  good.name = "identity";
  good.a = SparseMatrix::identity(3);
  good.b = DenseVector(3, 1.0);
  cfg.inputs.push_back(good);
  cfg.solvers.push_back(SolverSpec{});
  cfg.repetitions = 1;
  cfg.bootstrap_samples = 100;

  BenchReport report = condkit::run_bench(cfg);
  REQUIRE(report.rows.size() == 2);
  const BenchRow& failed = find_row(report, "singular", "direct_lu+none+none");
  CHECK_FALSE(failed.solver_ok);
  CHECK(failed.verdict == "failed");
  CHECK_FALSE(failed.error.empty());
  const BenchRow& ok = find_row(report, "identity", "direct_lu+none+none");
  CHECK(ok.solver_ok);
  CHECK(ok.verdict == "accepted");
}

TEST_CASE("singular matrix under an iterative solver is flagged by its kappa") {
  SparseMatrix singular = SparseMatrix::from_triplets(
      3, 3, {{0, 0, 1.0}, {0, 1, 2.0}, {1, 0, 1.0}, {1, 1, 2.0}, {2, 2, 1.0}});
  BenchConfig cfg;
  BenchInput input;
  input.name = "singular";
  input.a = singular;
  input.b = DenseVector(3, 1.0);
  cfg.inputs.push_back(input);
  cfg.solvers.push_back(
      make_spec(condkit::SolverKind::gmres, condkit::Preconditioner::none, condkit::Scaling::none));
  cfg.repetitions = 1;
  cfg.bootstrap_samples = 100;

  BenchReport report = condkit::run_bench(cfg);
  REQUIRE(report.rows.size() == 1);
  const BenchRow& row = report.rows[0];
  REQUIRE(row.solver_ok);
  CHECK(std::isinf(row.kappa));
  CHECK(row.verdict == "numerically_singular");
}

TEST_CASE("report is reproducible except for wall-time fields") {
  BenchConfig cfg;
  GeneratorSpec g;
  g.n = 40;
  g.large_scale = 1e2;
  g.seed = 21;
  cfg.generators.push_back(g);
  BenchInput input;
  input.name = "identity";
  input.a = SparseMatrix::identity(8);
  input.b = DenseVector(8, 1.0);
  cfg.inputs.push_back(input);
  cfg.solvers.push_back(SolverSpec{});
  cfg.solvers.push_back(make_spec(condkit::SolverKind::bicgstab, condkit::Preconditioner::jacobi,
                                  condkit::Scaling::column, 1e-9));
  cfg.repetitions = 2;
  cfg.bootstrap_samples = 150;
  cfg.jobs = 2;

  BenchReport r1 = condkit::run_bench(cfg);
  BenchReport r2 = condkit::run_bench(cfg);
  REQUIRE(r1.rows.size() == r2.rows.size());
  for (std::size_t i = 0; i < r1.rows.size(); ++i) {
    const BenchRow& a = r1.rows[i];
    const BenchRow& b = r2.rows[i];
    INFO(a.matrix << " / " << a.solver);
    CHECK(a.matrix == b.matrix);
    CHECK(a.solver == b.solver);
    CHECK(a.n == b.n);
    CHECK(a.nnz == b.nnz);
    CHECK(a.solver_ok == b.solver_ok);
    CHECK(a.error == b.error);
    CHECK(a.iterations == b.iterations);
    CHECK(a.converged == b.converged);
    CHECK((a.relative_residual == b.relative_residual ||
           (std::isnan(a.relative_residual) && std::isnan(b.relative_residual))));
    CHECK(a.diagnostic == b.diagnostic);
    CHECK(a.kappa == b.kappa);
    CHECK(a.a_norm == b.a_norm);
    CHECK(a.loose_lower == b.loose_lower);
    CHECK(a.loose_upper == b.loose_upper);
    CHECK(a.tight_lower == b.tight_lower);
    CHECK(a.tight_upper == b.tight_upper);
    CHECK(a.verdict == b.verdict);
    CHECK((a.rel_error_true == b.rel_error_true ||
           (std::isnan(a.rel_error_true) && std::isnan(b.rel_error_true))));
  }
}

TEST_CASE("csv output carries the documented schema and quoting") {
  BenchReport report;
  BenchRow row;
  row.matrix = "weird,\"name\"";
  row.solver = "direct_lu+none+none";
  row.n = 4;
  row.nnz = 4;
  row.solver_ok = true;
  row.error = "line one\nline two";
  row.relative_residual = 0.5;
  row.kappa = 1.0;
  row.verdict = "accepted";
  report.rows.push_back(row);

  std::ostringstream out;
  condkit::write_csv(report, out);
  std::istringstream in(out.str());
  std::string header;
  REQUIRE(std::getline(in, header));
  auto cols = parse_csv_line(header);
  REQUIRE(cols.size() == 25);
  CHECK(cols[0] == "matrix");
  CHECK(cols[14] == "kappa");
  CHECK(cols[22] == "verdict");

  // The embedded newline splits the physical line; rejoin before parsing.
  std::string line1, line2;
  REQUIRE(std::getline(in, line1));
  REQUIRE(std::getline(in, line2));
  auto fields = parse_csv_line(line1 + "\n" + line2);
  REQUIRE(fields.size() == 25);
  CHECK(fields[0] == "weird,\"name\"");
  CHECK(fields[5] == "line one\nline two");
  CHECK(fields[8] == "0.5");
  CHECK(std::strtod(fields[14].c_str(), nullptr) == 1.0);
  CHECK(fields[10] == "nan");  // time fields were never filled
  CHECK(fields[22] == "accepted");
}

TEST_CASE("jsonl output escapes strings and stringifies non-finite numbers") {
  BenchReport report;
  BenchRow row;
  row.matrix = "m\"1\"";
  row.solver = "gmres+none+none";
  row.kappa = std::numeric_limits<double>::infinity();
  row.relative_residual = 0.25;
  row.verdict = "numerically_singular";
  report.rows.push_back(row);

  std::ostringstream out;
  condkit::write_jsonl(report, out);
  std::string text = out.str();
  REQUIRE(text.back() == '\n');
  text.pop_back();
  CHECK(text.find('\n') == std::string::npos);  // one record, one line
  CHECK(text.front() == '{');
  CHECK(text.back() == '}');
  CHECK(text.find("\"matrix\":\"m\\\"1\\\"\"") != std::string::npos);
  CHECK(text.find("\"kappa\":\"inf\"") != std::string::npos);
  CHECK(text.find("\"relative_residual\":0.25") != std::string::npos);
  CHECK(text.find("\"median_time\":\"nan\"") != std::string::npos);
  CHECK(text.find("\"solver_ok\":false") != std::string::npos);
  CHECK(text.find("\"verdict\":\"numerically_singular\"") != std::string::npos);
}

TEST_CASE("parallel rows match the serial grid") {
  BenchConfig cfg;
  GeneratorSpec g;
  g.n = 30;
  g.large_scale = 1e2;
  cfg.generators.push_back(g);
  BenchInput input;
  input.name = "identity";
  input.a = SparseMatrix::identity(6);
  input.b = DenseVector(6, 1.0);
  cfg.inputs.push_back(input);
  cfg.solvers.push_back(SolverSpec{});
  cfg.solvers.push_back(make_spec(condkit::SolverKind::gmres, condkit::Preconditioner::jacobi,
                                  condkit::Scaling::column, 1e-10));
  cfg.repetitions = 1;
  cfg.bootstrap_samples = 100;

  cfg.jobs = 1;
  BenchReport serial = condkit::run_bench(cfg);
  cfg.jobs = 4;
  BenchReport parallel = condkit::run_bench(cfg);
  REQUIRE(serial.rows.size() == parallel.rows.size());
  for (std::size_t i = 0; i < serial.rows.size(); ++i) {
    CHECK(serial.rows[i].matrix == parallel.rows[i].matrix);
    CHECK(serial.rows[i].solver == parallel.rows[i].solver);
    CHECK(serial.rows[i].verdict == parallel.rows[i].verdict);
    CHECK(serial.rows[i].kappa == parallel.rows[i].kappa);
    CHECK(serial.rows[i].tight_upper == parallel.rows[i].tight_upper);
  }
}
