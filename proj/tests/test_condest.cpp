#include <catch2/catch_amalgamated.hpp>

#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "condkit/condest.hpp"
#include "condkit/lu.hpp"
#include "condkit/sparse.hpp"
#include "oracles.hpp"

using condkit::AdamConfig;
using condkit::DenseVector;
using condkit::SparseMatrix;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

SparseMatrix diag_matrix(const std::vector<double>& d) {
  std::vector<condkit::Triplet> t;
  for (std::size_t i = 0; i < d.size(); ++i) t.push_back({i, i, d[i]});
  return SparseMatrix::from_triplets(d.size(), d.size(), std::move(t));
}

bool bitwise_equal(const DenseVector& a, const DenseVector& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (std::bit_cast<std::uint64_t>(a[i]) != std::bit_cast<std::uint64_t>(b[i])) return false;
  }
  return true;
}

double rel_gap(const DenseVector& a, const DenseVector& b) {
  double diff = 0.0, ref = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    diff += (a[i] - b[i]) * (a[i] - b[i]);
    ref += b[i] * b[i];
  }
  return std::sqrt(diff) / std::sqrt(ref);
}

}  // namespace

TEST_CASE("loss and gradient match closed forms") {
  SECTION("identity has zero loss and zero gradient everywhere") {
    SparseMatrix eye = SparseMatrix::identity(5);
    std::mt19937_64 gen(3);
    for (int k = 0; k < 4; ++k) {
      DenseVector x = condkit::random_unit_vector(5, gen);
      CHECK(condkit::loss_explicit(eye, x) == 0.0);
      for (double g : condkit::grad_explicit(eye, x)) CHECK_THAT(g, WithinAbs(0.0, 1e-15));
    }
  }

  SECTION("diag(2,1) at a non-axis point") {
    SparseMatrix a = diag_matrix({2.0, 1.0});
    double s = 1.0 / std::sqrt(2.0);
    DenseVector x{s, s};
    // ||x|| = 1, ||Ax||^2 = 5/2, so L = -log(5/2)/2.
    CHECK_THAT(condkit::loss_explicit(a, x), WithinRel(-0.5 * std::log(2.5), 1e-15));
    // grad = x - diag(4,1)x / 2.5.
    DenseVector g = condkit::grad_explicit(a, x);
    CHECK_THAT(g[0], WithinRel(s * (1.0 - 4.0 / 2.5), 1e-14));
    CHECK_THAT(g[1], WithinRel(s * (1.0 - 1.0 / 2.5), 1e-14));
  }

  SECTION("singular vectors are stationary points") {
    SparseMatrix a = diag_matrix({2.0, 1.0});
    for (DenseVector x : {DenseVector{1.0, 0.0}, DenseVector{0.0, 1.0}}) {
      for (double g : condkit::grad_explicit(a, x)) CHECK_THAT(g, WithinAbs(0.0, 1e-15));
    }
    CHECK_THAT(condkit::loss_explicit(a, {1.0, 0.0}), WithinRel(-std::log(2.0), 1e-15));
  }

  SECTION("zero image raises a degenerate direction") {
    SparseMatrix a = SparseMatrix::from_triplets(2, 2, {{0, 0, 1.0}});
    DenseVector x{0.0, 1.0};
    CHECK_THROWS_AS(condkit::loss_explicit(a, x), condkit::DegenerateDirection);
    CHECK_THROWS_AS(condkit::grad_explicit(a, x), condkit::DegenerateDirection);
  }
}

TEST_CASE("finite differences confirm both gradient paths") {
  const double h = 1e-6;

  SECTION("explicit oracle, moderate random matrix") {
    SparseMatrix a = oracle::random_sparse(20, 0.3, 7);
    condkit::ExplicitOracle ox(a);
    auto f = [&](const DenseVector& v) { return ox.loss(v); };
    std::mt19937_64 gen(11);
    for (int k = 0; k < 8; ++k) {
      DenseVector x = condkit::random_unit_vector(20, gen);
      DenseVector g = ox.grad(x);
      DenseVector fd = oracle::fd_gradient(f, x, h);
      CHECK(rel_gap(fd, g) < 1e-5);
    }
  }

  SECTION("explicit oracle, ill conditioned spectrum") {
    auto cm = oracle::svd_constructed(20, oracle::geometric_sigmas(20, 1.0, 1e6), 21);
    condkit::ExplicitOracle ox(cm.sparse);
    auto f = [&](const DenseVector& v) { return ox.loss(v); };
    std::mt19937_64 gen(12);
    for (int k = 0; k < 8; ++k) {
      DenseVector x = condkit::random_unit_vector(20, gen);
      CHECK(rel_gap(oracle::fd_gradient(f, x, h), ox.grad(x)) < 1e-5);
    }
  }

  SECTION("inverse oracle via LU solves") {
    SparseMatrix a = oracle::random_sparse(20, 0.3, 7);
    condkit::LUFactors lu = condkit::lu_factorize(a);
    condkit::InverseOracle ox(lu);
    auto f = [&](const DenseVector& v) { return ox.loss(v); };
    std::mt19937_64 gen(13);
    for (int k = 0; k < 8; ++k) {
      DenseVector x = condkit::random_unit_vector(20, gen);
      DenseVector g = ox.grad(x);
      DenseVector fd = oracle::fd_gradient(f, x, h);
      CHECK(rel_gap(fd, g) < 1e-5);
    }
  }

  SECTION("inverse oracle on a spread diagonal") {
    SparseMatrix a = diag_matrix({3.0, 1.0, 1e-3, 0.5});
    condkit::LUFactors lu = condkit::lu_factorize(a);
    condkit::InverseOracle ox(lu);
    auto f = [&](const DenseVector& v) { return ox.loss(v); };
    std::mt19937_64 gen(14);
    for (int k = 0; k < 6; ++k) {
      DenseVector x = condkit::random_unit_vector(4, gen);
      CHECK(rel_gap(oracle::fd_gradient(f, x, h), ox.grad(x)) < 1e-5);
    }
  }
}

TEST_CASE("projected adam recovers exactly known norms") {
  SECTION("identity") {
    SparseMatrix eye = SparseMatrix::identity(10);
    auto est = condkit::norm2(eye);
    CHECK_THAT(est.value, WithinAbs(1.0, 1e-12));
    CHECK(est.converged);
    CHECK(est.iterations < AdamConfig{}.max_iter);
    CHECK_THAT(condkit::two_norm(est.witness), WithinAbs(1.0, 1e-14));
  }

  SECTION("diagonal extremes, forward and inverse") {
    SparseMatrix a = diag_matrix({3.0, 1.0, 1e-3});
    auto fwd = condkit::norm2(a);
    CHECK(fwd.converged);
    CHECK_THAT(fwd.value, WithinRel(3.0, 1e-9));

    condkit::LUFactors lu = condkit::lu_factorize(a);
    auto inv = condkit::inv_norm2(lu);
    CHECK(inv.converged);
    CHECK_THAT(inv.value, WithinRel(1e3, 1e-9));
  }

  SECTION("estimate never exceeds the true norm") {
    auto cm = oracle::svd_constructed(40, oracle::geometric_sigmas(40, 1.0, 1e8), 5);
    condkit::ExplicitOracle ox(cm.sparse);
    auto est = condkit::estimate_norm(ox);
    double sigma_max = oracle::singular_values(cm.dense).front();
    CHECK(est.value <= sigma_max * (1.0 + 1e-12));
    CHECK_THAT(est.value, WithinRel(sigma_max, 1e-4));
    // The reported value is the operator applied to the witness, nothing else.
    double applied = condkit::two_norm(ox.apply(est.witness));
    CHECK_THAT(est.value, WithinRel(applied, 1e-14));
  }

  SECTION("zero operator yields zero with no convergence claim") {
    SparseMatrix z = SparseMatrix::from_triplets(4, 4, {});
    auto est = condkit::norm2(z);
    CHECK(est.value == 0.0);
    CHECK_FALSE(est.converged);
  }
}

TEST_CASE("trajectory invariants hold at every iteration") {
  auto run_instrumented = [](const SparseMatrix& a, std::uint64_t seed) {
    condkit::ExplicitOracle ox(a);
    AdamConfig cfg;
    cfg.seed = seed;
    std::size_t calls = 0;
    double prev_loss_min = std::numeric_limits<double>::infinity();
    std::size_t prev_t = 0;
    condkit::AdamObserver obs = [&](const condkit::AdamState& st,
                                    const condkit::AdamStepInfo& info) {
      ++calls;
      // Iterate stays on the unit sphere.
      REQUIRE_THAT(condkit::two_norm(st.x), WithinAbs(1.0, 1e-14));
      // Update is tangent at the pre-step iterate.
      REQUIRE(std::abs(info.x_dot_delta) <= 1e-13 * info.delta_norm);
      // Best-seen loss never rises.
      REQUIRE(st.loss_min <= prev_loss_min);
      prev_loss_min = st.loss_min;
      REQUIRE(st.t == prev_t + 1);
      prev_t = st.t;
    };
    auto est = condkit::projected_adam(ox, cfg, obs);
    REQUIRE(calls >= 1);
    REQUIRE(est.iterations == prev_t);
    return est;
  };

  SECTION("random moderate matrix") {
    auto est = run_instrumented(oracle::random_sparse(30, 0.2, 31), 2);
    CHECK(est.converged);
  }

  SECTION("constructed ill conditioned matrix") {
    auto cm = oracle::svd_constructed(50, oracle::geometric_sigmas(50, 2.0, 1e6), 33);
    auto est = run_instrumented(cm.sparse, 9);
    CHECK(est.converged);
    CHECK_THAT(est.value, WithinRel(oracle::singular_values(cm.dense).front(), 1e-4));
  }
}

TEST_CASE("runs are bitwise deterministic") {
  SparseMatrix a = oracle::random_sparse(25, 0.25, 17);

  SECTION("same seed, identical trajectory") {
    AdamConfig cfg;
    cfg.seed = 42;
    auto e1 = condkit::norm2(a, cfg);
    auto e2 = condkit::norm2(a, cfg);
    CHECK(std::bit_cast<std::uint64_t>(e1.value) == std::bit_cast<std::uint64_t>(e2.value));
    CHECK(e1.iterations == e2.iterations);
    CHECK(bitwise_equal(e1.witness, e2.witness));
  }

  SECTION("different seeds explore different starts") {
    condkit::ExplicitOracle ox(a);
    auto first_iterate = [&](std::uint64_t seed) {
      AdamConfig cfg;
      cfg.seed = seed;
      DenseVector captured;
      condkit::AdamObserver obs = [&](const condkit::AdamState& st, const condkit::AdamStepInfo&) {
        if (captured.empty()) captured = st.x;
      };
      condkit::projected_adam(ox, cfg, obs);
      return captured;
    };
    CHECK_FALSE(bitwise_equal(first_iterate(1), first_iterate(2)));
  }

  SECTION("restart seeds are derived, best value wins") {
    condkit::ExplicitOracle ox(a);
    AdamConfig cfg;
    cfg.seed = 7;
    auto combined = condkit::estimate_norm(ox, cfg, 3);

    condkit::NormEstimate best;
    for (std::size_t r = 0; r < 3; ++r) {
      AdamConfig c = cfg;
      c.seed = r == 0 ? cfg.seed : condkit::mix_seed(cfg.seed, r);
      auto e = condkit::projected_adam(ox, c);
      if (r == 0 || e.value > best.value) best = e;
    }
    CHECK(std::bit_cast<std::uint64_t>(combined.value) == std::bit_cast<std::uint64_t>(best.value));
    CHECK(bitwise_equal(combined.witness, best.witness));
  }

  SECTION("cond2 is reproducible end to end") {
    auto r1 = condkit::cond2(a);
    auto r2 = condkit::cond2(a);
    CHECK(std::bit_cast<std::uint64_t>(r1.kappa) == std::bit_cast<std::uint64_t>(r2.kappa));
  }
}

TEST_CASE("cond2 tracks reference condition numbers") {
  SECTION("identity") {
    auto r = condkit::cond2(SparseMatrix::identity(8));
    CHECK_THAT(r.kappa, WithinAbs(1.0, 1e-12));
    CHECK(r.factors.has_value());
  }

  SECTION("diagonal ratio") {
    auto r = condkit::cond2(diag_matrix({10.0, 2.0, 1.0}));
    CHECK_THAT(r.kappa, WithinRel(10.0, 1e-9));
    CHECK_THAT(r.operator_norm.value, WithinRel(10.0, 1e-9));
    CHECK_THAT(r.inverse_norm.value, WithinRel(1.0, 1e-9));
  }

  SECTION("constructed spectrum at kappa 1e8") {
    auto cm = oracle::svd_constructed(40, oracle::geometric_sigmas(40, 1.0, 1e8), 77);
    auto r = condkit::cond2(cm.sparse);
    CHECK_THAT(r.kappa, WithinRel(oracle::dense_cond2(cm.dense), 1e-3));
    CHECK(r.operator_norm.converged);
    CHECK(r.inverse_norm.converged);
  }

  SECTION("random moderate matrix against dense SVD") {
    SparseMatrix a = oracle::random_sparse(30, 0.3, 53);
    auto r = condkit::cond2(a);
    CHECK_THAT(r.kappa, WithinRel(oracle::dense_cond2(oracle::to_dense(a)), 1e-6));
  }
}

TEST_CASE("singular inputs report infinite condition number") {
  SECTION("numerically singular, duplicate rows") {
    SparseMatrix a = SparseMatrix::from_triplets(
        3, 3,
        {{0, 0, 1.0}, {0, 1, 2.0}, {1, 0, 1.0}, {1, 1, 2.0}, {2, 2, 5.0}});
    auto r = condkit::cond2(a);
    CHECK(std::isinf(r.kappa));
    CHECK(std::isinf(r.inverse_norm.value));
    CHECK(r.operator_norm.value > 0.0);
    CHECK_FALSE(r.factors.has_value());
  }

  SECTION("structurally singular, empty column") {
    SparseMatrix a = SparseMatrix::from_triplets(3, 3, {{0, 0, 1.0}, {1, 1, 1.0}, {2, 0, 1.0}});
    auto r = condkit::cond2(a);
    CHECK(std::isinf(r.kappa));
  }

  SECTION("zero matrix") {
    auto r = condkit::cond2(SparseMatrix::from_triplets(3, 3, {}));
    CHECK(std::isinf(r.kappa));
    CHECK(r.operator_norm.value == 0.0);
  }
}

TEST_CASE("argument validation") {
  SparseMatrix a = SparseMatrix::identity(3);
  condkit::ExplicitOracle ox(a);
  CHECK_THROWS_AS(condkit::estimate_norm(ox, AdamConfig{}, 0), std::invalid_argument);
  SparseMatrix rect = SparseMatrix::from_triplets(2, 3, {{0, 0, 1.0}, {1, 1, 1.0}});
  CHECK_THROWS_AS(condkit::cond2(rect), condkit::DimensionMismatch);
}
