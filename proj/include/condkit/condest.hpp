#pragma once

// Spectral norm and condition number estimation.
//
// The largest singular value of an operator Op is found by minimizing
//   L(v) = log ||v|| - log ||Op v||
// over the unit sphere with a projected Adam iteration: each update is
// projected onto the tangent plane at the current iterate and the iterate is
// renormalized, so the whole trajectory stays on the sphere. exp(-L) at the
// best-seen iterate is the norm estimate, and it is always a lower bound on
// the true norm (it is ||Op x|| at a unit point x).
//
// kappa2(A) = ||A||_2 * ||A^-1||_2 combines two such estimates. ||A^-1|| is
// estimated without forming the inverse: applying A^-1 is one sparse LU
// solve, and the gradient needs one extra transpose solve per iteration.

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <random>
#include <stdexcept>
#include <utility>
#include <vector>

#include "condkit/lu.hpp"
#include "condkit/rng.hpp"
#include "condkit/sparse.hpp"

namespace condkit {

/// Raised when the operator maps the current direction to (numerically)
/// zero, so the loss is undefined there; the driver re-randomizes.
struct DegenerateDirection : std::runtime_error {
  DegenerateDirection() : std::runtime_error("operator maps direction to zero") {}
};

struct AdamConfig {
  double alpha = 0.05;       // step size
  double beta1 = 0.9;        // first-moment decay
  double beta2 = 0.999;      // second-moment decay
  double eps_stab = 1e-8;    // denominator stabilizer in the Adam update
  std::size_t max_iter = 2000;
  std::uint64_t seed = 1;
  double rel_tol = 1e-12;    // minimum relative improvement that resets patience
  std::size_t patience = 100;
};

/// Minimization state; x always holds the current unit-norm iterate.
struct AdamState {
  DenseVector x, m, v;
  std::size_t t = 0;
  double loss_min = std::numeric_limits<double>::infinity();
  DenseVector x_min;
};

/// Per-iteration scalars handed to an observer alongside the state.
/// x_dot_delta is x·Δx recomputed after the tangent projection, against the
/// pre-step iterate.
struct AdamStepInfo {
  double x_dot_delta = 0.0;
  double delta_norm = 0.0;
  double loss = 0.0;
};

using AdamObserver = std::function<void(const AdamState&, const AdamStepInfo&)>;

struct NormEstimate {
  double value = 0.0;        // exp(-loss_min) == ||Op x_min|| at the unit witness
  DenseVector witness;       // best-seen direction
  std::size_t iterations = 0;
  bool converged = false;    // true when the loss plateaued before max_iter
};

/// Abstract differentiable loss L(v) = log||v|| - log||Op v|| for some
/// linear operator Op, with Op itself exposed for cross-checks.
class GradientOracle {
 public:
  virtual ~GradientOracle() = default;
  virtual std::size_t dimension() const = 0;
  virtual double loss(const DenseVector& x) const = 0;
  virtual DenseVector grad(const DenseVector& x) const = 0;
  virtual DenseVector apply(const DenseVector& x) const = 0;
};

/// L(v) for the explicit operator Op = A.
inline double loss_explicit(const SparseMatrix& a, const DenseVector& v) {
  double num = two_norm(v);
  double den = two_norm(matvec(a, v));
  if (den == 0.0) throw DegenerateDirection();
  return std::log(num) - std::log(den);
}

/// grad L(v) = v/||v||^2 - AᵀA·v/||Av||^2 for the explicit operator.
inline DenseVector grad_explicit(const SparseMatrix& a, const DenseVector& v) {
  DenseVector av = matvec(a, v);
  double vn = two_norm(v);
  double avn = two_norm(av);
  if (avn == 0.0) throw DegenerateDirection();
  DenseVector atav = transpose_matvec(a, av);
  DenseVector g(v.size());
  double inv_v2 = 1.0 / (vn * vn);
  double inv_av2 = 1.0 / (avn * avn);
  for (std::size_t i = 0; i < v.size(); ++i) g[i] = v[i] * inv_v2 - atav[i] * inv_av2;
  return g;
}

/// grad L(x) for the implicit operator Op = A⁻¹ through LU factors:
/// r = A⁻¹x by one solve, s = A⁻ᵀr by one transpose solve, then
/// grad = x/||x||^2 - s/||r||^2.
inline DenseVector grad_inverse(const LUFactors& f, const DenseVector& x) {
  DenseVector r = lu_solve(f, x);
  double rn = two_norm(r);
  if (rn == 0.0) throw DegenerateDirection();
  DenseVector s = lu_transpose_solve(f, r);
  double xn = two_norm(x);
  DenseVector g(x.size());
  double inv_x2 = 1.0 / (xn * xn);
  double inv_r2 = 1.0 / (rn * rn);
  for (std::size_t i = 0; i < x.size(); ++i) g[i] = x[i] * inv_x2 - s[i] * inv_r2;
  return g;
}

class ExplicitOracle : public GradientOracle {
 public:
  explicit ExplicitOracle(const SparseMatrix& a) : a_(a) {}
  std::size_t dimension() const override { return a_.ncols(); }
  double loss(const DenseVector& x) const override { return loss_explicit(a_, x); }
  DenseVector grad(const DenseVector& x) const override { return grad_explicit(a_, x); }
  DenseVector apply(const DenseVector& x) const override { return matvec(a_, x); }

 private:
  const SparseMatrix& a_;
};

/// Holds the factors by reference; they must outlive the oracle.
class InverseOracle : public GradientOracle {
 public:
  explicit InverseOracle(const LUFactors& f) : f_(f) {}
  std::size_t dimension() const override { return f_.row_perm.size(); }
  double loss(const DenseVector& x) const override {
    double rn = two_norm(lu_solve(f_, x));
    if (rn == 0.0) throw DegenerateDirection();
    return std::log(two_norm(x)) - std::log(rn);
  }
  DenseVector grad(const DenseVector& x) const override { return grad_inverse(f_, x); }
  DenseVector apply(const DenseVector& x) const override { return lu_solve(f_, x); }

 private:
  const LUFactors& f_;
};

namespace detail {

/// Sum of squares with Neumaier compensation; keeps the renormalized iterate
/// within a few ulp of unit norm independently of the dimension.
inline double compensated_norm(const DenseVector& x) {
  double sum = 0.0, comp = 0.0;
  for (double v : x) {
    double sq = v * v;
    double t = sum + sq;
    if (std::abs(sum) >= std::abs(sq)) {
      comp += (sum - t) + sq;
    } else {
      comp += (sq - t) + sum;
    }
    sum = t;
  }
  return std::sqrt(sum + comp);
}

}  // namespace detail

/// Minimizes the oracle loss over the unit sphere.
///
/// Each iteration takes an Adam step whose update is first projected onto
/// the tangent plane at x (removing the radial component) and then steps and
/// renormalizes, tracking the best loss seen. Stops early once the best loss
/// has not improved by rel_tol relatively for `patience` iterations; that
/// early stop is reported as converged=true. Degenerate directions trigger a
/// re-randomized restart within the same iteration budget; they are never
/// reported as errors. Deterministic for a fixed (oracle, config).
inline NormEstimate projected_adam(const GradientOracle& oracle, const AdamConfig& cfg = {},
                                   const AdamObserver& observer = {}) {
  const std::size_t n = oracle.dimension();
  if (n == 0) throw std::invalid_argument("projected_adam: zero-dimensional operator");
  std::mt19937_64 gen(cfg.seed);

  AdamState st;
  st.x = random_unit_vector(n, gen);
  st.m.assign(n, 0.0);
  st.v.assign(n, 0.0);
  st.x_min = st.x;

  double beta1_pow = 1.0, beta2_pow = 1.0;
  std::size_t since_improvement = 0;
  bool plateaued = false;
  std::size_t degenerate_budget = 16;

  auto restart = [&](void) {
    st.x = random_unit_vector(n, gen);
    st.m.assign(n, 0.0);
    st.v.assign(n, 0.0);
    beta1_pow = 1.0;
    beta2_pow = 1.0;
  };

  DenseVector delta(n);
  while (st.t < cfg.max_iter) {
    ++st.t;
    DenseVector g;
    try {
      g = oracle.grad(st.x);
    } catch (const DegenerateDirection&) {
      if (degenerate_budget-- == 0) break;
      restart();
      continue;
    }

    beta1_pow *= cfg.beta1;
    beta2_pow *= cfg.beta2;
    double m_corr = 1.0 / (1.0 - beta1_pow);
    double v_corr = 1.0 / (1.0 - beta2_pow);
    for (std::size_t i = 0; i < n; ++i) {
      st.m[i] = cfg.beta1 * st.m[i] + (1.0 - cfg.beta1) * g[i];
      st.v[i] = cfg.beta2 * st.v[i] + (1.0 - cfg.beta2) * g[i] * g[i];
      delta[i] = cfg.alpha * (st.m[i] * m_corr) / (std::sqrt(st.v[i] * v_corr) + cfg.eps_stab);
    }
    // Tangent projection at x, then the step, then back onto the sphere.
    double radial = dot(st.x, delta);
    for (std::size_t i = 0; i < n; ++i) delta[i] -= radial * st.x[i];

    AdamStepInfo info;
    if (observer) {
      info.x_dot_delta = dot(st.x, delta);
      info.delta_norm = two_norm(delta);
    }

    for (std::size_t i = 0; i < n; ++i) st.x[i] -= delta[i];
    double norm = detail::compensated_norm(st.x);
    if (norm == 0.0 || !std::isfinite(norm)) {
      if (degenerate_budget-- == 0) break;
      restart();
      continue;
    }
    for (std::size_t i = 0; i < n; ++i) st.x[i] /= norm;

    double loss;
    try {
      loss = oracle.loss(st.x);
    } catch (const DegenerateDirection&) {
      if (degenerate_budget-- == 0) break;
      restart();
      continue;
    }
    bool improved = !std::isfinite(st.loss_min) ||
                    st.loss_min - loss > cfg.rel_tol * std::abs(st.loss_min);
    if (improved) {
      since_improvement = 0;
    } else {
      ++since_improvement;
    }
    if (loss < st.loss_min) {
      st.loss_min = loss;
      st.x_min = st.x;
    }
    if (observer) {
      info.loss = loss;
      observer(st, info);
    }
    if (since_improvement >= cfg.patience) {
      plateaued = true;
      break;
    }
  }

  NormEstimate est;
  est.iterations = st.t;
  est.converged = plateaued;
  est.witness = st.x_min;
  if (std::isfinite(st.loss_min)) {
    est.value = std::exp(-st.loss_min);
    // The estimate and the operator applied to the witness must agree; a gap
    // here means the projection or bookkeeping is broken.
    double check = two_norm(oracle.apply(est.witness));
    if (!(std::abs(check - est.value) <= 1e-12 * std::max(est.value, check))) {
      throw std::logic_error("norm estimate does not match ||Op witness||");
    }
  } else {
    // Every sampled direction was degenerate: the operator is (numerically)
    // zero along everything we saw.
    est.value = 0.0;
    est.converged = false;
  }
  return est;
}

/// Best of `restarts` independently seeded runs (smallest loss wins, i.e.
/// the largest norm estimate).
inline NormEstimate estimate_norm(const GradientOracle& oracle, const AdamConfig& cfg = {},
                                  std::size_t restarts = 3) {
  if (restarts == 0) throw std::invalid_argument("estimate_norm: restarts must be >= 1");
  NormEstimate best;
  for (std::size_t r = 0; r < restarts; ++r) {
    AdamConfig c = cfg;
    c.seed = r == 0 ? cfg.seed : mix_seed(cfg.seed, r);
    NormEstimate e = projected_adam(oracle, c);
    if (r == 0 || e.value > best.value) best = std::move(e);
  }
  return best;
}

/// Estimate of ||A||_2 (single run; see estimate_norm for restarts).
inline NormEstimate norm2(const SparseMatrix& a, const AdamConfig& cfg = {}) {
  return projected_adam(ExplicitOracle(a), cfg);
}

/// Estimate of ||A⁻¹||_2 through existing factors (single run).
inline NormEstimate inv_norm2(const LUFactors& f, const AdamConfig& cfg = {}) {
  return projected_adam(InverseOracle(f), cfg);
}

struct Cond2Result {
  double kappa = 0.0;          // +infinity when the factorization breaks down
  NormEstimate operator_norm;  // ||A||_2
  NormEstimate inverse_norm;   // ||A⁻¹||_2
  std::optional<LUFactors> factors;
};

/// Estimates kappa2(A) = ||A||_2 * ||A⁻¹||_2 with `restarts` independently
/// seeded runs per norm, keeping the best of each.
///
/// A factorization breakdown (structural or numerical singularity) is
/// reported as kappa = +infinity rather than an error: a matrix the
/// elimination cannot pivot through is singular to working precision.
///
/// pivot_tol is deliberately smaller here than the lu_factorize default: the
/// estimator must see condition numbers up to ~1e14 without the
/// factorization declaring the matrix singular first.
inline Cond2Result cond2(const SparseMatrix& a, const AdamConfig& cfg = {},
                         std::size_t restarts = 3, double pivot_tol = 1e-14) {
  if (a.nrows() != a.ncols()) throw DimensionMismatch("cond2: matrix must be square");
  Cond2Result result;
  ExplicitOracle forward(a);
  AdamConfig cfg_fwd = cfg;
  result.operator_norm = estimate_norm(forward, cfg_fwd, restarts);

  try {
    LUFactors f = lu_factorize(a, pivot_tol);
    InverseOracle inverse(f);
    AdamConfig cfg_inv = cfg;
    cfg_inv.seed = mix_seed(cfg.seed, 0x1234);
    result.inverse_norm = estimate_norm(inverse, cfg_inv, restarts);
    result.kappa = result.operator_norm.value * result.inverse_norm.value;
    result.factors = std::move(f);
  } catch (const StructurallySingular&) {
    result.inverse_norm.value = std::numeric_limits<double>::infinity();
    result.kappa = std::numeric_limits<double>::infinity();
  } catch (const NumericallySingular&) {
    result.inverse_norm.value = std::numeric_limits<double>::infinity();
    result.kappa = std::numeric_limits<double>::infinity();
  }
  return result;
}

}  // namespace condkit
