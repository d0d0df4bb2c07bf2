#pragma once

// Relative-error bounds for an approximate solution of Ax = b, driven by the
// condition number.
//
// With r = A·x̂ - b and κ = κ₂(A):
//   loose:  (1/κ)·‖r‖/‖b‖   ≤ ‖x̂-x‖/‖x‖ ≤ κ·‖r‖/‖b‖
//   tight:  ‖r‖/(‖A‖·‖x̂‖)  ≤ ‖x̂-x‖/‖x̂‖ ≤ κ·‖r‖/(‖A‖·‖x̂‖)
// The tight upper bound ε also caps the error against the true solution via
// ε/(1-ε), and 2εκ/(1-κε) caps the relative distance to the nearest singular
// matrix; both poles are reported as +infinity. A matrix with κ ≥ 1/ε_mach is
// numerically singular: the verdict machinery reports that instead of
// accepting or rejecting.

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "condkit/condest.hpp"
#include "condkit/format.hpp"
#include "condkit/sparse.hpp"

namespace condkit {

/// Unit roundoff of binary64.
inline constexpr double kEpsMach = 0x1p-53;

struct ZeroRHS : std::invalid_argument {
  ZeroRHS() : std::invalid_argument("right-hand side has zero norm") {}
};

struct ZeroSolution : std::invalid_argument {
  ZeroSolution() : std::invalid_argument("candidate solution has zero norm") {}
};

struct Bounds {
  double lower = 0.0;
  double upper = 0.0;
};

namespace detail {

inline void require_kappa(double kappa) {
  if (!(kappa >= 1.0)) throw std::invalid_argument("kappa must be >= 1");
}

inline void require_nonnegative_residual(double residual_norm) {
  if (!(residual_norm >= 0.0)) throw std::invalid_argument("residual norm must be >= 0");
}

}  // namespace detail

/// Bounds on ‖x̂-x‖/‖x‖ relative to the true solution.
inline Bounds loose_bounds(double residual_norm, double b_norm, double kappa) {
  detail::require_nonnegative_residual(residual_norm);
  detail::require_kappa(kappa);
  if (b_norm == 0.0) throw ZeroRHS();
  if (!(b_norm > 0.0)) throw std::invalid_argument("b norm must be >= 0");
  double rho = residual_norm / b_norm;
  // rho = 0 means the exact solution; 0 bounds even when kappa is +infinity.
  if (rho == 0.0) return {0.0, 0.0};
  return {rho / kappa, kappa * rho};
}

/// Bounds on ‖x̂-x‖/‖x̂‖ relative to the computed solution.
inline Bounds tight_bounds(double residual_norm, double a_norm, double xhat_norm, double kappa) {
  detail::require_nonnegative_residual(residual_norm);
  detail::require_kappa(kappa);
  if (xhat_norm == 0.0) throw ZeroSolution();
  if (!(xhat_norm > 0.0)) throw std::invalid_argument("solution norm must be >= 0");
  if (!(a_norm > 0.0)) throw std::invalid_argument("operator norm must be > 0");
  double rho = residual_norm / (a_norm * xhat_norm);
  if (rho == 0.0) return {0.0, 0.0};
  return {rho, kappa * rho};
}

/// Converts a bound ε on ‖x̂-x‖/‖x̂‖ into a bound ε/(1-ε) on ‖x̂-x‖/‖x‖;
/// +infinity once ε ≥ 1 (the bound no longer constrains anything).
inline double propagate_bound(double eps_tight) {
  if (!(eps_tight >= 0.0)) throw std::invalid_argument("bound must be >= 0");
  if (eps_tight >= 1.0) return std::numeric_limits<double>::infinity();
  return eps_tight / (1.0 - eps_tight);
}

/// Relative distance cap 2εκ/(1-κε) to the nearest singular matrix;
/// +infinity at and past the κε = 1 pole, where the matrix must be treated
/// as numerically singular.
inline double singularity_bound(double kappa, double eps_mach = kEpsMach) {
  detail::require_kappa(kappa);
  if (!(eps_mach > 0.0)) throw std::invalid_argument("eps_mach must be > 0");
  double ke = kappa * eps_mach;
  if (ke >= 1.0) return std::numeric_limits<double>::infinity();
  return 2.0 * ke / (1.0 - ke);
}

enum class Verdict { accepted, rejected, numerically_singular };

inline const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::accepted: return "accepted";
    case Verdict::rejected: return "rejected";
    case Verdict::numerically_singular: return "numerically_singular";
  }
  return "unknown";
}

struct BoundsReport {
  double residual_norm = 0.0;  // ‖A·x̂ - b‖₂
  double b_norm = 0.0;
  double a_norm = 0.0;
  double xhat_norm = 0.0;
  double kappa = 0.0;
  bool kappa_supplied = false;  // false: estimated internally
  double loose_lower = 0.0, loose_upper = 0.0;
  double tight_lower = 0.0, tight_upper = 0.0;
  double true_error_cap = 0.0;   // propagate_bound(tight_upper)
  double singularity_cap = 0.0;  // singularity_bound(kappa)
  double threshold = 0.0;
  double eps_mach = kEpsMach;
  Verdict verdict = Verdict::rejected;

  /// Flat key-value view, values formatted to round-trip exactly.
  std::vector<std::pair<std::string, std::string>> to_kv() const {
    return {
        {"residual_norm", format_significant17(residual_norm)},
        {"b_norm", format_significant17(b_norm)},
        {"a_norm", format_significant17(a_norm)},
        {"xhat_norm", format_significant17(xhat_norm)},
        {"kappa", format_significant17(kappa)},
        {"kappa_source", kappa_supplied ? "supplied" : "estimated"},
        {"loose_lower", format_significant17(loose_lower)},
        {"loose_upper", format_significant17(loose_upper)},
        {"tight_lower", format_significant17(tight_lower)},
        {"tight_upper", format_significant17(tight_upper)},
        {"true_error_cap", format_significant17(true_error_cap)},
        {"singularity_cap", format_significant17(singularity_cap)},
        {"threshold", format_significant17(threshold)},
        {"eps_mach", format_significant17(eps_mach)},
        {"verdict", to_string(verdict)},
    };
  }
};

struct VerifyOptions {
  double threshold = 1e-7;        // accept iff tight_upper <= threshold
  std::optional<double> kappa;    // skip estimation when supplied
  std::optional<double> a_norm;   // skip estimation when supplied
  double eps_mach = kEpsMach;
  AdamConfig adam;                // estimator settings when estimating
  std::size_t restarts = 3;
  double pivot_tol = 1e-14;       // forwarded to cond2
};

/// Fills a complete BoundsReport for the triple (A, x̂, b).
///
/// κ and ‖A‖ are estimated via cond2 unless supplied; an estimated κ is
/// clamped to ≥ 1 (the estimator returns lower bounds on both norms, so a
/// near-orthogonal matrix can come out a hair under the mathematical floor).
/// Verdict: numerically_singular when κ ≥ 1/eps_mach, otherwise accepted
/// exactly when tight_upper ≤ threshold.
inline BoundsReport verify_solution(const SparseMatrix& a, const DenseVector& xhat,
                                    const DenseVector& b, const VerifyOptions& opt = {}) {
  if (a.nrows() != a.ncols()) throw DimensionMismatch("verify_solution: matrix must be square");
  if (xhat.size() != a.ncols()) throw DimensionMismatch("verify_solution: solution length");
  if (b.size() != a.nrows()) throw DimensionMismatch("verify_solution: rhs length");
  if (!(opt.threshold > 0.0)) throw std::invalid_argument("threshold must be > 0");

  BoundsReport rep;
  rep.threshold = opt.threshold;
  rep.eps_mach = opt.eps_mach;
  rep.xhat_norm = two_norm(xhat);
  if (rep.xhat_norm == 0.0) throw ZeroSolution();
  rep.b_norm = two_norm(b);
  if (rep.b_norm == 0.0) throw ZeroRHS();

  DenseVector r = matvec(a, xhat);
  for (std::size_t i = 0; i < r.size(); ++i) r[i] -= b[i];
  rep.residual_norm = two_norm(r);

  if (opt.kappa) {
    detail::require_kappa(*opt.kappa);
    rep.kappa = *opt.kappa;
    rep.kappa_supplied = true;
    if (opt.a_norm) {
      rep.a_norm = *opt.a_norm;
    } else {
      ExplicitOracle fwd(a);
      rep.a_norm = estimate_norm(fwd, opt.adam, opt.restarts).value;
    }
  } else {
    Cond2Result c = cond2(a, opt.adam, opt.restarts, opt.pivot_tol);
    rep.kappa = std::max(1.0, c.kappa);
    rep.a_norm = opt.a_norm ? *opt.a_norm : c.operator_norm.value;
  }
  if (!(rep.a_norm > 0.0)) throw std::invalid_argument("operator norm must be > 0");

  Bounds loose = loose_bounds(rep.residual_norm, rep.b_norm, rep.kappa);
  rep.loose_lower = loose.lower;
  rep.loose_upper = loose.upper;
  Bounds tight = tight_bounds(rep.residual_norm, rep.a_norm, rep.xhat_norm, rep.kappa);
  rep.tight_lower = tight.lower;
  rep.tight_upper = tight.upper;
  rep.true_error_cap = propagate_bound(rep.tight_upper);
  rep.singularity_cap = singularity_bound(rep.kappa, rep.eps_mach);

  if (rep.kappa >= 1.0 / rep.eps_mach) {
    rep.verdict = Verdict::numerically_singular;
  } else {
    rep.verdict = rep.tight_upper <= rep.threshold ? Verdict::accepted : Verdict::rejected;
  }
  return rep;
}

}  // namespace condkit
