#pragma once

// Sparse LU factorization with row partial pivoting, and the triangular
// solves for both A·x = b and Aᵀ·x = b.
//
// Left-looking column elimination over a dense working column. The working
// representation is a factorization-local column view of the CSR input; the
// returned factors are CSR again. With P·A = L·U (P applied as row_perm),
// L is unit lower triangular with the unit diagonal implicit, U is upper
// triangular with the diagonal stored first in each row.

#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "condkit/sparse.hpp"

namespace condkit {

struct StructurallySingular : std::runtime_error {
  explicit StructurallySingular(std::size_t col)
      : std::runtime_error("structurally singular: no pivot candidate in column " +
                           std::to_string(col)),
        column(col) {}
  std::size_t column;
};

struct NumericallySingular : std::runtime_error {
  NumericallySingular(std::size_t col, double pivot)
      : std::runtime_error("numerically singular: best pivot " + std::to_string(pivot) +
                           " in column " + std::to_string(col) + " below threshold"),
        column(col),
        pivot(pivot) {}
  std::size_t column;
  double pivot;
};

struct LUFactors {
  SparseMatrix l;                     // strictly lower triangle, unit diagonal implicit
  SparseMatrix u;                     // upper triangle including the diagonal
  std::vector<std::size_t> row_perm;  // row_perm[k] = original row pivoted at step k
  double pivot_min = std::numeric_limits<double>::infinity();
};

/// Factorizes a square matrix as P·A = L·U, choosing in each column the
/// largest-magnitude candidate among the unpivoted rows (so |L| <= 1).
///
/// Throws StructurallySingular when a column has no candidate entries at all,
/// and NumericallySingular when the best candidate magnitude falls below
/// pivot_tol times the largest magnitude in the eliminated column.
inline LUFactors lu_factorize(const SparseMatrix& a, double pivot_tol = 1e-12) {
  if (a.nrows() != a.ncols()) throw DimensionMismatch("lu_factorize: matrix must be square");
  const std::size_t n = a.nrows();
  constexpr std::size_t kNone = static_cast<std::size_t>(-1);

  // Column view of A, local to the factorization.
  std::vector<std::size_t> col_ptr(n + 1, 0), col_row;
  std::vector<double> col_val;
  col_row.resize(a.nnz());
  col_val.resize(a.nnz());
  for (std::size_t k = 0; k < a.nnz(); ++k) col_ptr[a.col_indices()[k] + 1]++;
  for (std::size_t j = 0; j < n; ++j) col_ptr[j + 1] += col_ptr[j];
  {
    std::vector<std::size_t> next(col_ptr.begin(), col_ptr.end() - 1);
    for (std::size_t i = 0; i < n; ++i) {
      auto cols = a.row_cols(i);
      auto vals = a.row_vals(i);
      for (std::size_t k = 0; k < cols.size(); ++k) {
        std::size_t slot = next[cols[k]]++;
        col_row[slot] = i;
        col_val[slot] = vals[k];
      }
    }
  }

  std::vector<std::vector<std::pair<std::size_t, double>>> lcols(n), ucols(n);
  std::vector<std::size_t> row_perm(n, kNone), pinv(n, kNone);
  DenseVector work(n, 0.0);
  std::vector<bool> inwork(n, false);
  std::vector<std::size_t> touched;
  double pivot_min = std::numeric_limits<double>::infinity();

  for (std::size_t j = 0; j < n; ++j) {
    touched.clear();
    for (std::size_t p = col_ptr[j]; p < col_ptr[j + 1]; ++p) {
      std::size_t r = col_row[p];
      work[r] = col_val[p];
      inwork[r] = true;
      touched.push_back(r);
    }
    // Apply every earlier pivot column in pivot order; that is exactly the
    // unit lower triangular solve for this column of U.
    for (std::size_t k = 0; k < j; ++k) {
      std::size_t prow = row_perm[k];
      if (!inwork[prow] || work[prow] == 0.0) continue;
      double ukj = work[prow];
      ucols[j].push_back({k, ukj});
      for (const auto& [r, lval] : lcols[k]) {
        if (!inwork[r]) {
          inwork[r] = true;
          work[r] = 0.0;
          touched.push_back(r);
        }
        work[r] -= lval * ukj;
      }
    }

    std::size_t best = kNone;
    double best_mag = 0.0, col_max = 0.0;
    bool has_candidate = false;
    for (std::size_t r : touched) {
      double mag = std::abs(work[r]);
      col_max = std::max(col_max, mag);
      if (pinv[r] == kNone) {
        has_candidate = true;
        if (mag > best_mag) {
          best_mag = mag;
          best = r;
        }
      }
    }
    if (!has_candidate) throw StructurallySingular(j);
    if (best == kNone || best_mag == 0.0 || best_mag < pivot_tol * col_max) {
      throw NumericallySingular(j, best_mag);
    }
    pivot_min = std::min(pivot_min, best_mag);
    row_perm[j] = best;
    pinv[best] = j;
    ucols[j].push_back({j, work[best]});
    double pivot = work[best];
    for (std::size_t r : touched) {
      if (pinv[r] == kNone && work[r] != 0.0) lcols[j].push_back({r, work[r] / pivot});
    }
    for (std::size_t r : touched) {
      work[r] = 0.0;
      inwork[r] = false;
    }
  }

  // Assemble CSR factors. Traversing columns in ascending order fills each
  // row's entries with ascending column indices, so no per-row sort is needed.
  auto assemble = [n](const std::vector<std::vector<std::pair<std::size_t, double>>>& cols,
                      const std::vector<std::size_t>* remap) {
    std::vector<std::size_t> offsets(n + 1, 0);
    for (std::size_t j = 0; j < n; ++j) {
      for (const auto& [r, v] : cols[j]) {
        std::size_t i = remap ? (*remap)[r] : r;
        offsets[i + 1]++;
        (void)v;
      }
    }
    for (std::size_t i = 0; i < n; ++i) offsets[i + 1] += offsets[i];
    std::vector<std::size_t> next(offsets.begin(), offsets.end() - 1);
    std::vector<std::size_t> idx(offsets.back());
    std::vector<double> val(offsets.back());
    for (std::size_t j = 0; j < n; ++j) {
      for (const auto& [r, v] : cols[j]) {
        std::size_t i = remap ? (*remap)[r] : r;
        std::size_t slot = next[i]++;
        idx[slot] = j;
        val[slot] = v;
      }
    }
    return SparseMatrix(n, n, std::move(offsets), std::move(idx), std::move(val));
  };

  LUFactors f;
  f.l = assemble(lcols, &pinv);  // L rows live in pivot coordinates
  f.u = assemble(ucols, nullptr);
  f.row_perm = std::move(row_perm);
  f.pivot_min = pivot_min;
  return f;
}

/// Solves A·x = b through the factors: L·U·x = P·b.
inline DenseVector lu_solve(const LUFactors& f, const DenseVector& b) {
  const std::size_t n = f.row_perm.size();
  if (b.size() != n) throw DimensionMismatch("lu_solve: rhs length != n");
  DenseVector y(n);
  for (std::size_t k = 0; k < n; ++k) y[k] = b[f.row_perm[k]];
  // Forward: unit lower triangular.
  for (std::size_t i = 0; i < n; ++i) {
    auto cols = f.l.row_cols(i);
    auto vals = f.l.row_vals(i);
    double sum = y[i];
    for (std::size_t k = 0; k < cols.size(); ++k) sum -= vals[k] * y[cols[k]];
    y[i] = sum;
  }
  // Backward: the diagonal is the first stored entry of each U row.
  for (std::size_t i = n; i-- > 0;) {
    auto cols = f.u.row_cols(i);
    auto vals = f.u.row_vals(i);
    double sum = y[i];
    for (std::size_t k = 1; k < cols.size(); ++k) sum -= vals[k] * y[cols[k]];
    y[i] = sum / vals[0];
  }
  return y;
}

/// Solves Aᵀ·x = b through the same factors. With P·A = L·U this is
/// Uᵀ·Lᵀ·(P·x) = b, so the row permutation is applied on the way out and the
/// contract holds for A itself, not merely for L·U.
inline DenseVector lu_transpose_solve(const LUFactors& f, const DenseVector& b) {
  const std::size_t n = f.row_perm.size();
  if (b.size() != n) throw DimensionMismatch("lu_transpose_solve: rhs length != n");
  // Forward through Uᵀ (lower triangular), using U's rows as its columns.
  DenseVector w(b);
  for (std::size_t i = 0; i < n; ++i) {
    auto cols = f.u.row_cols(i);
    auto vals = f.u.row_vals(i);
    w[i] /= vals[0];
    for (std::size_t k = 1; k < cols.size(); ++k) w[cols[k]] -= vals[k] * w[i];
  }
  // Backward through Lᵀ (upper triangular with unit diagonal).
  for (std::size_t i = n; i-- > 0;) {
    auto cols = f.l.row_cols(i);
    auto vals = f.l.row_vals(i);
    for (std::size_t k = 0; k < cols.size(); ++k) w[cols[k]] -= vals[k] * w[i];
  }
  DenseVector x(n);
  for (std::size_t k = 0; k < n; ++k) x[f.row_perm[k]] = w[k];
  return x;
}

}  // namespace condkit
