#pragma once

// Sparse matrix core: CSR storage, matrix-vector products, vector norms,
// and diagonal row/column scalings.
//
// CSR is the single canonical storage. Column-oriented operations traverse
// the row structure; no parallel column copy is kept. All reductions run in
// stored-index order, so results are deterministic for a given matrix.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace condkit {

using DenseVector = std::vector<double>;

struct DimensionMismatch : std::runtime_error {
  explicit DimensionMismatch(const std::string& what) : std::runtime_error(what) {}
};

struct ZeroColumn : std::runtime_error {
  explicit ZeroColumn(std::size_t j)
      : std::runtime_error("column " + std::to_string(j) + " has zero norm"), column(j) {}
  std::size_t column;
};

struct ZeroRow : std::runtime_error {
  explicit ZeroRow(std::size_t i)
      : std::runtime_error("row " + std::to_string(i) + " has zero norm"), row(i) {}
  std::size_t row;
};

struct Triplet {
  std::size_t row = 0;
  std::size_t col = 0;
  double value = 0.0;
};

/// Compressed sparse row matrix over double entries.
///
/// Invariants: row_offsets has nrows+1 entries, is nondecreasing, and starts
/// at 0; column indices are strictly increasing within each row and less than
/// ncols; values are finite. Stored zeros are tolerated.
class SparseMatrix {
 public:
  SparseMatrix() = default;

  SparseMatrix(std::size_t nrows, std::size_t ncols, std::vector<std::size_t> row_offsets,
               std::vector<std::size_t> col_indices, std::vector<double> values)
      : nrows_(nrows),
        ncols_(ncols),
        row_offsets_(std::move(row_offsets)),
        col_indices_(std::move(col_indices)),
        values_(std::move(values)) {
    validate();
  }

  /// Builds from coordinate entries; duplicates are summed.
  static SparseMatrix from_triplets(std::size_t nrows, std::size_t ncols,
                                    std::vector<Triplet> entries) {
    for (const Triplet& t : entries) {
      if (t.row >= nrows || t.col >= ncols) {
        throw DimensionMismatch("triplet index (" + std::to_string(t.row) + ", " +
                                std::to_string(t.col) + ") outside " + std::to_string(nrows) +
                                "x" + std::to_string(ncols));
      }
    }
    std::sort(entries.begin(), entries.end(), [](const Triplet& a, const Triplet& b) {
      return a.row != b.row ? a.row < b.row : a.col < b.col;
    });
    std::vector<std::size_t> offsets(nrows + 1, 0);
    std::vector<std::size_t> cols;
    std::vector<double> vals;
    cols.reserve(entries.size());
    vals.reserve(entries.size());
    for (std::size_t k = 0; k < entries.size();) {
      std::size_t r = entries[k].row, c = entries[k].col;
      double sum = 0.0;
      for (; k < entries.size() && entries[k].row == r && entries[k].col == c; ++k) {
        sum += entries[k].value;
      }
      offsets[r + 1] += 1;
      cols.push_back(c);
      vals.push_back(sum);
    }
    for (std::size_t i = 0; i < nrows; ++i) offsets[i + 1] += offsets[i];
    return SparseMatrix(nrows, ncols, std::move(offsets), std::move(cols), std::move(vals));
  }

  static SparseMatrix identity(std::size_t n) {
    std::vector<std::size_t> offsets(n + 1), cols(n);
    std::iota(offsets.begin(), offsets.end(), std::size_t{0});
    std::iota(cols.begin(), cols.end(), std::size_t{0});
    return SparseMatrix(n, n, std::move(offsets), std::move(cols), std::vector<double>(n, 1.0));
  }

  std::size_t nrows() const { return nrows_; }
  std::size_t ncols() const { return ncols_; }
  std::size_t nnz() const { return values_.size(); }

  const std::vector<std::size_t>& row_offsets() const { return row_offsets_; }
  const std::vector<std::size_t>& col_indices() const { return col_indices_; }
  const std::vector<double>& values() const { return values_; }

  std::span<const std::size_t> row_cols(std::size_t i) const {
    return {col_indices_.data() + row_offsets_[i], row_offsets_[i + 1] - row_offsets_[i]};
  }
  std::span<const double> row_vals(std::size_t i) const {
    return {values_.data() + row_offsets_[i], row_offsets_[i + 1] - row_offsets_[i]};
  }

  /// Stored entry at (i, j), or 0 when the position is not stored.
  double coeff(std::size_t i, std::size_t j) const {
    auto cols = row_cols(i);
    auto it = std::lower_bound(cols.begin(), cols.end(), j);
    if (it == cols.end() || *it != j) return 0.0;
    return values_[row_offsets_[i] + static_cast<std::size_t>(it - cols.begin())];
  }

 private:
  void validate() const {
    if (row_offsets_.size() != nrows_ + 1 || row_offsets_.front() != 0 ||
        row_offsets_.back() != values_.size() || col_indices_.size() != values_.size()) {
      throw DimensionMismatch("inconsistent CSR arrays");
    }
    for (std::size_t i = 0; i < nrows_; ++i) {
      if (row_offsets_[i] > row_offsets_[i + 1]) throw DimensionMismatch("row offsets decrease");
      for (std::size_t k = row_offsets_[i]; k < row_offsets_[i + 1]; ++k) {
        if (col_indices_[k] >= ncols_) throw DimensionMismatch("column index out of range");
        if (k > row_offsets_[i] && col_indices_[k - 1] >= col_indices_[k]) {
          throw DimensionMismatch("column indices not strictly increasing in row " +
                                  std::to_string(i));
        }
        if (!std::isfinite(values_[k])) throw DimensionMismatch("non-finite entry");
      }
    }
  }

  std::size_t nrows_ = 0;
  std::size_t ncols_ = 0;
  std::vector<std::size_t> row_offsets_{0};
  std::vector<std::size_t> col_indices_{};
  std::vector<double> values_{};
};

/// Positive diagonal scaling factors (all finite and > 0).
class ScalingDiagonal {
 public:
  explicit ScalingDiagonal(DenseVector factors) : factors_(std::move(factors)) {
    for (std::size_t i = 0; i < factors_.size(); ++i) {
      if (!(factors_[i] > 0.0) || !std::isfinite(factors_[i])) {
        throw std::invalid_argument("scaling factor " + std::to_string(i) +
                                    " is not positive and finite");
      }
    }
  }
  std::size_t size() const { return factors_.size(); }
  double operator[](std::size_t i) const { return factors_[i]; }
  const DenseVector& factors() const { return factors_; }

 private:
  DenseVector factors_;
};

/// Euclidean norm with overflow-safe scaling: entries near the range limits
/// are rescaled by the max magnitude before squaring.
inline double two_norm(const DenseVector& v) {
  double amax = 0.0;
  for (double x : v) amax = std::max(amax, std::abs(x));
  if (amax == 0.0) return 0.0;
  if (!std::isfinite(amax)) return amax;
  double sum = 0.0;
  for (double x : v) {
    double s = x / amax;
    sum += s * s;
  }
  return amax * std::sqrt(sum);
}

inline double one_norm(const DenseVector& v) {
  double sum = 0.0;
  for (double x : v) sum += std::abs(x);
  return sum;
}

inline double inf_norm(const DenseVector& v) {
  double amax = 0.0;
  for (double x : v) amax = std::max(amax, std::abs(x));
  return amax;
}

inline double dot(const DenseVector& a, const DenseVector& b) {
  if (a.size() != b.size()) throw DimensionMismatch("dot: length mismatch");
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) sum += a[i] * b[i];
  return sum;
}

inline double frobenius_norm(const SparseMatrix& a) {
  return two_norm(a.values());
}

/// y = A·x. Row sums accumulate in stored-index order.
inline DenseVector matvec(const SparseMatrix& a, const DenseVector& x) {
  if (x.size() != a.ncols()) {
    throw DimensionMismatch("matvec: vector length " + std::to_string(x.size()) +
                            " != ncols " + std::to_string(a.ncols()));
  }
  DenseVector y(a.nrows(), 0.0);
  for (std::size_t i = 0; i < a.nrows(); ++i) {
    auto cols = a.row_cols(i);
    auto vals = a.row_vals(i);
    double sum = 0.0;
    for (std::size_t k = 0; k < cols.size(); ++k) sum += vals[k] * x[cols[k]];
    y[i] = sum;
  }
  return y;
}

/// y = Aᵀ·x without materializing the transpose. Each output component
/// accumulates contributions in increasing row order.
inline DenseVector transpose_matvec(const SparseMatrix& a, const DenseVector& x) {
  if (x.size() != a.nrows()) {
    throw DimensionMismatch("transpose_matvec: vector length " + std::to_string(x.size()) +
                            " != nrows " + std::to_string(a.nrows()));
  }
  DenseVector y(a.ncols(), 0.0);
  for (std::size_t i = 0; i < a.nrows(); ++i) {
    auto cols = a.row_cols(i);
    auto vals = a.row_vals(i);
    for (std::size_t k = 0; k < cols.size(); ++k) y[cols[k]] += vals[k] * x[i];
  }
  return y;
}

/// Euclidean norm of every column, via one pass over the rows.
/// Overflow-safe: per-column max magnitudes are gathered first.
inline DenseVector column_norms(const SparseMatrix& a) {
  DenseVector amax(a.ncols(), 0.0);
  for (std::size_t i = 0; i < a.nrows(); ++i) {
    auto cols = a.row_cols(i);
    auto vals = a.row_vals(i);
    for (std::size_t k = 0; k < cols.size(); ++k) {
      amax[cols[k]] = std::max(amax[cols[k]], std::abs(vals[k]));
    }
  }
  DenseVector sums(a.ncols(), 0.0);
  for (std::size_t i = 0; i < a.nrows(); ++i) {
    auto cols = a.row_cols(i);
    auto vals = a.row_vals(i);
    for (std::size_t k = 0; k < cols.size(); ++k) {
      std::size_t j = cols[k];
      if (amax[j] == 0.0) continue;
      double s = vals[k] / amax[j];
      sums[j] += s * s;
    }
  }
  DenseVector norms(a.ncols(), 0.0);
  for (std::size_t j = 0; j < a.ncols(); ++j) norms[j] = amax[j] * std::sqrt(sums[j]);
  return norms;
}

/// Returns (A·D⁻¹, D) where D holds the column norms: every column of the
/// result has unit Euclidean norm. Throws ZeroColumn on the first empty or
/// zero-norm column.
inline std::pair<SparseMatrix, ScalingDiagonal> column_scale(const SparseMatrix& a) {
  DenseVector norms = column_norms(a);
  for (std::size_t j = 0; j < norms.size(); ++j) {
    if (norms[j] == 0.0) throw ZeroColumn(j);
  }
  std::vector<double> vals(a.values());
  const auto& cols = a.col_indices();
  for (std::size_t k = 0; k < vals.size(); ++k) vals[k] /= norms[cols[k]];
  SparseMatrix scaled(a.nrows(), a.ncols(), a.row_offsets(), a.col_indices(), std::move(vals));
  return {std::move(scaled), ScalingDiagonal(std::move(norms))};
}

/// Recovers x from the solution y of the column-scaled system (A·D⁻¹)y = b:
/// x = D⁻¹·y componentwise.
inline DenseVector unscale_solution(const DenseVector& y, const ScalingDiagonal& d) {
  if (y.size() != d.size()) throw DimensionMismatch("unscale_solution: length mismatch");
  DenseVector x(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) x[i] = y[i] / d[i];
  return x;
}

/// Returns (D_r⁻¹·A, D_r⁻¹·b) where D_r holds the row norms: the solution is
/// unchanged. Throws ZeroRow on the first zero-norm row.
inline std::pair<SparseMatrix, DenseVector> row_scale(const SparseMatrix& a,
                                                      const DenseVector& b) {
  if (b.size() != a.nrows()) throw DimensionMismatch("row_scale: rhs length != nrows");
  std::vector<double> vals(a.values());
  DenseVector bs(b);
  for (std::size_t i = 0; i < a.nrows(); ++i) {
    auto rv = a.row_vals(i);
    DenseVector row(rv.begin(), rv.end());
    double norm = two_norm(row);
    if (norm == 0.0) throw ZeroRow(i);
    for (std::size_t k = a.row_offsets()[i]; k < a.row_offsets()[i + 1]; ++k) vals[k] /= norm;
    bs[i] /= norm;
  }
  SparseMatrix scaled(a.nrows(), a.ncols(), a.row_offsets(), a.col_indices(), std::move(vals));
  return {std::move(scaled), std::move(bs)};
}

}  // namespace condkit
