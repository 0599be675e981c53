#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "errors.hpp"
#include "types.hpp"

namespace penceig {

template <typename T>
struct Triplet {
  int row;
  int col;
  T value;
};

/// Compressed-sparse-column matrix over real or complex scalars.
///
/// Storage is canonical after assembly: column pointers are monotone,
/// row indices strictly increase within each column and duplicates have
/// been summed.  Explicit zeros are kept so that assembled patterns are
/// reproducible.
template <typename T>
class SparseMatrix {
 public:
  SparseMatrix() = default;

  SparseMatrix(int rows, int cols)
      : rows_(rows), cols_(cols), col_ptr_(static_cast<size_t>(cols) + 1, 0) {
    if (rows < 0 || cols < 0)
      throw StructuralError("sparse matrix dimensions must be nonnegative");
  }

  static SparseMatrix from_triplets(int rows, int cols,
                                    std::span<const Triplet<T>> entries) {
    SparseMatrix a(rows, cols);
    for (const auto& t : entries) {
      if (t.row < 0 || t.row >= rows || t.col < 0 || t.col >= cols)
        throw StructuralError("triplet index (" + std::to_string(t.row) + "," +
                              std::to_string(t.col) + ") outside " +
                              std::to_string(rows) + "x" +
                              std::to_string(cols) + " matrix");
    }
    std::vector<Triplet<T>> sorted(entries.begin(), entries.end());
    std::sort(sorted.begin(), sorted.end(),
              [](const Triplet<T>& x, const Triplet<T>& y) {
                return x.col != y.col ? x.col < y.col : x.row < y.row;
              });
    a.row_idx_.reserve(sorted.size());
    a.values_.reserve(sorted.size());
    for (const auto& t : sorted) {
      if (!a.row_idx_.empty() && a.col_of_last_ == t.col &&
          a.row_idx_.back() == t.row) {
        a.values_.back() += t.value;
      } else {
        for (int c = a.col_of_last_ + 1; c <= t.col; ++c)
          a.col_ptr_[static_cast<size_t>(c)] =
              static_cast<int>(a.row_idx_.size());
        a.col_of_last_ = t.col;
        a.row_idx_.push_back(t.row);
        a.values_.push_back(t.value);
      }
    }
    for (int c = a.col_of_last_ + 1; c <= cols; ++c)
      a.col_ptr_[static_cast<size_t>(c)] = static_cast<int>(a.row_idx_.size());
    a.col_of_last_ = cols;
    return a;
  }

  static SparseMatrix from_triplets(int order,
                                    std::span<const Triplet<T>> entries) {
    return from_triplets(order, order, entries);
  }

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  bool square() const { return rows_ == cols_; }

  /// Side length of a square matrix.
  int order() const {
    if (!square()) throw StructuralError("matrix is not square");
    return rows_;
  }

  std::int64_t nnz() const { return static_cast<std::int64_t>(values_.size()); }

  const std::vector<int>& col_ptr() const { return col_ptr_; }
  const std::vector<int>& row_idx() const { return row_idx_; }
  const std::vector<T>& values() const { return values_; }

  /// y = A x by a column sweep.
  std::vector<T> matvec(std::span<const T> x) const {
    if (static_cast<int>(x.size()) != cols_)
      throw StructuralError("matvec: vector length " +
                            std::to_string(x.size()) + " does not match " +
                            std::to_string(cols_) + " columns");
    std::vector<T> y(static_cast<size_t>(rows_), T{});
    for (int j = 0; j < cols_; ++j) {
      const T xj = x[static_cast<size_t>(j)];
      for (int k = col_ptr_[static_cast<size_t>(j)];
           k < col_ptr_[static_cast<size_t>(j) + 1]; ++k)
        y[static_cast<size_t>(row_idx_[static_cast<size_t>(k)])] +=
            values_[static_cast<size_t>(k)] * xj;
    }
    return y;
  }

  std::vector<Triplet<T>> to_triplets() const {
    std::vector<Triplet<T>> out;
    out.reserve(values_.size());
    for (int j = 0; j < cols_; ++j)
      for (int k = col_ptr_[static_cast<size_t>(j)];
           k < col_ptr_[static_cast<size_t>(j) + 1]; ++k)
        out.push_back({row_idx_[static_cast<size_t>(k)], j,
                       values_[static_cast<size_t>(k)]});
    return out;
  }

  /// Largest entry magnitude; zero for an empty matrix.
  double max_abs() const {
    double m = 0.0;
    for (const T& v : values_) m = std::max(m, std::abs(v));
    return m;
  }

 private:
  int rows_ = 0;
  int cols_ = 0;
  int col_of_last_ = -1;
  std::vector<int> col_ptr_{0};
  std::vector<int> row_idx_;
  std::vector<T> values_;
};

/// Widens a real matrix to complex storage with zero imaginary parts.
inline SparseMatrix<cx> complexify(const SparseMatrix<double>& a) {
  std::vector<Triplet<cx>> t;
  t.reserve(static_cast<size_t>(a.nnz()));
  for (const auto& e : a.to_triplets()) t.push_back({e.row, e.col, cx(e.value, 0.0)});
  return SparseMatrix<cx>::from_triplets(a.rows(), a.cols(), t);
}

}  // namespace penceig
