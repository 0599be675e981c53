#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "errors.hpp"
#include "sparse.hpp"
#include "types.hpp"

namespace penceig {

/// Sparse LU factorization of a square complex matrix with partial
/// pivoting by maximum modulus (left-looking, one column at a time with
/// a sparse triangular solve against the partially built L).
///
/// P A Q = L U with L unit lower triangular.  The row permutation comes
/// from pivoting; the column permutation is either natural order or a
/// static fill-reducing preorder.
class SparseLU {
 public:
  enum class Ordering {
    natural,
    /// Columns sorted by ascending entry count, a cheap static
    /// approximation of minimum-degree preordering.
    min_degree,
  };

  /// A pivot below this fraction of the largest magnitude in its working
  /// column is treated as exact singularity rather than ill conditioning.
  static constexpr double kPivotRel = 1e-14;

  explicit SparseLU(const SparseMatrix<cx>& a,
                    Ordering ordering = Ordering::natural)
      : n_(a.order()), pinv_(n_, -1), q_(n_) {
    std::iota(q_.begin(), q_.end(), 0);
    if (ordering == Ordering::min_degree) {
      const auto& cp = a.col_ptr();
      std::stable_sort(q_.begin(), q_.end(), [&cp](int x, int y) {
        return cp[x + 1] - cp[x] < cp[y + 1] - cp[y];
      });
    }
    factor(a);
  }

  int order() const { return n_; }

  /// Ratio of the largest magnitude produced during elimination to the
  /// largest magnitude of the input.
  double pivot_growth() const { return growth_; }

  /// pinv[original row] = pivot position.
  const std::vector<int>& row_perm() const { return pinv_; }

  /// q[pivot column] = original column.
  const std::vector<int>& col_perm() const { return q_; }

  /// Unit lower factor with row indices in pivot order.
  SparseMatrix<cx> lower() const { return assemble(lp_, li_, lx_); }

  SparseMatrix<cx> upper() const { return assemble(up_, ui_, ux_); }

  /// Solves A x = b through x = Q U^{-1} L^{-1} P b.
  std::vector<cx> solve(std::span<const cx> b) const {
    if (static_cast<int>(b.size()) != n_)
      throw StructuralError("solve: right-hand side length mismatch");
    std::vector<cx> x(n_);
    for (int i = 0; i < n_; ++i) x[pinv_[i]] = b[i];
    for (int j = 0; j < n_; ++j) {
      const cx xj = x[j];
      if (xj == cx{}) continue;
      for (int p = lp_[j] + 1; p < lp_[j + 1]; ++p) x[li_[p]] -= lx_[p] * xj;
    }
    for (int j = n_ - 1; j >= 0; --j) {
      cx& xj = x[j];
      xj /= ux_[up_[j + 1] - 1];
      if (xj == cx{}) continue;
      for (int p = up_[j]; p < up_[j + 1] - 1; ++p) x[ui_[p]] -= ux_[p] * xj;
    }
    std::vector<cx> out(n_);
    for (int j = 0; j < n_; ++j) out[q_[j]] = x[j];
    return out;
  }

 private:
  SparseMatrix<cx> assemble(const std::vector<int>& cp,
                            const std::vector<int>& ri,
                            const std::vector<cx>& vals) const {
    std::vector<Triplet<cx>> t;
    t.reserve(vals.size());
    for (int j = 0; j < n_; ++j)
      for (int p = cp[j]; p < cp[j + 1]; ++p) t.push_back({ri[p], j, vals[p]});
    return SparseMatrix<cx>::from_triplets(n_, t);
  }

  void factor(const SparseMatrix<cx>& a) {
    const auto& ap = a.col_ptr();
    const auto& ai = a.row_idx();
    const auto& ax = a.values();
    const double amax = a.max_abs();

    std::vector<cx> x(n_, cx{});
    std::vector<int> pattern(n_), stack(n_), estack(n_), mark(n_, -1);
    lp_.assign(1, 0);
    up_.assign(1, 0);

    double umax = 0.0;
    for (int k = 0; k < n_; ++k) {
      const int col = q_[k];

      // Reachable rows of L^{-1} A(:,col), depth-first in topological
      // order so elimination can run front to back.
      int top = n_;
      for (int p = ap[col]; p < ap[col + 1]; ++p) {
        int root = ai[p];
        if (mark[root] == k) continue;
        int head = 0;
        stack[0] = root;
        while (head >= 0) {
          const int j = stack[head];
          const int jcol = pinv_[j];
          if (mark[j] != k) {
            mark[j] = k;
            estack[head] = jcol < 0 ? 0 : lp_[jcol];
          }
          bool descend = false;
          if (jcol >= 0) {
            for (int e = estack[head]; e < lp_[jcol + 1]; ++e) {
              const int next = li_[e];
              if (mark[next] != k) {
                estack[head] = e + 1;
                stack[++head] = next;
                descend = true;
                break;
              }
            }
          }
          if (!descend) {
            pattern[--top] = j;
            --head;
          }
        }
      }

      for (int p = top; p < n_; ++p) x[pattern[p]] = cx{};
      for (int p = ap[col]; p < ap[col + 1]; ++p) x[ai[p]] = ax[p];

      // Sparse triangular solve against the columns built so far.
      for (int px = top; px < n_; ++px) {
        const int j = pattern[px];
        const int jcol = pinv_[j];
        if (jcol < 0) continue;
        const cx xj = x[j];
        for (int e = lp_[jcol] + 1; e < lp_[jcol + 1]; ++e)
          x[li_[e]] -= lx_[e] * xj;
      }

      // Partial pivot: maximum modulus among rows without a pivot yet,
      // ties broken toward the smallest original row index.
      int ipiv = -1;
      double best = -1.0;
      double colmax = 0.0;
      for (int p = top; p < n_; ++p) {
        const int i = pattern[p];
        const double t = std::abs(x[i]);
        colmax = std::max(colmax, t);
        if (pinv_[i] < 0 && (t > best || (t == best && i < ipiv))) {
          best = t;
          ipiv = i;
        }
      }
      if (ipiv < 0 || colmax == 0.0 || best <= kPivotRel * colmax) {
        throw SingularShift("matrix is numerically singular at column " +
                            std::to_string(col) + " (pivot " +
                            std::to_string(best < 0 ? 0.0 : best) +
                            ", column magnitude " + std::to_string(colmax) +
                            ")");
      }
      umax = std::max(umax, colmax);

      const cx pivot = x[ipiv];
      pinv_[ipiv] = k;
      li_.push_back(ipiv);
      lx_.push_back(cx(1.0, 0.0));
      for (int p = top; p < n_; ++p) {
        const int i = pattern[p];
        if (pinv_[i] < 0) {
          li_.push_back(i);
          lx_.push_back(x[i] / pivot);
        } else if (i != ipiv) {
          ui_.push_back(pinv_[i]);
          ux_.push_back(x[i]);
        }
        x[i] = cx{};
      }
      ui_.push_back(k);
      ux_.push_back(pivot);
      lp_.push_back(static_cast<int>(li_.size()));
      up_.push_back(static_cast<int>(ui_.size()));
    }

    // L was built with original row indices; renumber into pivot order.
    for (int& i : li_) i = pinv_[i];
    growth_ = amax > 0.0 ? umax / amax : 0.0;
  }

  int n_;
  std::vector<int> pinv_, q_;
  std::vector<int> lp_, li_, up_, ui_;
  std::vector<cx> lx_, ux_;
  double growth_ = 0.0;
};

}  // namespace penceig
