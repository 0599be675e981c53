#pragma once

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "dense.hpp"
#include "errors.hpp"
#include "lu.hpp"
#include "sparse.hpp"
#include "types.hpp"

namespace penceig {

/// Matrix pencil (J, L) with J sparse real of order n+m and L diagonal of
/// rank n.  Coordinates with a nonzero L entry are state variables, the
/// rest are algebraic.  Immutable after construction.
class Pencil {
 public:
  Pencil(SparseMatrix<double> j, std::vector<double> l_diag)
      : j_(std::move(j)), l_diag_(std::move(l_diag)) {
    const int n = j_.order();
    if (static_cast<int>(l_diag_.size()) != n)
      throw StructuralError("pencil: diagonal length " +
                            std::to_string(l_diag_.size()) +
                            " does not match matrix order " +
                            std::to_string(n));
    for (int i = 0; i < n; ++i) {
      if (l_diag_[i] != 0.0)
        state_idx_.push_back(i);
      else
        algebraic_idx_.push_back(i);
    }
    if (state_idx_.empty())
      throw StructuralError("pencil: L has rank zero, no state variables");
  }

  int order() const { return j_.order(); }
  int n_states() const { return static_cast<int>(state_idx_.size()); }
  int n_algebraic() const { return static_cast<int>(algebraic_idx_.size()); }

  const SparseMatrix<double>& j() const { return j_; }
  const std::vector<double>& l_diag() const { return l_diag_; }
  const std::vector<int>& state_indices() const { return state_idx_; }
  const std::vector<int>& algebraic_indices() const { return algebraic_idx_; }

  /// Componentwise product with the diagonal of L; algebraic coordinates
  /// come out exactly zero.
  std::vector<cx> apply_l(std::span<const cx> v) const {
    if (static_cast<int>(v.size()) != order())
      throw StructuralError("apply_l: length mismatch");
    std::vector<cx> out(v.size());
    for (size_t i = 0; i < v.size(); ++i)
      out[i] = (l_diag_[i] != 0.0) ? l_diag_[i] * v[i] : cx{};
    return out;
  }

  /// Zeroes the algebraic coordinates, leaving state coordinates
  /// untouched.  Idempotent; identity on range(L).
  std::vector<cx> project_state_space(std::span<const cx> v) const {
    if (static_cast<int>(v.size()) != order())
      throw StructuralError("project_state_space: length mismatch");
    std::vector<cx> out(v.begin(), v.end());
    for (int i : algebraic_idx_) out[i] = cx{};
    return out;
  }

  /// Assembles J - aL as a complex sparse matrix.  The sparsity pattern is
  /// the union of J's pattern and the state diagonal positions, so the
  /// symbolic structure is identical for every shift.
  SparseMatrix<cx> assemble_shifted(cx a) const {
    std::vector<Triplet<cx>> trips;
    trips.reserve(j_.nnz() + state_idx_.size());
    for (const auto& t : j_.to_triplets())
      trips.push_back({t.row, t.col, cx(t.value, 0.0)});
    for (int i : state_idx_) trips.push_back({i, i, -a * l_diag_[i]});
    return SparseMatrix<cx>::from_triplets(order(), trips);
  }

  /// Dense order-n matrix D^{-1}(J1 - J2 J4^{-1} J3) under the
  /// state/algebraic split, where D holds the nonzero part of L.  Its
  /// eigenvalues are exactly the finite eigenvalues of the pencil.
  /// Oracle-only: refuses orders above the cap.
  DenseMatrix<double> dense_state_matrix(int cap = 500) const {
    const int n = n_states();
    const int m = n_algebraic();
    if (order() > cap)
      throw StructuralError("dense_state_matrix: order " +
                            std::to_string(order()) + " exceeds cap " +
                            std::to_string(cap));

    std::vector<int> spos(order(), -1), apos(order(), -1);
    for (int p = 0; p < n; ++p) spos[state_idx_[p]] = p;
    for (int p = 0; p < m; ++p) apos[algebraic_idx_[p]] = p;

    // Split the columns of J into the four blocks of the permuted form;
    // J1 and J3 are read per state column, J2 per algebraic column.
    DenseMatrix<double> a(n);
    std::vector<std::vector<double>> j3_cols(n, std::vector<double>(m, 0.0));
    const auto& cp = j_.col_ptr();
    const auto& ri = j_.row_idx();
    const auto& vals = j_.values();
    for (int p = 0; p < n; ++p) {
      const int c = state_idx_[p];
      for (int q = cp[c]; q < cp[c + 1]; ++q) {
        const int r = ri[q];
        if (spos[r] >= 0)
          a.at(spos[r], p) += vals[q];
        else
          j3_cols[p][apos[r]] += vals[q];
      }
    }

    if (m > 0) {
      std::vector<Triplet<cx>> j4t;
      std::vector<std::vector<std::pair<int, double>>> j2_cols(m);
      for (int p = 0; p < m; ++p) {
        const int c = algebraic_idx_[p];
        for (int q = cp[c]; q < cp[c + 1]; ++q) {
          const int r = ri[q];
          if (apos[r] >= 0)
            j4t.push_back({apos[r], p, cx(vals[q], 0.0)});
          else
            j2_cols[p].push_back({spos[r], vals[q]});
        }
      }
      const SparseLU j4_lu(SparseMatrix<cx>::from_triplets(m, j4t));
      std::vector<cx> rhs(m);
      for (int p = 0; p < n; ++p) {
        for (int q = 0; q < m; ++q) rhs[q] = cx(j3_cols[p][q], 0.0);
        const std::vector<cx> x = j4_lu.solve(rhs);
        for (int q = 0; q < m; ++q) {
          const double xq = x[q].real();
          if (xq == 0.0) continue;
          for (const auto& [r, v] : j2_cols[q]) a.at(r, p) -= v * xq;
        }
      }
    }

    for (int p = 0; p < n; ++p) {
      const double d = l_diag_[state_idx_[p]];
      if (d != 1.0)
        for (int q = 0; q < n; ++q) a.at(p, q) /= d;
    }
    return a;
  }

 private:
  SparseMatrix<double> j_;
  std::vector<double> l_diag_;
  std::vector<int> state_idx_;
  std::vector<int> algebraic_idx_;
};

/// Reads the diagonal of L from a text file: one "index value" line per
/// nonzero entry with 1-based indices; blank lines and lines starting
/// with '#' or '%' are skipped.  Unlisted indices are algebraic (zero).
inline std::vector<double> read_l_diag(const std::string& path, int order) {
  std::ifstream in(path);
  if (!in) throw ParseError(path, 0, "cannot open file");
  std::vector<double> diag(order, 0.0);
  std::vector<bool> seen(order, false);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    size_t pos = line.find_first_not_of(" \t\r");
    if (pos == std::string::npos) continue;
    if (line[pos] == '#' || line[pos] == '%') continue;
    std::istringstream ls(line);
    long long idx;
    double value;
    if (!(ls >> idx >> value))
      throw ParseError(path, lineno, "expected \"index value\"");
    std::string trailing;
    if (ls >> trailing)
      throw ParseError(path, lineno, "unexpected trailing token \"" +
                                         trailing + "\"");
    if (idx < 1 || idx > order)
      throw ParseError(path, lineno, "index " + std::to_string(idx) +
                                         " out of range [1, " +
                                         std::to_string(order) + "]");
    if (seen[idx - 1])
      throw ParseError(path, lineno, "duplicate index " + std::to_string(idx));
    if (value == 0.0)
      throw ParseError(path, lineno, "explicit zero entry at index " +
                                         std::to_string(idx));
    seen[idx - 1] = true;
    diag[idx - 1] = value;
  }
  return diag;
}

inline void write_l_diag(const std::vector<double>& diag,
                         const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ParseError(path, 0, "cannot open file for writing");
  char buf[64];
  for (size_t i = 0; i < diag.size(); ++i) {
    if (diag[i] == 0.0) continue;
    std::snprintf(buf, sizeof(buf), "%zu %.17g\n", i + 1, diag[i]);
    out << buf;
  }
  if (!out) throw ParseError(path, 0, "write failed");
}

}  // namespace penceig
