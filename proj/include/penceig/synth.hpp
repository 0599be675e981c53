#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "dense.hpp"
#include "errors.hpp"
#include "lu.hpp"
#include "pencil.hpp"
#include "sparse.hpp"
#include "types.hpp"

namespace penceig {

/// Deterministic splittable generator; identical seeds give identical
/// streams on every platform, which the standard-library distributions
/// do not guarantee.
class SplitMix64 {
 public:
  explicit SplitMix64(uint64_t seed) : state_(seed) {}

  uint64_t next() {
    uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  /// Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  int below(int n) { return static_cast<int>(next() % static_cast<uint64_t>(n)); }

 private:
  uint64_t state_;
};

/// Recipe for a synthetic pencil with a planted spectrum.  Conjugates of
/// non-real planted values are completed automatically.  With exact set,
/// every generated quantity is quantized to the dyadic grid 2^-6 and the
/// assembly uses only exactly representable operations, so the returned
/// spectrum equals the true spectrum of the pencil bit for bit (planted
/// values are quantized too).
struct PlantSpec {
  std::vector<cx> planted;
  int n_states = 60;
  int m_algebraic = 40;
  double density = 0.05;
  uint64_t seed = 1;
  double left_fill_lo = -8.0;
  double left_fill_hi = -0.5;
  bool exact = false;
};

struct PlantedPencil {
  Pencil pencil;
  std::vector<cx> spectrum;
};

namespace detail {

inline double quantize64(double v) { return std::round(v * 64.0) / 64.0; }

}  // namespace detail

/// Builds a pencil whose finite eigenvalues are exactly the returned
/// spectrum: a block-diagonal core (2x2 rotation-scaled blocks per
/// conjugate pair, 1x1 per real value) is mixed by unit-diagonal
/// elementary similarity transforms, coupled to an algebraic part
/// through sparse J2, J3 and a diagonally dominant J4 with the Schur
/// compensation J1 = core + J2 J4^{-1} J3, and interleaved by a seeded
/// shuffle.  L is 0/1 diagonal.
inline PlantedPencil planted_pencil(const PlantSpec& spec) {
  const int n = spec.n_states;
  const int m = spec.m_algebraic;
  const int order = n + m;
  if (n < 1) throw StructuralError("plant: need at least one state");
  if (m < 0) throw StructuralError("plant: negative algebraic count");
  if (!(spec.density > 0.0 && spec.density <= 1.0))
    throw StructuralError("plant: density must lie in (0, 1]");
  if (spec.density * order * order < order)
    throw StructuralError("plant: density " + std::to_string(spec.density) +
                          " infeasible for order " + std::to_string(order));
  if (!(spec.left_fill_lo <= spec.left_fill_hi) || !(spec.left_fill_hi < 0.0))
    throw StructuralError("plant: filler box must satisfy lo <= hi < 0");

  SplitMix64 rng(spec.seed);
  const auto q = [&](double v) {
    return spec.exact ? detail::quantize64(v) : v;
  };

  // Conjugate completion with exact pairing.
  std::vector<cx> planted;
  for (cx v : spec.planted) {
    const cx vq = cx(q(v.real()), q(v.imag()));
    planted.push_back(vq);
    if (vq.imag() != 0.0) {
      bool has_conj = false;
      for (cx u : spec.planted)
        if (cx(q(u.real()), q(u.imag())) == std::conj(vq)) has_conj = true;
      if (!has_conj) planted.push_back(std::conj(vq));
    }
  }

  // Block list: (re, im) with im > 0 for a 2x2 block, im = 0 for 1x1.
  std::vector<cx> blocks;
  double max_mod = 0.0, max_im = 0.0;
  for (cx v : planted) {
    max_mod = std::max(max_mod, std::abs(v));
    max_im = std::max(max_im, std::abs(v.imag()));
    if (v.imag() > 0.0)
      blocks.push_back(v);
    else if (v.imag() == 0.0)
      blocks.push_back(v);
  }
  int used = 0;
  for (cx b : blocks) used += (b.imag() > 0.0) ? 2 : 1;
  if (used > n)
    throw StructuralError("plant: " + std::to_string(used) +
                          " planted dimensions exceed n_states " +
                          std::to_string(n));

  // Fillers: a few large-modulus negative reals (the cluster that maps
  // near the spurious value), then left-half-plane conjugate pairs, then
  // a lone real if a slot remains.
  const double scale = std::max(1.0, max_mod);
  const double imscale = std::max(1.0, 1.6 * max_im);
  int remaining = n - used;
  int big_reals = std::min(3, remaining);
  while (big_reals-- > 0) {
    blocks.push_back(cx(q(-rng.uniform(5.0, 50.0) * scale), 0.0));
    --remaining;
  }
  while (remaining >= 2) {
    const double re = q(rng.uniform(spec.left_fill_lo, spec.left_fill_hi));
    double im = q(rng.uniform(0.05 * imscale, imscale));
    if (im <= 0.0) im = spec.exact ? 1.0 / 64.0 : 0.05 * imscale;
    blocks.push_back(cx(re, im));
    remaining -= 2;
  }
  if (remaining == 1) {
    double re = q(rng.uniform(spec.left_fill_lo, spec.left_fill_hi));
    if (re >= 0.0) re = spec.exact ? -1.0 / 64.0 : spec.left_fill_hi;
    blocks.push_back(cx(re, 0.0));
  }

  std::vector<cx> spectrum;
  DenseMatrix<double> core(n);
  {
    int pos = 0;
    for (cx b : blocks) {
      if (b.imag() > 0.0) {
        core.at(pos, pos) = b.real();
        core.at(pos, pos + 1) = b.imag();
        core.at(pos + 1, pos) = -b.imag();
        core.at(pos + 1, pos + 1) = b.real();
        spectrum.push_back(b);
        spectrum.push_back(std::conj(b));
        pos += 2;
      } else {
        core.at(pos, pos) = b.real();
        spectrum.push_back(b);
        pos += 1;
      }
    }
  }

  // Unit-diagonal elementary similarities A <- (I + c e_i e_j^T) A
  // (I - c e_i e_j^T); row update then column update is the exact
  // expansion.  The exact mode keeps c a small power of two so no
  // multiplication rounds.
  const int n_transforms = spec.exact ? 4 : std::max(4, n / 10);
  for (int tix = 0; tix < n_transforms && n > 1; ++tix) {
    const int i = rng.below(n);
    int j = rng.below(n - 1);
    if (j >= i) ++j;
    double c;
    if (spec.exact) {
      c = std::ldexp(1.0, -(1 + rng.below(2)));
      if (rng.next() & 1) c = -c;
    } else {
      c = rng.uniform(-0.5, 0.5);
    }
    for (int col = 0; col < n; ++col) core.at(i, col) += c * core.at(j, col);
    for (int row = 0; row < n; ++row) core.at(row, j) -= c * core.at(row, i);
  }

  // Coupling blocks.  J4 is diagonally dominant (pure power-of-two
  // diagonal in exact mode so its solves divide exactly).
  std::vector<double> j4_diag(m);
  std::vector<Triplet<double>> j4_off;
  std::vector<std::vector<std::pair<int, double>>> j2_cols(m);
  std::vector<std::vector<std::pair<int, double>>> j3_rows(m);
  if (m > 0) {
    for (int k = 0; k < m; ++k)
      j4_diag[k] = spec.exact ? std::ldexp(1.0, 1 + rng.below(2))
                              : rng.uniform(2.0, 4.0);
    if (!spec.exact) {
      std::vector<int> row_load(m, 0);
      const int want = m / 2;
      for (int k = 0; k < want; ++k) {
        const int r = rng.below(m);
        int c = rng.below(m - 1);
        if (c >= r) ++c;
        if (row_load[r] >= 2) continue;
        ++row_load[r];
        j4_off.push_back({r, c, rng.uniform(-0.5, 0.5)});
      }
    }
    const int coupling = static_cast<int>(spec.density * n * m);
    for (int k = 0; k < coupling; ++k) {
      const double v2 = q(rng.uniform(-1.0, 1.0));
      const double v3 = q(rng.uniform(-1.0, 1.0));
      if (v2 != 0.0) j2_cols[rng.below(m)].push_back({rng.below(n), v2});
      if (v3 != 0.0) j3_rows[rng.below(m)].push_back({rng.below(n), v3});
    }
  }

  // Schur compensation J1 = core + J2 J4^{-1} J3 keeps the state matrix
  // equal to the mixed core.
  DenseMatrix<double> j1 = core;
  if (m > 0) {
    std::vector<Triplet<cx>> j4t;
    for (int k = 0; k < m; ++k) j4t.push_back({k, k, cx(j4_diag[k], 0.0)});
    for (const auto& t : j4_off) j4t.push_back({t.row, t.col, cx(t.value, 0.0)});
    const SparseLU j4_lu(SparseMatrix<cx>::from_triplets(m, j4t));

    std::vector<std::vector<std::pair<int, double>>> j3_cols(n);
    for (int r = 0; r < m; ++r)
      for (const auto& [col, v] : j3_rows[r]) j3_cols[col].push_back({r, v});

    std::vector<cx> rhs(m);
    for (int col = 0; col < n; ++col) {
      if (j3_cols[col].empty()) continue;
      std::fill(rhs.begin(), rhs.end(), cx{});
      for (const auto& [r, v] : j3_cols[col]) rhs[r] += v;
      const std::vector<cx> x = j4_lu.solve(rhs);
      for (int k = 0; k < m; ++k) {
        const double xk = x[k].real();
        if (xk == 0.0) continue;
        for (const auto& [row, v2] : j2_cols[k]) j1.at(row, col) += v2 * xk;
      }
    }
  }

  // Interleave state and algebraic coordinates by a seeded shuffle.
  std::vector<int> perm(order);
  for (int i = 0; i < order; ++i) perm[i] = i;
  for (int i = order - 1; i >= 1; --i) {
    const int j = rng.below(i + 1);
    std::swap(perm[i], perm[j]);
  }

  std::vector<Triplet<double>> trips;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (j1.at(i, j) != 0.0) trips.push_back({perm[i], perm[j], j1.at(i, j)});
  for (int k = 0; k < m; ++k) {
    for (const auto& [row, v] : j2_cols[k])
      trips.push_back({perm[row], perm[n + k], v});
    for (const auto& [col, v] : j3_rows[k])
      trips.push_back({perm[n + k], perm[col], v});
    trips.push_back({perm[n + k], perm[n + k], j4_diag[k]});
  }
  for (const auto& t : j4_off)
    trips.push_back({perm[n + t.row], perm[n + t.col], t.value});

  std::vector<double> l_diag(order, 0.0);
  for (int i = 0; i < n; ++i) l_diag[perm[i]] = 1.0;

  return PlantedPencil{
      Pencil(SparseMatrix<double>::from_triplets(order, trips),
             std::move(l_diag)),
      std::move(spectrum)};
}

}  // namespace penceig
