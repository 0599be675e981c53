#pragma once

#include <atomic>
#include <cmath>
#include <exception>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "dense.hpp"
#include "errors.hpp"
#include "mobius.hpp"
#include "pencil.hpp"
#include "types.hpp"

namespace penceig {

struct IterationConfig {
  int r = 4;
  int s = 6;
  int p = 0;
  int t = 4;
  double eps = 1.0;
  double tol = 1e-4;
  int max_iter = 200;
  double dedupe_tol = 1e-6;

  void validate() const {
    if (r < 1) throw StructuralError("config: r must be at least 1");
    if (s < 1) throw StructuralError("config: s must be at least 1");
    if (p < 0) throw StructuralError("config: p must be nonnegative");
    if (t < 1) throw StructuralError("config: t must be at least 1");
    if (!(eps > 0.0 && eps <= 1.0))
      throw StructuralError("config: eps must lie in (0, 1]");
    if (!(tol > 0.0)) throw StructuralError("config: tol must be positive");
    if (max_iter < 1) throw StructuralError("config: max_iter must be at least 1");
    if (!(dedupe_tol > 0.0))
      throw StructuralError("config: dedupe_tol must be positive");
  }
};

enum class TrajectoryStatus { running, converged, stagnated, degenerate };

inline const char* to_string(TrajectoryStatus s) {
  switch (s) {
    case TrajectoryStatus::running: return "running";
    case TrajectoryStatus::converged: return "converged";
    case TrajectoryStatus::stagnated: return "stagnated";
    case TrajectoryStatus::degenerate: return "degenerate";
  }
  return "unknown";
}

struct ConvergenceRecord {
  cx lambda;
  cx mu;
  cx sigma;
  int iterations = 0;
  int lu_count = 0;
  int residual_order = 0;
  int source_shift = 0;
  std::optional<cx> xi;
};

struct TrajectorySummary {
  int shift_index = 0;
  cx initial_shift;
  TrajectoryStatus status = TrajectoryStatus::running;
  int iterations = 0;
  int lu_count = 0;
  int singular_retries = 0;
  std::optional<cx> xi;
};

struct SolveOutcome {
  std::vector<ConvergenceRecord> records;
  std::vector<TrajectorySummary> trajectories;
};

struct SolveOptions {
  std::optional<std::vector<std::vector<cx>>> initial_vectors;
  std::optional<std::vector<cx>> initial_shifts;
  int threads = 1;
};

/// Columns 1..r of the order-n Fourier matrix F(j,k) = e^(j k 2 pi i / n)
/// with 1-based row index j.  Distinct columns with k < n are orthogonal
/// under the conjugate inner product.
inline std::vector<std::vector<cx>> fourier_vectors(int n, int r) {
  if (r < 1 || r > n)
    throw StructuralError("fourier_vectors: need 1 <= r <= n, got r=" +
                          std::to_string(r) + ", n=" + std::to_string(n));
  std::vector<std::vector<cx>> cols(r, std::vector<cx>(n));
  for (int k = 1; k <= r; ++k)
    for (int j = 1; j <= n; ++j)
      cols[k - 1][j - 1] = std::polar(
          1.0, 2.0 * M_PI * (static_cast<double>(j) * k / n));
  return cols;
}

/// s points on the circle of radius eps at angles (2k+1) pi / (2s),
/// k = 0..s-1: strictly inside the open upper half-circle, avoiding the
/// real axis and in particular the degenerate value 1.
inline std::vector<cx> initial_shifts(const IterationConfig& cfg) {
  std::vector<cx> shifts(cfg.s);
  for (int k = 0; k < cfg.s; ++k)
    shifts[k] = std::polar(cfg.eps, (2.0 * k + 1.0) * M_PI / (2.0 * cfg.s));
  return shifts;
}

/// The first r Fourier columns of length n_states embedded at the state
/// indices; algebraic coordinates are exactly zero.
inline std::vector<std::vector<cx>> default_initial_vectors(
    const Pencil& pencil, int r) {
  const auto fc = fourier_vectors(pencil.n_states(), r);
  std::vector<std::vector<cx>> out(r, std::vector<cx>(pencil.order(), cx{}));
  const auto& idx = pencil.state_indices();
  for (int k = 0; k < r; ++k)
    for (size_t j = 0; j < idx.size(); ++j) out[k][idx[j]] = fc[k][j];
  return out;
}

namespace detail {

inline double inf_norm(std::span<const cx> v) {
  double m = 0.0;
  for (const cx& e : v) m = std::max(m, std::abs(e));
  return m;
}

inline double inf_diff(std::span<const cx> a, std::span<const cx> b) {
  double m = 0.0;
  for (size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

inline double two_norm(std::span<const cx> v) {
  double acc = 0.0;
  for (const cx& e : v) acc += std::norm(e);
  return std::sqrt(acc);
}

inline int max_modulus_index(std::span<const cx> v) {
  int imax = 0;
  double best = -1.0;
  for (size_t i = 0; i < v.size(); ++i) {
    const double m = std::abs(v[i]);
    if (m > best) {
      best = m;
      imax = static_cast<int>(i);
    }
  }
  return imax;
}

/// Divides by the max-modulus coordinate (ties: smallest index) and pins
/// that coordinate to exactly 1+0i.  Returns the normalizer.
inline cx normalize_by_max_coordinate(std::vector<cx>& v) {
  const int imax = max_modulus_index(v);
  const cx alpha = v[imax];
  if (alpha == cx{}) return alpha;
  for (cx& e : v) e /= alpha;
  v[imax] = cx(1.0, 0.0);
  return alpha;
}

inline void sup_normalize(std::vector<cx>& v) {
  const double m = inf_norm(v);
  if (m == 0.0) return;
  for (cx& e : v) e /= m;
}

}  // namespace detail

/// Power preconditioning: multiplies each vector p times by C, projecting
/// to the state space and renormalizing to unit sup norm after every
/// multiplication.  p=0 returns the input unchanged apart from the
/// initial normalization.
inline std::vector<std::vector<cx>> precondition(
    CayleyOperator& op, std::vector<std::vector<cx>> vectors, int p) {
  for (auto& v : vectors) detail::sup_normalize(v);
  for (int step = 0; step < p; ++step)
    for (auto& v : vectors) {
      v = op.pencil().project_state_space(op.apply_c(v));
      detail::sup_normalize(v);
    }
  return vectors;
}

/// Pencil eigenvalue whose image under the inverse Cayley extension is
/// mu: lambda = (mu conj(sigma) + sigma) / (1 - mu).  mu = 1 is the image
/// of the infinite eigenvalue.
inline ExtendedComplex recover_lambda(cx mu, cx sigma) {
  if (mu == cx(1.0, 0.0)) return ExtendedComplex::infinity();
  return (mu * std::conj(sigma) + sigma) / (1.0 - mu);
}

/// floor(log10 ||(C^{-1} - mu I) x||_2) after normalizing x to unit
/// 2-norm.  An exactly zero residual reports the double-precision
/// exponent floor.
inline int residual_order(CayleyOperator& op, cx mu, std::span<const cx> x) {
  const double nrm = detail::two_norm(x);
  if (nrm == 0.0) throw StructuralError("residual_order: zero vector");
  std::vector<cx> xu(x.begin(), x.end());
  for (cx& e : xu) e /= nrm;
  std::vector<cx> y = op.apply_c_inv(xu);
  for (size_t i = 0; i < y.size(); ++i) y[i] -= mu * xu[i];
  const double r = detail::two_norm(y);
  if (r == 0.0) return -324;
  return static_cast<int>(std::floor(std::log10(r)));
}

namespace detail {

struct TrajectoryResult {
  TrajectorySummary summary;
  std::optional<ConvergenceRecord> record;
};

/// One shift-invert trajectory.  With xi present the iteration
/// operator is the deflated one and the shift update uses the deflated
/// formula.
inline TrajectoryResult run_trajectory(CayleyOperator& op,
                                       const IterationConfig& cfg,
                                       int shift_index, cx mu0,
                                       std::vector<std::vector<cx>> w,
                                       std::optional<cx> xi) {
  static constexpr double kPole = 1e-12;
  const int r = static_cast<int>(w.size());
  TrajectoryResult out;
  out.summary.shift_index = shift_index;
  out.summary.initial_shift = mu0;
  out.summary.xi = xi;

  for (auto& v : w)
    if (normalize_by_max_coordinate(v) == cx{}) {
      out.summary.status = TrajectoryStatus::stagnated;
      return out;
    }

  cx mu = mu0;
  std::set<std::pair<double, double>> shifts_used;
  std::vector<std::vector<cx>> u(r);
  std::vector<cx> alphas(r);
  std::vector<double> deltas(r);

  bool retried = false;
  int j = 1;
  while (j <= cfg.max_iter) {
    try {
      shifts_used.insert({mu.real(), mu.imag()});
      for (int i = 0; i < r; ++i) {
        u[i] = xi ? op.apply_deflated(mu, *xi, w[i])
                  : op.shift_invert_c_inv(mu, w[i]);
        u[i] = op.pencil().project_state_space(u[i]);
      }
    } catch (const SingularShift&) {
      shifts_used.erase({mu.real(), mu.imag()});
      if (retried) {
        out.summary.status = TrajectoryStatus::degenerate;
        break;
      }
      mu += cx(1e-8, 1e-8);
      ++out.summary.singular_retries;
      retried = true;
      continue;
    } catch (const DegenerateShift&) {
      out.summary.status = TrajectoryStatus::degenerate;
      break;
    }
    retried = false;

    bool dead = false;
    for (int i = 0; i < r; ++i) {
      alphas[i] = normalize_by_max_coordinate(u[i]);
      if (alphas[i] == cx{}) dead = true;
      deltas[i] = inf_diff(u[i], w[i]);
    }
    if (dead) {
      out.summary.status = TrajectoryStatus::stagnated;
      break;
    }

    int q = 0;
    for (int i = 1; i < r; ++i)
      if (deltas[i] < deltas[q]) q = i;

    w.swap(u);
    out.summary.iterations = j;

    const auto updated_shift = [&](cx alpha) -> std::optional<cx> {
      if (xi) {
        if (std::abs(alpha - 1.0) < kPole) return std::nullopt;
        return (mu * alpha - *xi) / (alpha - 1.0);
      }
      return mu + 1.0 / alpha;
    };

    if (deltas[q] < cfg.tol) {
      const auto final_mu = updated_shift(alphas[q]);
      if (!final_mu) {
        out.summary.status = TrajectoryStatus::stagnated;
        break;
      }
      const ExtendedComplex lambda = recover_lambda(*final_mu, op.sigma());
      if (lambda.is_infinite() ||
          std::abs(*final_mu - 1.0) < CayleyOperator::kDegenerateBand) {
        out.summary.status = TrajectoryStatus::degenerate;
        break;
      }
      ConvergenceRecord rec;
      rec.lambda = lambda.value();
      rec.mu = *final_mu;
      rec.sigma = op.sigma();
      rec.iterations = j;
      rec.lu_count = static_cast<int>(shifts_used.size());
      rec.residual_order = residual_order(op, *final_mu, w[q]);
      rec.source_shift = shift_index;
      rec.xi = xi;
      out.record = rec;
      out.summary.status = TrajectoryStatus::converged;
      out.summary.lu_count = rec.lu_count;
      break;
    }

    if (j % cfg.t == 0) {
      const auto mu_new = updated_shift(alphas[q]);
      if (!mu_new) {
        out.summary.status = TrajectoryStatus::stagnated;
        break;
      }
      if (std::abs(*mu_new - 1.0) < CayleyOperator::kDegenerateBand) {
        out.summary.status = TrajectoryStatus::degenerate;
        break;
      }
      mu = *mu_new;
    }
    ++j;
  }

  if (out.summary.status == TrajectoryStatus::running)
    out.summary.status = TrajectoryStatus::stagnated;
  if (out.summary.lu_count == 0)
    out.summary.lu_count = static_cast<int>(shifts_used.size());
  return out;
}

inline std::vector<std::vector<cx>> starting_vectors(CayleyOperator& op,
                                                     const IterationConfig& cfg,
                                                     const SolveOptions& opts) {
  std::vector<std::vector<cx>> w0 =
      opts.initial_vectors ? *opts.initial_vectors
                           : default_initial_vectors(op.pencil(), cfg.r);
  if (static_cast<int>(w0.size()) != cfg.r)
    throw StructuralError("initial vector count does not match r");
  for (auto& v : w0) {
    if (static_cast<int>(v.size()) != op.pencil().order())
      throw StructuralError("initial vector length does not match pencil order");
    v = op.pencil().project_state_space(v);
  }
  return precondition(op, std::move(w0), cfg.p);
}

inline std::vector<cx> trajectory_shifts(const IterationConfig& cfg,
                                         const SolveOptions& opts) {
  return opts.initial_shifts ? *opts.initial_shifts : initial_shifts(cfg);
}

}  // namespace detail

/// Preconditioned shift-invert search: one trajectory per initial shift,
/// each iterating (C^{-1} - mu I)^{-1} on r vectors with max-coordinate
/// normalization, updating mu from the steadiest vector's normalizer
/// every t iterations, and emitting one record on convergence.
/// Trajectories are independent; results merge by ascending shift index.
inline SolveOutcome algorithm_one(CayleyOperator& op,
                                  const IterationConfig& cfg,
                                  const SolveOptions& opts = {}) {
  cfg.validate();
  const std::vector<std::vector<cx>> w0 = detail::starting_vectors(op, cfg, opts);
  const std::vector<cx> shifts = detail::trajectory_shifts(cfg, opts);
  const int n_traj = static_cast<int>(shifts.size());

  std::vector<detail::TrajectoryResult> results(n_traj);
  const int threads = std::max(1, std::min(opts.threads, n_traj));
  if (threads == 1) {
    for (int k = 0; k < n_traj; ++k)
      results[k] = detail::run_trajectory(op, cfg, k, shifts[k], w0,
                                          std::nullopt);
  } else {
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(threads);
    for (int tix = 0; tix < threads; ++tix)
      pool.emplace_back([&, tix] {
        try {
          for (;;) {
            const int k = next.fetch_add(1);
            if (k >= n_traj) return;
            results[k] = detail::run_trajectory(op, cfg, k, shifts[k], w0,
                                                std::nullopt);
          }
        } catch (...) {
          errors[tix] = std::current_exception();
        }
      });
    for (auto& th : pool) th.join();
    for (auto& e : errors)
      if (e) std::rethrow_exception(e);
  }

  SolveOutcome out;
  for (auto& res : results) {
    out.trajectories.push_back(res.summary);
    if (res.record) out.records.push_back(*res.record);
  }
  return out;
}

/// Möbius deflation: the first trajectory runs plain; each later
/// trajectory multiplies iterates by (C^{-1} - xi I), with xi the mu of
/// the most recent converged record, inhibiting reconvergence to it.
/// The xi chain makes the schedule sequential.
inline SolveOutcome algorithm_two(CayleyOperator& op,
                                  const IterationConfig& cfg,
                                  const SolveOptions& opts = {}) {
  cfg.validate();
  const std::vector<std::vector<cx>> w0 = detail::starting_vectors(op, cfg, opts);
  const std::vector<cx> shifts = detail::trajectory_shifts(cfg, opts);

  SolveOutcome out;
  std::optional<cx> xi;
  for (int k = 0; k < static_cast<int>(shifts.size()); ++k) {
    auto res = detail::run_trajectory(op, cfg, k, shifts[k], w0,
                                      k == 0 ? std::nullopt : xi);
    out.trajectories.push_back(res.summary);
    if (res.record) {
      out.records.push_back(*res.record);
      xi = res.record->mu;
    }
  }
  return out;
}

/// Converged eigenvalues with near-duplicates (within
/// dedupe_tol * (1 + |lambda|)) coalesced, first occurrence kept.
inline std::vector<cx> distinct_lambdas(
    const std::vector<ConvergenceRecord>& records, double dedupe_tol) {
  std::vector<cx> out;
  for (const auto& rec : records) {
    bool dup = false;
    for (const cx& seen : out)
      if (std::abs(rec.lambda - seen) <= dedupe_tol * (1.0 + std::abs(seen))) {
        dup = true;
        break;
      }
    if (!dup) out.push_back(rec.lambda);
  }
  return out;
}

struct SubspaceConfig {
  cx a;
  int block = 8;
  int ritz_period = 4;
  double tol = 1e-5;
  int max_cycles = 100;

  void validate() const {
    if (block < 1) throw StructuralError("subspace: block must be at least 1");
    if (ritz_period < 1)
      throw StructuralError("subspace: ritz_period must be at least 1");
    if (!(tol > 0.0)) throw StructuralError("subspace: tol must be positive");
    if (max_cycles < 1)
      throw StructuralError("subspace: max_cycles must be at least 1");
  }
};

/// Shift-invert simultaneous iteration on S = L (J - aL)^{-1} L with
/// periodic Rayleigh-Ritz acceleration: each cycle applies S ritz_period
/// times (normalizing after each application, the last kept raw as W),
/// solves the projected problem B = G^{-1} H with G = (LZ)^H (LZ) and
/// H = (LZ)^H W, recombines the block through the Ritz vectors, and
/// freezes columns whose change drops below tol, recording
/// lambda = a + 1/theta.  Frozen columns leave the solve set and later
/// Ritz steps orthogonalize the active block against them.
inline SolveOutcome subspace_iteration(const Pencil& pencil,
                                       const SubspaceConfig& cfg) {
  cfg.validate();
  if (cfg.block > pencil.n_states())
    throw StructuralError("subspace: block exceeds state-space dimension");

  const SparseLU lu(pencil.assemble_shifted(cfg.a));
  const auto apply_s = [&](const std::vector<cx>& v) {
    return pencil.apply_l(lu.solve(pencil.apply_l(v)));
  };

  struct Column {
    int id;
    std::vector<cx> z;
    std::vector<cx> prev;
  };
  std::vector<Column> active;
  {
    auto init = default_initial_vectors(pencil, cfg.block);
    for (int k = 0; k < cfg.block; ++k) {
      Column col{k, std::move(init[k]), {}};
      detail::normalize_by_max_coordinate(col.z);
      col.prev = col.z;
      active.push_back(std::move(col));
    }
  }

  std::vector<std::vector<cx>> frozen_unit;
  SolveOutcome out;
  std::vector<TrajectorySummary> summaries(cfg.block);
  for (int k = 0; k < cfg.block; ++k) {
    summaries[k].shift_index = k;
    summaries[k].initial_shift = cfg.a;
    summaries[k].status = TrajectoryStatus::running;
    summaries[k].lu_count = 1;
  }

  const auto orthogonalize = [&](std::vector<cx>& v) {
    for (const auto& f : frozen_unit) {
      cx proj{};
      for (size_t i = 0; i < v.size(); ++i) proj += std::conj(f[i]) * v[i];
      for (size_t i = 0; i < v.size(); ++i) v[i] -= proj * f[i];
    }
  };

  int cycle = 0;
  while (!active.empty() && cycle < cfg.max_cycles) {
    ++cycle;

    for (int step = 0; step + 1 < cfg.ritz_period; ++step)
      for (auto& col : active) {
        col.z = apply_s(col.z);
        if (detail::normalize_by_max_coordinate(col.z) == cx{}) {
          summaries[col.id].status = TrajectoryStatus::stagnated;
        }
      }
    std::erase_if(active, [&](const Column& c) {
      return summaries[c.id].status == TrajectoryStatus::stagnated;
    });
    if (active.empty()) break;

    for (auto& col : active) orthogonalize(col.z);
    std::vector<std::vector<cx>> w(active.size());
    for (size_t i = 0; i < active.size(); ++i) w[i] = apply_s(active[i].z);

    // The projected problem; on a rank-deficient basis the trailing
    // column is dropped and the cycle's Ritz step retried.
    RitzResult ritz;
    for (;;) {
      const int b = static_cast<int>(active.size());
      DenseMatrix<cx> g(b), h(b);
      std::vector<std::vector<cx>> lz(b);
      for (int i = 0; i < b; ++i) lz[i] = pencil.apply_l(active[i].z);
      for (int i = 0; i < b; ++i)
        for (int jj = 0; jj < b; ++jj) {
          cx gij{}, hij{};
          for (int row = 0; row < pencil.order(); ++row) {
            gij += std::conj(lz[i][row]) * lz[jj][row];
            hij += std::conj(lz[i][row]) * w[jj][row];
          }
          g.at(i, jj) = gij;
          h.at(i, jj) = hij;
        }
      try {
        ritz = ritz_decompose(g, h);
        break;
      } catch (const RankDeficientBasis&) {
        summaries[active.back().id].status = TrajectoryStatus::stagnated;
        active.pop_back();
        w.pop_back();
        if (active.empty()) break;
      }
    }
    if (active.empty()) break;

    const int b = static_cast<int>(active.size());
    std::vector<Column> next;
    for (int jj = 0; jj < b; ++jj) {
      std::vector<cx> znew(pencil.order(), cx{});
      for (int i = 0; i < b; ++i) {
        const cx y = ritz.vectors.at(i, jj);
        if (y == cx{}) continue;
        for (int row = 0; row < pencil.order(); ++row)
          znew[row] += w[i][row] * y;
      }
      Column col{active[jj].id, std::move(znew), {}};
      if (detail::normalize_by_max_coordinate(col.z) == cx{}) {
        summaries[col.id].status = TrajectoryStatus::stagnated;
        continue;
      }
      const double delta = detail::inf_diff(col.z, active[jj].prev);
      summaries[col.id].iterations = cycle;
      const cx theta = ritz.values[jj];
      if (delta < cfg.tol && theta != cx{}) {
        ConvergenceRecord rec;
        rec.mu = theta;
        rec.sigma = cfg.a;
        rec.lambda = cfg.a + 1.0 / theta;
        rec.iterations = cycle;
        rec.lu_count = 1;
        rec.source_shift = col.id;
        {
          std::vector<cx> x = col.z;
          const double nrm = detail::two_norm(x);
          for (cx& e : x) e /= nrm;
          std::vector<cx> sx = apply_s(x);
          for (size_t row = 0; row < sx.size(); ++row)
            sx[row] -= theta * x[row];
          const double res = detail::two_norm(sx);
          rec.residual_order =
              (res == 0.0) ? -324
                           : static_cast<int>(std::floor(std::log10(res)));
        }
        out.records.push_back(rec);
        summaries[col.id].status = TrajectoryStatus::converged;

        std::vector<cx> f = col.z;
        const double nrm = detail::two_norm(f);
        for (cx& e : f) e /= nrm;
        frozen_unit.push_back(std::move(f));
      } else {
        col.prev = col.z;
        next.push_back(std::move(col));
      }
    }
    active = std::move(next);
  }

  for (auto& col : active)
    summaries[col.id].status = TrajectoryStatus::stagnated;
  for (auto& s : summaries) {
    if (s.status == TrajectoryStatus::running)
      s.status = TrajectoryStatus::stagnated;
    out.trajectories.push_back(s);
  }
  return out;
}

}  // namespace penceig
