#pragma once

#include <atomic>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "lu.hpp"
#include "pencil.hpp"
#include "types.hpp"

namespace penceig {

/// Parameters of the scalar map s -> k (s + conj(beta)) / (s - alpha).
struct MobiusParams {
  cx k;
  cx alpha;
  cx beta;

  MobiusParams(cx k_, cx alpha_, cx beta_) : k(k_), alpha(alpha_), beta(beta_) {
    if (k == cx{}) throw StructuralError("mobius: k must be nonzero");
    if (alpha + std::conj(beta) == cx{})
      throw StructuralError("mobius: alpha + conj(beta) must be nonzero");
  }
};

inline ExtendedComplex mobius_map(const MobiusParams& p, ExtendedComplex s) {
  if (s.is_infinite()) return p.k;
  if (s.value() == p.alpha) return ExtendedComplex::infinity();
  return p.k * (s.value() + std::conj(p.beta)) / (s.value() - p.alpha);
}

inline ExtendedComplex mobius_inverse_map(const MobiusParams& p,
                                          ExtendedComplex mu) {
  if (mu.is_infinite()) return p.alpha;
  if (mu.value() == p.k) return ExtendedComplex::infinity();
  return (p.k * std::conj(p.beta) + mu.value() * p.alpha) / (mu.value() - p.k);
}

/// The modulus |lambda|, which maximizes the image modulus of lambda over
/// all scalar maps with k=1, alpha=beta=sigma real positive.
inline double optimal_sigma(cx lambda) {
  if (lambda == cx{})
    throw StructuralError("optimal_sigma: undefined for lambda = 0");
  return std::abs(lambda);
}

/// Append-only cache of shifted factorizations keyed by the exact complex
/// shift a of (J - aL).  Lookups are synchronized; a miss factorizes
/// outside the lock, so two threads may race to build the same shift and
/// the later insert wins (the factorizations are identical).
class ShiftCache {
 public:
  std::shared_ptr<const SparseLU> get(const Pencil& pencil, cx a) {
    const Key key{a.real(), a.imag()};
    {
      std::lock_guard<std::mutex> lock(mutex_);
      auto it = cache_.find(key);
      if (it != cache_.end()) return it->second;
    }
    auto lu = std::make_shared<const SparseLU>(pencil.assemble_shifted(a));
    ++factorizations_;
    std::lock_guard<std::mutex> lock(mutex_);
    cache_[key] = lu;
    return cache_[key];
  }

  std::vector<cx> solve(const Pencil& pencil, cx a, std::span<const cx> b) {
    auto lu = get(pencil, a);
    ++solves_;
    return lu->solve(b);
  }

  long factorization_count() const { return factorizations_.load(); }
  long solve_count() const { return solves_.load(); }

 private:
  using Key = std::pair<double, double>;
  std::map<Key, std::shared_ptr<const SparseLU>> cache_;
  mutable std::mutex mutex_;
  std::atomic<long> factorizations_{0};
  std::atomic<long> solves_{0};
};

/// General Möbius extension of a pencil: applies
///   C = k (J + conj(beta) L)(J - alpha L)^{-1}       (left extension)
///   D = k (J - alpha L)^{-1} (J + conj(beta) L)      (right extension)
/// through the identities C = kI + k(alpha+conj(beta)) L (J-alpha L)^{-1}
/// and D = kI + k(alpha+conj(beta)) (J-alpha L)^{-1} L, one factorized
/// solve per application.
class MobiusOperator {
 public:
  MobiusOperator(const Pencil& pencil, MobiusParams params)
      : pencil_(pencil), params_(params) {}

  std::vector<cx> apply_c(std::span<const cx> v) {
    const cx coeff = params_.k * (params_.alpha + std::conj(params_.beta));
    std::vector<cx> x = cache_.solve(pencil_, params_.alpha, v);
    x = pencil_.apply_l(x);
    for (size_t i = 0; i < x.size(); ++i) x[i] = params_.k * v[i] + coeff * x[i];
    return x;
  }

  std::vector<cx> apply_d(std::span<const cx> v) {
    const cx coeff = params_.k * (params_.alpha + std::conj(params_.beta));
    std::vector<cx> lv = pencil_.apply_l(v);
    std::vector<cx> x = cache_.solve(pencil_, params_.alpha, lv);
    for (size_t i = 0; i < x.size(); ++i) x[i] = params_.k * v[i] + coeff * x[i];
    return x;
  }

  const MobiusParams& params() const { return params_; }
  long factorization_count() const { return cache_.factorization_count(); }
  long solve_count() const { return cache_.solve_count(); }

 private:
  const Pencil& pencil_;
  MobiusParams params_;
  ShiftCache cache_;
};

/// Cayley special case k=1, alpha=beta=sigma with Re(sigma) > 0, bound to
/// one pencil and one shared factorization cache.  Every application
/// costs exactly one factorized solve:
///   C        = I + 2 Re(sigma) L (J - sigma L)^{-1}
///   C^{-1}   = I - 2 Re(sigma) L (J + conj(sigma) L)^{-1}
///   (C - mu I)^{-1}      = [I + 2Re(sigma)/(mu-1) L (J - a L)^{-1}]/(1-mu),
///                          a = (conj(sigma) + mu sigma)/(mu - 1)
///   (C^{-1} - mu I)^{-1} = [I - 2Re(sigma)/(mu-1) L (J - a' L)^{-1}]/(1-mu),
///                          a' = (sigma + mu conj(sigma))/(1 - mu)
class CayleyOperator {
 public:
  /// Shifts closer to 1 than this are rejected as degenerate; mu = 1 is
  /// the image of the pencil's infinite eigenvalue.
  static constexpr double kDegenerateBand = 1e-12;

  CayleyOperator(const Pencil& pencil, cx sigma)
      : pencil_(pencil), sigma_(sigma) {
    if (!(sigma.real() > 0.0))
      throw StructuralError("cayley: Re(sigma) must be positive");
  }

  cx sigma() const { return sigma_; }
  const Pencil& pencil() const { return pencil_; }

  std::vector<cx> apply_c(std::span<const cx> v) {
    return combine(v, sigma_, 2.0 * sigma_.real());
  }

  std::vector<cx> apply_c_inv(std::span<const cx> v) {
    return combine(v, -std::conj(sigma_), -2.0 * sigma_.real());
  }

  std::vector<cx> shift_invert_c(cx mu, std::span<const cx> v) {
    guard(mu);
    const cx a = (std::conj(sigma_) + mu * sigma_) / (mu - 1.0);
    std::vector<cx> x = combine(v, a, 2.0 * sigma_.real() / (mu - 1.0));
    const cx scale = 1.0 / (1.0 - mu);
    for (cx& e : x) e *= scale;
    return x;
  }

  std::vector<cx> shift_invert_c_inv(cx mu, std::span<const cx> v) {
    guard(mu);
    const cx a = (sigma_ + mu * std::conj(sigma_)) / (1.0 - mu);
    std::vector<cx> x = combine(v, a, -2.0 * sigma_.real() / (mu - 1.0));
    const cx scale = 1.0 / (1.0 - mu);
    for (cx& e : x) e *= scale;
    return x;
  }

  /// (C^{-1} - xi I)(C^{-1} - mu I)^{-1} = I + (mu - xi)(C^{-1} - mu I)^{-1}.
  std::vector<cx> apply_deflated(cx mu, cx xi, std::span<const cx> v) {
    std::vector<cx> x = shift_invert_c_inv(mu, v);
    const cx w = mu - xi;
    for (size_t i = 0; i < x.size(); ++i) x[i] = v[i] + w * x[i];
    return x;
  }

  long factorization_count() const { return cache_.factorization_count(); }
  long solve_count() const { return cache_.solve_count(); }

 private:
  void guard(cx mu) const {
    if (std::abs(mu - 1.0) < kDegenerateBand)
      throw DegenerateShift("shift within guard band of the spurious value 1");
  }

  /// v + coeff * L (J - aL)^{-1} v with one cached factorized solve.
  std::vector<cx> combine(std::span<const cx> v, cx a, cx coeff) {
    std::vector<cx> x = cache_.solve(pencil_, a, v);
    x = pencil_.apply_l(x);
    for (size_t i = 0; i < x.size(); ++i) x[i] = v[i] + coeff * x[i];
    return x;
  }

  const Pencil& pencil_;
  cx sigma_;
  ShiftCache cache_;
};

}  // namespace penceig
