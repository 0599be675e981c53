#pragma once

#include <complex>

namespace penceig {

using cx = std::complex<double>;

/// A point of the extended complex plane.
///
/// Mobius maps send their pole to infinity and infinity to a finite
/// value, so the point at infinity is carried as an explicit tag rather
/// than through IEEE overflow.
class ExtendedComplex {
 public:
  ExtendedComplex() = default;
  ExtendedComplex(cx v) : value_(v) {}
  ExtendedComplex(double v) : value_(v, 0.0) {}

  static ExtendedComplex infinity() {
    ExtendedComplex e;
    e.infinite_ = true;
    return e;
  }

  bool is_infinite() const { return infinite_; }

  /// Finite value; meaningful only when is_infinite() is false.
  cx value() const { return value_; }

 private:
  cx value_{0.0, 0.0};
  bool infinite_ = false;
};

inline bool operator==(const ExtendedComplex& a, const ExtendedComplex& b) {
  if (a.is_infinite() || b.is_infinite())
    return a.is_infinite() == b.is_infinite();
  return a.value() == b.value();
}

inline bool operator!=(const ExtendedComplex& a, const ExtendedComplex& b) {
  return !(a == b);
}

}  // namespace penceig
