#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <vector>

#include "errors.hpp"
#include "sparse.hpp"
#include "types.hpp"

namespace penceig {

/// Dense square matrix in row-major storage.
template <typename T>
class DenseMatrix {
 public:
  DenseMatrix() = default;

  explicit DenseMatrix(int order) : n_(order), data_(static_cast<size_t>(order) * order, T{}) {
    if (order < 0) throw StructuralError("dense matrix order must be nonnegative");
  }

  static DenseMatrix identity(int order) {
    DenseMatrix m(order);
    for (int i = 0; i < order; ++i) m.at(i, i) = T(1);
    return m;
  }

  int order() const { return n_; }

  T& at(int i, int j) { return data_[static_cast<size_t>(i) * n_ + j]; }
  const T& at(int i, int j) const { return data_[static_cast<size_t>(i) * n_ + j]; }

  const std::vector<T>& data() const { return data_; }

  std::vector<T> matvec(std::span<const T> x) const {
    if (static_cast<int>(x.size()) != n_)
      throw StructuralError("dense matvec: length mismatch");
    std::vector<T> y(n_, T{});
    for (int i = 0; i < n_; ++i) {
      T acc{};
      for (int j = 0; j < n_; ++j) acc += at(i, j) * x[j];
      y[i] = acc;
    }
    return y;
  }

  DenseMatrix operator*(const DenseMatrix& other) const {
    if (n_ != other.n_) throw StructuralError("dense multiply: order mismatch");
    DenseMatrix out(n_);
    for (int i = 0; i < n_; ++i)
      for (int k = 0; k < n_; ++k) {
        const T a = at(i, k);
        if (a == T{}) continue;
        for (int j = 0; j < n_; ++j) out.at(i, j) += a * other.at(k, j);
      }
    return out;
  }

  double max_abs() const {
    double m = 0.0;
    for (const T& v : data_) m = std::max(m, std::abs(v));
    return m;
  }

 private:
  int n_ = 0;
  std::vector<T> data_;
};

template <typename T>
DenseMatrix<T> to_dense(const SparseMatrix<T>& a) {
  DenseMatrix<T> out(a.order());
  for (const auto& t : a.to_triplets()) out.at(t.row, t.col) += t.value;
  return out;
}

inline DenseMatrix<cx> complexify(const DenseMatrix<double>& a) {
  DenseMatrix<cx> out(a.order());
  for (int i = 0; i < a.order(); ++i)
    for (int j = 0; j < a.order(); ++j) out.at(i, j) = cx(a.at(i, j), 0.0);
  return out;
}

/// Solves A X = B by Gaussian elimination with partial pivoting.
/// Throws RankDeficientBasis when a pivot falls below rel_tol times the
/// largest input magnitude.
template <typename T>
DenseMatrix<T> solve_dense(DenseMatrix<T> a, DenseMatrix<T> b,
                           double rel_tol = 1e-13) {
  const int n = a.order();
  if (b.order() != n) throw StructuralError("solve_dense: order mismatch");
  const double scale = std::max(a.max_abs(), 1e-300);
  for (int k = 0; k < n; ++k) {
    int piv = k;
    double best = std::abs(a.at(k, k));
    for (int i = k + 1; i < n; ++i) {
      const double t = std::abs(a.at(i, k));
      if (t > best) {
        best = t;
        piv = i;
      }
    }
    if (best <= rel_tol * scale)
      throw RankDeficientBasis("matrix numerically rank deficient at column " +
                               std::to_string(k));
    if (piv != k)
      for (int j = 0; j < n; ++j) {
        std::swap(a.at(piv, j), a.at(k, j));
        std::swap(b.at(piv, j), b.at(k, j));
      }
    const T pivot = a.at(k, k);
    for (int i = k + 1; i < n; ++i) {
      const T f = a.at(i, k) / pivot;
      if (f == T{}) continue;
      a.at(i, k) = T{};
      for (int j = k + 1; j < n; ++j) a.at(i, j) -= f * a.at(k, j);
      for (int j = 0; j < n; ++j) b.at(i, j) -= f * b.at(k, j);
    }
  }
  for (int k = n - 1; k >= 0; --k)
    for (int j = 0; j < n; ++j) {
      T acc = b.at(k, j);
      for (int i = k + 1; i < n; ++i) acc -= a.at(k, i) * b.at(i, j);
      b.at(k, j) = acc / a.at(k, k);
    }
  return b;
}

struct EigenResult {
  std::vector<cx> values;
  /// Eigenvector columns when requested, empty otherwise.
  DenseMatrix<cx> vectors;
  bool has_vectors = false;
};

namespace detail {

inline void cdiv(double xr, double xi, double yr, double yi, double& cr,
                 double& ci) {
  double r, d;
  if (std::abs(yr) > std::abs(yi)) {
    r = yi / yr;
    d = yr + r * yi;
    cr = (xr + r * xi) / d;
    ci = (xi - r * xr) / d;
  } else {
    r = yr / yi;
    d = yi + r * yr;
    cr = (r * xr + xi) / d;
    ci = (r * xi - xr) / d;
  }
}

/// Householder reduction of a real matrix to upper Hessenberg form with
/// accumulation of the orthogonal similarity in v.
inline void hessenberg_real(DenseMatrix<double>& h, DenseMatrix<double>& v) {
  const int n = h.order();
  const int low = 0, high = n - 1;
  std::vector<double> ort(n, 0.0);

  for (int m = low + 1; m <= high - 1; ++m) {
    double scale = 0.0;
    for (int i = m; i <= high; ++i) scale += std::abs(h.at(i, m - 1));
    if (scale == 0.0) continue;

    double hh = 0.0;
    for (int i = high; i >= m; --i) {
      ort[i] = h.at(i, m - 1) / scale;
      hh += ort[i] * ort[i];
    }
    double g = std::sqrt(hh);
    if (ort[m] > 0) g = -g;
    hh -= ort[m] * g;
    ort[m] -= g;

    for (int j = m; j < n; ++j) {
      double f = 0.0;
      for (int i = high; i >= m; --i) f += ort[i] * h.at(i, j);
      f /= hh;
      for (int i = m; i <= high; ++i) h.at(i, j) -= f * ort[i];
    }
    for (int i = 0; i <= high; ++i) {
      double f = 0.0;
      for (int j = high; j >= m; --j) f += ort[j] * h.at(i, j);
      f /= hh;
      for (int j = m; j <= high; ++j) h.at(i, j) -= f * ort[j];
    }
    ort[m] = scale * ort[m];
    h.at(m, m - 1) = scale * g;
  }

  v = DenseMatrix<double>::identity(n);
  // The reflector for column m-1 is still stored below the subdiagonal,
  // except its leading entry which lives in ort[m].
  for (int m = high - 1; m >= low + 1; --m) {
    if (h.at(m, m - 1) == 0.0) continue;
    for (int i = m + 1; i <= high; ++i) ort[i] = h.at(i, m - 1);
    for (int j = m; j <= high; ++j) {
      double g = 0.0;
      for (int i = m; i <= high; ++i) g += ort[i] * v.at(i, j);
      g = (g / ort[m]) / h.at(m, m - 1);
      for (int i = m; i <= high; ++i) v.at(i, j) += g * ort[i];
    }
  }
}

/// Francis double-shift QR on a real upper Hessenberg matrix.  Produces
/// the real Schur form in h, eigenvalues in (d, e) as conjugate pairs,
/// and accumulates transformations in v.  When with_vectors is set the
/// quasi-triangular system is back-substituted and back-transformed so v
/// ends up holding eigenvectors in compact real storage.
inline void hqr2(DenseMatrix<double>& h, DenseMatrix<double>& v,
                 std::vector<double>& d, std::vector<double>& e,
                 bool with_vectors, long max_sweeps) {
  const int nn = h.order();
  int n = nn - 1;
  const int low = 0, high = nn - 1;
  const double eps = std::ldexp(1.0, -52);
  double exshift = 0.0;
  double p = 0, q = 0, r = 0, s = 0, z = 0, t, w, x, y;

  double norm = 0.0;
  for (int i = 0; i < nn; ++i)
    for (int j = std::max(i - 1, 0); j < nn; ++j) norm += std::abs(h.at(i, j));

  long sweeps = 0;
  int iter = 0;
  while (n >= low) {
    int l = n;
    while (l > low) {
      s = std::abs(h.at(l - 1, l - 1)) + std::abs(h.at(l, l));
      if (s == 0.0) s = norm;
      if (std::abs(h.at(l, l - 1)) < eps * s) break;
      --l;
    }

    if (l == n) {
      h.at(n, n) += exshift;
      d[n] = h.at(n, n);
      e[n] = 0.0;
      --n;
      iter = 0;
    } else if (l == n - 1) {
      w = h.at(n, n - 1) * h.at(n - 1, n);
      p = (h.at(n - 1, n - 1) - h.at(n, n)) / 2.0;
      q = p * p + w;
      z = std::sqrt(std::abs(q));
      h.at(n, n) += exshift;
      h.at(n - 1, n - 1) += exshift;
      x = h.at(n, n);

      if (q >= 0) {
        z = (p >= 0) ? p + z : p - z;
        d[n - 1] = x + z;
        d[n] = d[n - 1];
        if (z != 0.0) d[n] = x - w / z;
        e[n - 1] = 0.0;
        e[n] = 0.0;
        x = h.at(n, n - 1);
        s = std::abs(x) + std::abs(z);
        p = x / s;
        q = z / s;
        r = std::sqrt(p * p + q * q);
        p /= r;
        q /= r;
        for (int j = n - 1; j < nn; ++j) {
          z = h.at(n - 1, j);
          h.at(n - 1, j) = q * z + p * h.at(n, j);
          h.at(n, j) = q * h.at(n, j) - p * z;
        }
        for (int i = 0; i <= n; ++i) {
          z = h.at(i, n - 1);
          h.at(i, n - 1) = q * z + p * h.at(i, n);
          h.at(i, n) = q * h.at(i, n) - p * z;
        }
        for (int i = low; i <= high; ++i) {
          z = v.at(i, n - 1);
          v.at(i, n - 1) = q * z + p * v.at(i, n);
          v.at(i, n) = q * v.at(i, n) - p * z;
        }
      } else {
        d[n - 1] = x + p;
        d[n] = x + p;
        e[n - 1] = z;
        e[n] = -z;
      }
      n -= 2;
      iter = 0;
    } else {
      x = h.at(n, n);
      y = 0.0;
      w = 0.0;
      if (l < n) {
        y = h.at(n - 1, n - 1);
        w = h.at(n, n - 1) * h.at(n - 1, n);
      }

      if (iter == 10) {
        exshift += x;
        for (int i = low; i <= n; ++i) h.at(i, i) -= x;
        s = std::abs(h.at(n, n - 1)) + std::abs(h.at(n - 1, n - 2));
        x = y = 0.75 * s;
        w = -0.4375 * s * s;
      }
      if (iter == 30) {
        s = (y - x) / 2.0;
        s = s * s + w;
        if (s > 0) {
          s = std::sqrt(s);
          if (y < x) s = -s;
          s = x - w / ((y - x) / 2.0 + s);
          for (int i = low; i <= n; ++i) h.at(i, i) -= s;
          exshift += s;
          x = y = w = 0.964;
        }
      }

      ++iter;
      if (++sweeps > max_sweeps)
        throw ConvergenceError("eigenvalue iteration exceeded " +
                               std::to_string(max_sweeps) + " sweeps");

      int m = n - 2;
      while (m >= l) {
        z = h.at(m, m);
        r = x - z;
        s = y - z;
        p = (r * s - w) / h.at(m + 1, m) + h.at(m, m + 1);
        q = h.at(m + 1, m + 1) - z - r - s;
        r = h.at(m + 2, m + 1);
        s = std::abs(p) + std::abs(q) + std::abs(r);
        p /= s;
        q /= s;
        r /= s;
        if (m == l) break;
        if (std::abs(h.at(m, m - 1)) * (std::abs(q) + std::abs(r)) <
            eps * (std::abs(p) * (std::abs(h.at(m - 1, m - 1)) + std::abs(z) +
                                  std::abs(h.at(m + 1, m + 1)))))
          break;
        --m;
      }
      for (int i = m + 2; i <= n; ++i) {
        h.at(i, i - 2) = 0.0;
        if (i > m + 2) h.at(i, i - 3) = 0.0;
      }

      for (int k = m; k <= n - 1; ++k) {
        const bool notlast = (k != n - 1);
        if (k != m) {
          p = h.at(k, k - 1);
          q = h.at(k + 1, k - 1);
          r = notlast ? h.at(k + 2, k - 1) : 0.0;
          x = std::abs(p) + std::abs(q) + std::abs(r);
          if (x == 0.0) continue;
          p /= x;
          q /= x;
          r /= x;
        }
        s = std::sqrt(p * p + q * q + r * r);
        if (p < 0) s = -s;
        if (s == 0.0) continue;
        if (k != m)
          h.at(k, k - 1) = -s * x;
        else if (l != m)
          h.at(k, k - 1) = -h.at(k, k - 1);
        p += s;
        x = p / s;
        y = q / s;
        z = r / s;
        q /= p;
        r /= p;

        for (int j = k; j < nn; ++j) {
          p = h.at(k, j) + q * h.at(k + 1, j);
          if (notlast) {
            p += r * h.at(k + 2, j);
            h.at(k + 2, j) -= p * z;
          }
          h.at(k, j) -= p * x;
          h.at(k + 1, j) -= p * y;
        }
        for (int i = 0; i <= std::min(n, k + 3); ++i) {
          p = x * h.at(i, k) + y * h.at(i, k + 1);
          if (notlast) {
            p += z * h.at(i, k + 2);
            h.at(i, k + 2) -= p * r;
          }
          h.at(i, k) -= p;
          h.at(i, k + 1) -= p * q;
        }
        for (int i = low; i <= high; ++i) {
          p = x * v.at(i, k) + y * v.at(i, k + 1);
          if (notlast) {
            p += z * v.at(i, k + 2);
            v.at(i, k + 2) -= p * r;
          }
          v.at(i, k) -= p;
          v.at(i, k + 1) -= p * q;
        }
      }
    }
  }

  if (!with_vectors || norm == 0.0) return;

  // Back-substitution on the quasi-triangular factor, then transform by
  // the accumulated basis.
  double cr, ci;
  for (n = nn - 1; n >= 0; --n) {
    p = d[n];
    q = e[n];
    if (q == 0) {
      int l = n;
      h.at(n, n) = 1.0;
      for (int i = n - 1; i >= 0; --i) {
        w = h.at(i, i) - p;
        r = 0.0;
        for (int j = l; j <= n; ++j) r += h.at(i, j) * h.at(j, n);
        if (e[i] < 0.0) {
          z = w;
          s = r;
        } else {
          l = i;
          if (e[i] == 0.0) {
            h.at(i, n) = (w != 0.0) ? -r / w : -r / (eps * norm);
          } else {
            x = h.at(i, i + 1);
            y = h.at(i + 1, i);
            q = (d[i] - p) * (d[i] - p) + e[i] * e[i];
            t = (x * s - z * r) / q;
            h.at(i, n) = t;
            h.at(i + 1, n) = (std::abs(x) > std::abs(z)) ? (-r - w * t) / x
                                                         : (-s - y * t) / z;
          }
          t = std::abs(h.at(i, n));
          if ((eps * t) * t > 1)
            for (int j = i; j <= n; ++j) h.at(j, n) /= t;
        }
      }
    } else if (q < 0) {
      int l = n - 1;
      if (std::abs(h.at(n, n - 1)) > std::abs(h.at(n - 1, n))) {
        h.at(n - 1, n - 1) = q / h.at(n, n - 1);
        h.at(n - 1, n) = -(h.at(n, n) - p) / h.at(n, n - 1);
      } else {
        cdiv(0.0, -h.at(n - 1, n), h.at(n - 1, n - 1) - p, q, cr, ci);
        h.at(n - 1, n - 1) = cr;
        h.at(n - 1, n) = ci;
      }
      h.at(n, n - 1) = 0.0;
      h.at(n, n) = 1.0;
      for (int i = n - 2; i >= 0; --i) {
        double ra = 0.0, sa = 0.0, vr, vi;
        for (int j = l; j <= n; ++j) {
          ra += h.at(i, j) * h.at(j, n - 1);
          sa += h.at(i, j) * h.at(j, n);
        }
        w = h.at(i, i) - p;
        if (e[i] < 0.0) {
          z = w;
          r = ra;
          s = sa;
        } else {
          l = i;
          if (e[i] == 0) {
            cdiv(-ra, -sa, w, q, cr, ci);
            h.at(i, n - 1) = cr;
            h.at(i, n) = ci;
          } else {
            x = h.at(i, i + 1);
            y = h.at(i + 1, i);
            vr = (d[i] - p) * (d[i] - p) + e[i] * e[i] - q * q;
            vi = (d[i] - p) * 2.0 * q;
            if (vr == 0.0 && vi == 0.0)
              vr = eps * norm *
                   (std::abs(w) + std::abs(q) + std::abs(x) + std::abs(y) +
                    std::abs(z));
            cdiv(x * r - z * ra + q * sa, x * s - z * sa - q * ra, vr, vi, cr,
                 ci);
            h.at(i, n - 1) = cr;
            h.at(i, n) = ci;
            if (std::abs(x) > (std::abs(z) + std::abs(q))) {
              h.at(i + 1, n - 1) =
                  (-ra - w * h.at(i, n - 1) + q * h.at(i, n)) / x;
              h.at(i + 1, n) = (-sa - w * h.at(i, n) - q * h.at(i, n - 1)) / x;
            } else {
              cdiv(-r - y * h.at(i, n - 1), -s - y * h.at(i, n), z, q, cr, ci);
              h.at(i + 1, n - 1) = cr;
              h.at(i + 1, n) = ci;
            }
          }
          t = std::max(std::abs(h.at(i, n - 1)), std::abs(h.at(i, n)));
          if ((eps * t) * t > 1)
            for (int j = i; j <= n; ++j) {
              h.at(j, n - 1) /= t;
              h.at(j, n) /= t;
            }
        }
      }
    }
  }

  for (int j = nn - 1; j >= low; --j)
    for (int i = low; i <= high; ++i) {
      z = 0.0;
      for (int k = low; k <= std::min(j, high); ++k)
        z += v.at(i, k) * h.at(k, j);
      v.at(i, j) = z;
    }
}

/// Unitary reduction of a complex matrix to upper Hessenberg form,
/// accumulating the transformation in z.
inline void hessenberg_complex(DenseMatrix<cx>& a, DenseMatrix<cx>& z) {
  const int n = a.order();
  z = DenseMatrix<cx>::identity(n);
  std::vector<cx> vv(n);
  for (int k = 0; k + 2 < n; ++k) {
    double xnorm2 = 0.0;
    for (int i = k + 1; i < n; ++i) xnorm2 += std::norm(a.at(i, k));
    const double xnorm = std::sqrt(xnorm2);
    if (xnorm == 0.0) continue;
    const cx a0 = a.at(k + 1, k);
    const cx phase = (a0 != cx{}) ? a0 / std::abs(a0) : cx(1.0, 0.0);
    const cx alpha = -phase * xnorm;

    double vnorm2 = 0.0;
    for (int i = k + 1; i < n; ++i) {
      vv[i] = a.at(i, k);
      if (i == k + 1) vv[i] -= alpha;
      vnorm2 += std::norm(vv[i]);
    }
    if (vnorm2 == 0.0) continue;
    const double beta = 2.0 / vnorm2;

    for (int j = k; j < n; ++j) {
      cx s{};
      for (int i = k + 1; i < n; ++i) s += std::conj(vv[i]) * a.at(i, j);
      s *= beta;
      for (int i = k + 1; i < n; ++i) a.at(i, j) -= s * vv[i];
    }
    for (int i = 0; i < n; ++i) {
      cx s{};
      for (int j = k + 1; j < n; ++j) s += a.at(i, j) * vv[j];
      s *= beta;
      for (int j = k + 1; j < n; ++j) a.at(i, j) -= s * std::conj(vv[j]);
    }
    for (int i = 0; i < n; ++i) {
      cx s{};
      for (int j = k + 1; j < n; ++j) s += z.at(i, j) * vv[j];
      s *= beta;
      for (int j = k + 1; j < n; ++j) z.at(i, j) -= s * std::conj(vv[j]);
    }
    a.at(k + 1, k) = alpha;
    for (int i = k + 2; i < n; ++i) a.at(i, k) = cx{};
  }
}

inline void rotation(cx f, cx g, double& c, cx& s) {
  const double af = std::abs(f), ag = std::abs(g);
  if (ag == 0.0) {
    c = 1.0;
    s = cx{};
    return;
  }
  if (af == 0.0) {
    c = 0.0;
    s = std::conj(g) / ag;
    return;
  }
  const double mx = std::max(af, ag);
  const double rr = mx * std::sqrt((af / mx) * (af / mx) + (ag / mx) * (ag / mx));
  c = af / rr;
  s = (f / af) * std::conj(g) / cx(rr, 0.0);
}

/// Shifted QR iteration on a complex Hessenberg matrix using Givens
/// rotations; a reduces to upper triangular, transformations accumulate
/// in z.
inline void qr_complex(DenseMatrix<cx>& a, DenseMatrix<cx>& z,
                       long max_sweeps) {
  const int n = a.order();
  const double eps = std::ldexp(1.0, -52);
  int m = n - 1;
  int stuck = 0;
  long sweeps = 0;
  while (m > 0) {
    int l = m;
    while (l > 0) {
      const double off = std::abs(a.at(l, l - 1));
      if (off <= eps * (std::abs(a.at(l - 1, l - 1)) + std::abs(a.at(l, l)))) {
        a.at(l, l - 1) = cx{};
        break;
      }
      --l;
    }
    if (l == m) {
      --m;
      stuck = 0;
      continue;
    }
    if (++sweeps > max_sweeps)
      throw ConvergenceError("eigenvalue iteration exceeded " +
                             std::to_string(max_sweeps) + " sweeps");

    // Wilkinson shift: trailing 2x2 eigenvalue nearest the corner entry,
    // with an occasional exceptional shift to break cycling.
    cx shift;
    if (++stuck % 16 == 0) {
      shift = a.at(m, m) + cx(1.5 * std::abs(a.at(m, m - 1)), 0.0);
    } else {
      const cx aa = a.at(m - 1, m - 1), bb = a.at(m - 1, m);
      const cx cc = a.at(m, m - 1), dd = a.at(m, m);
      const cx tr = aa + dd;
      const cx disc = std::sqrt(tr * tr - 4.0 * (aa * dd - bb * cc));
      const cx mu1 = (tr + disc) / 2.0, mu2 = (tr - disc) / 2.0;
      shift = (std::abs(mu1 - dd) < std::abs(mu2 - dd)) ? mu1 : mu2;
    }

    cx x = a.at(l, l) - shift;
    cx y = a.at(l + 1, l);
    for (int k = l; k < m; ++k) {
      double c;
      cx s;
      rotation(x, y, c, s);
      const int jlo = std::max(0, k - 1);
      for (int j = jlo; j < n; ++j) {
        const cx t1 = a.at(k, j), t2 = a.at(k + 1, j);
        a.at(k, j) = c * t1 + s * t2;
        a.at(k + 1, j) = -std::conj(s) * t1 + c * t2;
      }
      const int ihi = std::min(k + 2, n - 1);
      for (int i = 0; i <= ihi; ++i) {
        const cx t1 = a.at(i, k), t2 = a.at(i, k + 1);
        a.at(i, k) = c * t1 + std::conj(s) * t2;
        a.at(i, k + 1) = -s * t1 + c * t2;
      }
      for (int i = 0; i < n; ++i) {
        const cx t1 = z.at(i, k), t2 = z.at(i, k + 1);
        z.at(i, k) = c * t1 + std::conj(s) * t2;
        z.at(i, k + 1) = -s * t1 + c * t2;
      }
      if (k < m - 1) {
        x = a.at(k + 1, k);
        y = a.at(k + 2, k);
      }
    }
  }
}

}  // namespace detail

/// Eigenvalues (and optionally eigenvectors) of a real square matrix by
/// Householder reduction to Hessenberg form followed by Francis
/// double-shift QR.  Complex conjugate pairs come out exactly symmetric.
/// max_sweeps <= 0 selects the default budget of 100 * order.
inline EigenResult eigen(const DenseMatrix<double>& a, bool with_vectors = false,
                         long max_sweeps = 0) {
  const int n = a.order();
  EigenResult res;
  if (n == 0) return res;
  if (max_sweeps <= 0) max_sweeps = 100L * n;

  DenseMatrix<double> h = a;
  DenseMatrix<double> v = DenseMatrix<double>::identity(n);
  std::vector<double> d(n, 0.0), e(n, 0.0);
  if (n > 2) detail::hessenberg_real(h, v);
  detail::hqr2(h, v, d, e, with_vectors, max_sweeps);

  res.values.resize(n);
  for (int i = 0; i < n; ++i) res.values[i] = cx(d[i], e[i]);
  if (with_vectors) {
    res.vectors = DenseMatrix<cx>(n);
    for (int j = 0; j < n; ++j) {
      if (e[j] == 0.0) {
        for (int i = 0; i < n; ++i) res.vectors.at(i, j) = cx(v.at(i, j), 0.0);
      } else if (e[j] > 0.0) {
        for (int i = 0; i < n; ++i) {
          res.vectors.at(i, j) = cx(v.at(i, j), v.at(i, j + 1));
          res.vectors.at(i, j + 1) = cx(v.at(i, j), -v.at(i, j + 1));
        }
      }
    }
    for (int j = 0; j < n; ++j) {
      double nrm = 0.0;
      for (int i = 0; i < n; ++i) nrm += std::norm(res.vectors.at(i, j));
      nrm = std::sqrt(nrm);
      if (nrm > 0.0)
        for (int i = 0; i < n; ++i) res.vectors.at(i, j) /= nrm;
    }
    res.has_vectors = true;
  }
  return res;
}

/// Eigenvalues (and optionally eigenvectors) of a complex square matrix
/// by unitary Hessenberg reduction and single-shift QR with Wilkinson
/// shifts.
inline EigenResult eigen(const DenseMatrix<cx>& a, bool with_vectors = false,
                         long max_sweeps = 0) {
  const int n = a.order();
  EigenResult res;
  if (n == 0) return res;
  if (max_sweeps <= 0) max_sweeps = 100L * n;

  DenseMatrix<cx> t = a;
  DenseMatrix<cx> z = DenseMatrix<cx>::identity(n);
  if (n > 2) detail::hessenberg_complex(t, z);
  detail::qr_complex(t, z, max_sweeps);

  res.values.resize(n);
  for (int i = 0; i < n; ++i) res.values[i] = t.at(i, i);

  if (with_vectors) {
    const double tnorm = std::max(t.max_abs(), 1e-300);
    const double eps = std::ldexp(1.0, -52);
    res.vectors = DenseMatrix<cx>(n);
    std::vector<cx> y(n);
    for (int j = 0; j < n; ++j) {
      std::fill(y.begin(), y.end(), cx{});
      y[j] = cx(1.0, 0.0);
      for (int k = j - 1; k >= 0; --k) {
        cx acc{};
        for (int i = k + 1; i <= j; ++i) acc += t.at(k, i) * y[i];
        cx den = t.at(k, k) - res.values[j];
        if (std::abs(den) < eps * tnorm) den = cx(eps * tnorm, 0.0);
        y[k] = -acc / den;
      }
      double nrm = 0.0;
      for (int k = 0; k <= j; ++k) nrm += std::norm(y[k]);
      nrm = std::sqrt(nrm);
      for (int i = 0; i < n; ++i) {
        cx acc{};
        for (int k = 0; k <= j; ++k) acc += z.at(i, k) * y[k];
        res.vectors.at(i, j) = acc / nrm;
      }
    }
    res.has_vectors = true;
  }
  return res;
}

struct RitzResult {
  std::vector<cx> values;
  DenseMatrix<cx> vectors;
};

/// Spectral decomposition of G^{-1} H ordered by decreasing Ritz value
/// modulus (ties: descending real part, then descending imaginary part).
/// Throws RankDeficientBasis when G is numerically singular.
inline RitzResult ritz_decompose(const DenseMatrix<cx>& g,
                                 const DenseMatrix<cx>& h) {
  if (g.order() != h.order())
    throw StructuralError("ritz_decompose: order mismatch");
  DenseMatrix<cx> b = solve_dense(g, h, 1e-12);
  EigenResult eig = eigen(b, true);

  const int n = b.order();
  std::vector<int> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&eig](int i, int j) {
    const double mi = std::abs(eig.values[i]), mj = std::abs(eig.values[j]);
    if (mi != mj) return mi > mj;
    if (eig.values[i].real() != eig.values[j].real())
      return eig.values[i].real() > eig.values[j].real();
    return eig.values[i].imag() > eig.values[j].imag();
  });

  RitzResult out;
  out.values.resize(n);
  out.vectors = DenseMatrix<cx>(n);
  for (int j = 0; j < n; ++j) {
    out.values[j] = eig.values[idx[j]];
    for (int i = 0; i < n; ++i) out.vectors.at(i, j) = eig.vectors.at(i, idx[j]);
  }
  return out;
}

/// Greedy nearest matching between two eigenvalue multisets with a
/// relative tolerance; true when every value pairs off.
inline bool match_multisets(std::span<const cx> a, std::span<const cx> b,
                            double rel_tol) {
  if (a.size() != b.size()) return false;
  std::vector<cx> av(a.begin(), a.end());
  std::stable_sort(av.begin(), av.end(), [](cx x, cx y) {
    return std::abs(x) > std::abs(y);
  });
  std::vector<bool> used(b.size(), false);
  for (const cx& x : av) {
    int best = -1;
    double bd = 0.0;
    for (size_t j = 0; j < b.size(); ++j) {
      if (used[j]) continue;
      const double dist = std::abs(x - b[j]);
      if (best < 0 || dist < bd) {
        best = static_cast<int>(j);
        bd = dist;
      }
    }
    if (best < 0 || bd > rel_tol * (1.0 + std::abs(x))) return false;
    used[best] = true;
  }
  return true;
}

}  // namespace penceig
