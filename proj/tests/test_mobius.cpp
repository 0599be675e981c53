#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "test_util.hpp"

using penceig::CayleyOperator;
using penceig::cx;
using penceig::ExtendedComplex;
using penceig::MobiusOperator;
using penceig::MobiusParams;
using penceig::Pencil;
using penceig::mobius_inverse_map;
using penceig::mobius_map;

namespace {

const MobiusParams kUnit{cx(1, 0), cx(1, 0), cx(1, 0)};

std::vector<cx> dense_apply(const penceig::DenseMatrix<cx>& m,
                            std::span<const cx> v) {
  return m.matvec(v);
}

}  // namespace

TEST(MobiusParams, ConstructorValidates) {
  EXPECT_THROW(MobiusParams(cx(0, 0), cx(1, 0), cx(1, 0)),
               penceig::StructuralError);
  EXPECT_THROW(MobiusParams(cx(1, 0), cx(1, 0), cx(-1, 0)),
               penceig::StructuralError);
  EXPECT_NO_THROW(MobiusParams(cx(2, 1), cx(0, 1), cx(0.5, 0)));
}

TEST(MobiusScalarMap, HandValues) {
  EXPECT_EQ(mobius_map(kUnit, cx(0, 0)).value(), cx(-1, 0));
  EXPECT_TRUE(mobius_map(kUnit, cx(1, 0)).is_infinite());
  EXPECT_EQ(mobius_map(kUnit, ExtendedComplex::infinity()).value(), cx(1, 0));
}

TEST(MobiusScalarMap, ImaginaryAxisMapsToUnitCircle) {
  const MobiusParams p{cx(1, 0), cx(2.5, 0), cx(2.5, 0)};
  for (double b : {-7.0, -1.0, 0.25, 3.0, 40.0}) {
    const double mod = std::abs(mobius_map(p, cx(0.0, b)).value());
    EXPECT_NEAR(mod, 1.0, 1e-14);
  }
}

TEST(MobiusScalarMap, StableModeMapsInsideUnitCircle) {
  const MobiusParams p{cx(1, 0), cx(4.0, 0), cx(4.0, 0)};
  const double mod = std::abs(mobius_map(p, cx(-0.0925, 3.9827)).value());
  EXPECT_NEAR(mod, 0.977, 5e-4);
  EXPECT_LT(mod, 1.0);
}

TEST(MobiusScalarMap, InverseMapRoundTrips) {
  auto rng = testutil::make_rng(83);
  const MobiusParams p{cx(1.5, -0.5), cx(0.75, 2.0), cx(-0.25, 1.0)};
  for (int trial = 0; trial < 1000; ++trial) {
    const cx s = testutil::random_complex(rng, 5.0);
    if (std::abs(s - p.alpha) < 1e-6) continue;
    const auto mu = mobius_map(p, s);
    ASSERT_FALSE(mu.is_infinite());
    const auto back = mobius_inverse_map(p, mu);
    ASSERT_FALSE(back.is_infinite());
    EXPECT_LE(std::abs(back.value() - s), 1e-10 * (1.0 + std::abs(s)));
  }
  EXPECT_EQ(mobius_inverse_map(kUnit, cx(3, 0)).value(), cx(2, 0));
  EXPECT_TRUE(mobius_inverse_map(kUnit, cx(1, 0)).is_infinite());
  EXPECT_EQ(mobius_inverse_map(kUnit, ExtendedComplex::infinity()).value(),
            cx(1, 0));
}

TEST(MobiusScalarMap, HalfPlaneTrichotomy) {
  auto rng = testutil::make_rng(89);
  for (int trial = 0; trial < 1000; ++trial) {
    const double sigma = testutil::uniform(rng, 0.05, 10.0);
    const MobiusParams p{cx(1, 0), cx(sigma, 0), cx(sigma, 0)};
    cx s = testutil::random_complex(rng, 8.0);
    switch (trial % 3) {
      case 0:
        s = cx(std::abs(s.real()) + 1e-3, s.imag());
        break;
      case 1:
        s = cx(-std::abs(s.real()) - 1e-3, s.imag());
        break;
      default:
        s = cx(0.0, s.imag());
        break;
    }
    const double mod = std::abs(mobius_map(p, s).value());
    if (s.real() > 0.0)
      EXPECT_GT(mod, 1.0);
    else if (s.real() < 0.0)
      EXPECT_LT(mod, 1.0);
    else
      EXPECT_NEAR(mod, 1.0, 1e-12);
  }
}

TEST(OptimalSigma, ReturnsModulus) {
  EXPECT_EQ(penceig::optimal_sigma(cx(0, 3)), 3.0);
  EXPECT_EQ(penceig::optimal_sigma(cx(0.1814, 4.8323)),
            std::abs(cx(0.1814, 4.8323)));
  EXPECT_THROW(penceig::optimal_sigma(cx(0, 0)), penceig::StructuralError);
}

TEST(OptimalSigma, GridArgmaxNearModulus) {
  auto rng = testutil::make_rng(97);
  for (int trial = 0; trial < 50; ++trial) {
    cx lambda = testutil::random_complex(rng, 9.0);
    lambda = cx(std::abs(lambda.real()) + 0.01, lambda.imag());
    if (std::abs(lambda.imag()) < 0.2)
      lambda = cx(lambda.real(), lambda.imag() + 0.5);
    if (std::abs(lambda) < 0.5) lambda += cx(1.0, 1.0);
    double best_sigma = 0.0, best = -1.0;
    const double step = 0.1;
    for (double sigma = step; sigma <= 20.0 + 1e-9; sigma += step) {
      const MobiusParams p{cx(1, 0), cx(sigma, 0), cx(sigma, 0)};
      const double mod = std::abs(mobius_map(p, lambda).value());
      if (mod > best) {
        best = mod;
        best_sigma = sigma;
      }
    }
    if (std::abs(lambda) > 19.5) continue;
    EXPECT_LE(std::abs(best_sigma - penceig::optimal_sigma(lambda)),
              step + 1e-9)
        << "lambda " << lambda.real() << "+" << lambda.imag() << "i";
  }
}

TEST(CayleyOperator, RequiresRightHalfPlaneSigma) {
  const Pencil p = testutil::diag_pencil(2.0, 1.0);
  EXPECT_THROW(CayleyOperator(p, cx(-1, 0)), penceig::StructuralError);
  EXPECT_THROW(CayleyOperator(p, cx(0, 2)), penceig::StructuralError);
}

TEST(CayleyOperator, ApplyCDiagonalHandExample) {
  const Pencil p = testutil::diag_pencil(2.0, 1.0);
  CayleyOperator op(p, cx(1, 0));
  const auto r = op.apply_c(std::vector<cx>{cx(1, 0), cx(1, 0)});
  EXPECT_NEAR(std::abs(r[0] - cx(3, 0)), 0.0, 1e-14);
  EXPECT_NEAR(std::abs(r[1] - cx(1, 0)), 0.0, 1e-14);

  const auto kernel = op.apply_c(std::vector<cx>{cx(0, 0), cx(1, 0)});
  EXPECT_EQ(kernel[0], cx(0, 0));
  EXPECT_EQ(kernel[1], cx(1, 0));
}

TEST(CayleyOperator, ApplyCMatchesDenseMirror) {
  auto rng = testutil::make_rng(101);
  const auto planted =
      testutil::small_plant(103, 8, 5, {cx(0.5, 1.0), cx(-1.5, 0.0)});
  const Pencil& p = planted.pencil;
  const MobiusParams mp{cx(2, 0), cx(1, 0.5), cx(0.3, -0.2)};
  MobiusOperator op(p, mp);
  const auto dense_c = testutil::dense_mobius_c(p, mp);
  for (int trial = 0; trial < 5; ++trial) {
    const auto v = testutil::random_vector(rng, p.order());
    const auto got = op.apply_c(v);
    const auto want = dense_apply(dense_c, v);
    EXPECT_LE(testutil::rel_diff(got, want), 1e-11);
  }
}

TEST(MobiusOperators, ApplyDMatchesDefinitionAndSpectrum) {
  auto rng = testutil::make_rng(107);
  const auto planted =
      testutil::small_plant(109, 7, 4, {cx(0.8, 2.0), cx(-0.4, 0.0)});
  const Pencil& p = planted.pencil;
  const MobiusParams mp{cx(1.5, 0.5), cx(0.9, 1.1), cx(-0.2, 0.7)};
  MobiusOperator op(p, mp);

  // Vectors annihilated by L are fixed up to the factor k.
  std::vector<cx> va(p.order(), cx{});
  for (int i : p.algebraic_indices()) va[i] = testutil::random_complex(rng, 1.0);
  const auto ka = op.apply_d(va);
  for (int i = 0; i < p.order(); ++i)
    EXPECT_LE(std::abs(ka[i] - mp.k * va[i]), 1e-13);

  const auto dense_d = testutil::dense_mobius_d(p, mp);
  for (int trial = 0; trial < 5; ++trial) {
    const auto v = testutil::random_vector(rng, p.order());
    const auto got = op.apply_d(v);
    const auto want = dense_apply(dense_d, v);
    EXPECT_LE(testutil::rel_diff(got, want), 1e-11);
  }

  const auto dense_c = testutil::dense_mobius_c(p, mp);
  const auto ec = penceig::eigen(dense_c).values;
  const auto ed = penceig::eigen(dense_d).values;
  EXPECT_TRUE(penceig::match_multisets(ec, ed, 1e-9));
}

TEST(MobiusOperators, DiagonalPencilCommutesCAndD) {
  const Pencil p = testutil::diag_pencil(2.0, 1.0);
  const MobiusParams mp{cx(1, 0), cx(1, 0), cx(1, 0)};
  MobiusOperator op(p, mp);
  auto rng = testutil::make_rng(113);
  const auto v = testutil::random_vector(rng, 2);
  const auto c = op.apply_c(v);
  const auto d = op.apply_d(v);
  EXPECT_LE(testutil::rel_diff(c, d), 1e-14);
}

TEST(CayleyOperator, ApplyCInvHandExampleAndInversePair) {
  const Pencil p = testutil::diag_pencil(2.0, 1.0);
  CayleyOperator op(p, cx(1, 0));
  const auto r = op.apply_c_inv(std::vector<cx>{cx(3, 0), cx(1, 0)});
  EXPECT_NEAR(std::abs(r[0] - cx(1, 0)), 0.0, 1e-14);
  EXPECT_NEAR(std::abs(r[1] - cx(1, 0)), 0.0, 1e-14);

  auto rng = testutil::make_rng(127);
  const auto planted = testutil::small_plant(131, 9, 6, {cx(0.6, 1.2)});
  CayleyOperator pop(planted.pencil, cx(1.3, 0.4));
  for (int trial = 0; trial < 5; ++trial) {
    const auto v = testutil::random_vector(rng, planted.pencil.order());
    const auto back = pop.apply_c_inv(pop.apply_c(v));
    EXPECT_LE(testutil::rel_diff(back, v), 1e-10);
  }

  std::vector<cx> w(planted.pencil.order(), cx{});
  for (int i : planted.pencil.algebraic_indices())
    w[i] = testutil::random_complex(rng, 1.0);
  const auto spurious =
      testutil::dense_shifted(planted.pencil, cx(1.3, 0.4)).matvec(w);
  EXPECT_LE(testutil::rel_diff(pop.apply_c(spurious), spurious), 1e-10);
  EXPECT_LE(testutil::rel_diff(pop.apply_c_inv(spurious), spurious), 1e-10);
}

TEST(CayleyOperator, ShiftInvertCHandExampleAndResidual) {
  const Pencil p = testutil::diag_pencil(2.0, 1.0);
  CayleyOperator op(p, cx(1, 0));
  const auto r = op.shift_invert_c(cx(2, 0), std::vector<cx>{cx(1, 0), cx(1, 0)});
  EXPECT_NEAR(std::abs(r[0] - cx(1, 0)), 0.0, 1e-13);
  EXPECT_NEAR(std::abs(r[1] - cx(-1, 0)), 0.0, 1e-13);

  auto rng = testutil::make_rng(137);
  const auto planted = testutil::small_plant(139, 10, 6, {cx(0.7, 1.6)});
  CayleyOperator pop(planted.pencil, cx(2.2, 0.3));
  for (int trial = 0; trial < 10; ++trial) {
    cx mu = testutil::random_complex(rng, 2.0);
    if (std::abs(mu - 1.0) < 0.05) mu += cx(0.25, 0.25);
    const auto v = testutil::random_vector(rng, planted.pencil.order());
    const auto x = pop.shift_invert_c(mu, v);
    auto res = pop.apply_c(x);
    for (size_t i = 0; i < res.size(); ++i) res[i] -= mu * x[i];
    EXPECT_LE(testutil::rel_diff(res, v), 1e-9);
  }
}

TEST(CayleyOperator, ShiftInvertCLargeShiftAsymptotics) {
  const Pencil p = testutil::diag_pencil(2.0, 1.0);
  CayleyOperator op(p, cx(1, 0));
  const double mu = 1e8;
  const std::vector<cx> v{cx(1, 0), cx(-2, 0)};
  const auto r = op.shift_invert_c(cx(mu, 0), v);
  for (size_t i = 0; i < r.size(); ++i)
    EXPECT_LE(std::abs(mu * r[i] + v[i]), 1e-6);
}

TEST(CayleyOperator, ShiftInvertCInvHandExampleAndResidual) {
  const Pencil p = testutil::diag_pencil(2.0, 1.0);
  CayleyOperator op(p, cx(1, 0));
  const auto r =
      op.shift_invert_c_inv(cx(0.5, 0), std::vector<cx>{cx(1, 0), cx(1, 0)});
  EXPECT_NEAR(std::abs(r[0] - cx(-6, 0)), 0.0, 1e-12);
  EXPECT_NEAR(std::abs(r[1] - cx(2, 0)), 0.0, 1e-12);

  // Eigencase: C^{-1} = diag(1/3, 1), so the first coordinate vector maps
  // to itself scaled by 1/(1/3 - mu).
  const auto e = op.shift_invert_c_inv(cx(0.5, 0), std::vector<cx>{cx(1, 0), cx(0, 0)});
  EXPECT_NEAR(std::abs(e[0] - cx(-6, 0)), 0.0, 1e-12);
  EXPECT_NEAR(std::abs(e[1]), 0.0, 1e-14);

  auto rng = testutil::make_rng(149);
  const auto planted = testutil::small_plant(151, 10, 5, {cx(0.9, 2.1)});
  CayleyOperator pop(planted.pencil, cx(1.8, -0.2));
  for (int trial = 0; trial < 10; ++trial) {
    cx mu = testutil::random_complex(rng, 2.0);
    if (std::abs(mu - 1.0) < 0.05) mu += cx(0.25, 0.25);
    const auto v = testutil::random_vector(rng, planted.pencil.order());
    const auto x = pop.shift_invert_c_inv(mu, v);
    auto res = pop.apply_c_inv(x);
    for (size_t i = 0; i < res.size(); ++i) res[i] -= mu * x[i];
    EXPECT_LE(testutil::rel_diff(res, v), 1e-9);
  }
}

TEST(CayleyOperator, ApplyDeflatedHandExampleAndComposition) {
  const Pencil p = testutil::diag_pencil(2.0, 1.0);
  CayleyOperator op(p, cx(1, 0));
  const cx xi(1.0 / 3.0, 0.0);
  const auto r =
      op.apply_deflated(cx(0.5, 0), xi, std::vector<cx>{cx(1, 0), cx(1, 0)});
  EXPECT_NEAR(std::abs(r[0]), 0.0, 1e-13);
  EXPECT_NEAR(std::abs(r[1] - cx(4.0 / 3.0, 0)), 0.0, 1e-13);

  // The xi eigendirection is annihilated, not merely damped.
  const auto killed =
      op.apply_deflated(cx(0.5, 0), xi, std::vector<cx>{cx(1, 0), cx(0, 0)});
  EXPECT_LE(std::abs(killed[0]), 0.1);
  EXPECT_LE(std::abs(killed[1]), 0.1);

  const auto same =
      op.apply_deflated(cx(0.5, 0), cx(0.5, 0), std::vector<cx>{cx(2, 1), cx(-1, 3)});
  EXPECT_EQ(same[0], cx(2, 1));
  EXPECT_EQ(same[1], cx(-1, 3));

  auto rng = testutil::make_rng(157);
  const auto planted = testutil::small_plant(163, 9, 5, {cx(0.5, 1.4)});
  CayleyOperator pop(planted.pencil, cx(1.5, 0.1));
  for (int trial = 0; trial < 5; ++trial) {
    const cx mu = testutil::random_complex(rng, 0.8);
    const cx dxi = testutil::random_complex(rng, 0.8);
    const auto v = testutil::random_vector(rng, planted.pencil.order());
    const auto got = pop.apply_deflated(mu, dxi, v);
    auto composed = pop.shift_invert_c_inv(mu, v);
    auto shifted = pop.apply_c_inv(composed);
    for (size_t i = 0; i < shifted.size(); ++i)
      shifted[i] -= dxi * composed[i];
    EXPECT_LE(testutil::rel_diff(got, shifted), 1e-10);
  }
}

TEST(CayleyOperator, DegenerateShiftGuard) {
  const Pencil p = testutil::diag_pencil(2.0, 1.0);
  CayleyOperator op(p, cx(1, 0));
  const std::vector<cx> v{cx(1, 0), cx(1, 0)};
  EXPECT_THROW(op.shift_invert_c_inv(cx(1, 0), v), penceig::DegenerateShift);
  EXPECT_THROW(op.shift_invert_c_inv(cx(1.0, 1e-13), v),
               penceig::DegenerateShift);
  EXPECT_THROW(op.shift_invert_c(cx(1, 0), v), penceig::DegenerateShift);
  EXPECT_NO_THROW(op.shift_invert_c_inv(cx(1.0, 1e-3), v));
}

TEST(CayleyOperator, StateSupportedVectorsStayInStateSpace) {
  auto rng = testutil::make_rng(167);
  const auto planted = testutil::small_plant(173, 8, 6, {cx(0.4, 1.1)});
  const Pencil& p = planted.pencil;
  CayleyOperator op(p, cx(1.2, 0.0));
  std::vector<cx> v(p.order(), cx{});
  for (int i : p.state_indices()) v[i] = testutil::random_complex(rng, 1.0);
  const auto r = op.apply_c(v);
  for (int i : p.algebraic_indices()) EXPECT_EQ(r[i], cx(0, 0));
}

TEST(CayleyOperator, CacheFactorizesOncePerShift) {
  const auto planted = testutil::small_plant(179, 8, 4, {cx(0.5, 1.0)});
  CayleyOperator op(planted.pencil, cx(1.1, 0.0));
  auto rng = testutil::make_rng(181);
  const auto v = testutil::random_vector(rng, planted.pencil.order());

  op.apply_c(v);
  EXPECT_EQ(op.factorization_count(), 1);
  EXPECT_EQ(op.solve_count(), 1);
  op.apply_c(v);
  EXPECT_EQ(op.factorization_count(), 1);
  EXPECT_EQ(op.solve_count(), 2);

  op.apply_c_inv(v);
  EXPECT_EQ(op.factorization_count(), 2);
  EXPECT_EQ(op.solve_count(), 3);

  const cx mu(0.3, 0.4);
  op.shift_invert_c_inv(mu, v);
  EXPECT_EQ(op.factorization_count(), 3);
  EXPECT_EQ(op.solve_count(), 4);
  op.shift_invert_c_inv(mu, v);
  EXPECT_EQ(op.factorization_count(), 3);
  EXPECT_EQ(op.solve_count(), 5);

  op.apply_deflated(mu, cx(0.1, 0.0), v);
  EXPECT_EQ(op.factorization_count(), 3);
  EXPECT_EQ(op.solve_count(), 6);

  op.shift_invert_c(mu, v);
  EXPECT_EQ(op.factorization_count(), 4);
  EXPECT_EQ(op.solve_count(), 7);
}

TEST(MobiusExtension, SpectrumCorrespondenceAndTransport) {
  const auto planted = testutil::small_plant(
      191, 8, 6, {cx(0.6, 1.8), cx(-0.9, 0.0)});
  const Pencil& p = planted.pencil;
  const MobiusParams mp{cx(1.2, -0.3), cx(0.8, 0.9), cx(0.4, 0.1)};

  const auto dense_c = testutil::dense_mobius_c(p, mp);
  const auto eig = penceig::eigen(dense_c, true);

  std::vector<cx> expect;
  for (const cx& lambda : planted.spectrum)
    expect.push_back(mobius_map(mp, lambda).value());
  for (int i = 0; i < p.n_algebraic(); ++i) expect.push_back(mp.k);
  EXPECT_TRUE(penceig::match_multisets(eig.values, expect, 1e-8));

  // Eigenvectors of C for mu != k map to pencil eigenvectors through
  // (J - alpha L)^{-1}.
  const auto shifted = testutil::dense_shifted(p, mp.alpha);
  const auto jd = penceig::complexify(penceig::to_dense(p.j()));
  int transported = 0;
  for (size_t q = 0; q < eig.values.size(); ++q) {
    const cx mu = eig.values[q];
    if (std::abs(mu - mp.k) < 1e-3 * (1.0 + std::abs(mp.k))) continue;
    std::vector<cx> z(p.order());
    for (int i = 0; i < p.order(); ++i) z[i] = eig.vectors.at(i, q);
    const auto w = penceig::SparseLU(p.assemble_shifted(mp.alpha)).solve(z);
    const cx lambda = mobius_inverse_map(mp, mu).value();
    const auto jw = jd.matvec(w);
    const auto lw = p.apply_l(w);
    double err = 0.0, wnorm = 0.0;
    for (int i = 0; i < p.order(); ++i) {
      err = std::max(err, std::abs(jw[i] - lambda * lw[i]));
      wnorm = std::max(wnorm, std::abs(w[i]));
    }
    EXPECT_LE(err, 1e-8 * std::max(1.0, wnorm) * (1.0 + std::abs(lambda)));
    ++transported;
  }
  EXPECT_EQ(transported, p.n_states());
}

TEST(MobiusExtension, RightExtensionEigenvectorsAreDirect) {
  const auto planted = testutil::small_plant(193, 6, 4, {cx(0.5, 1.2)});
  const Pencil& p = planted.pencil;
  const MobiusParams mp{cx(1, 0), cx(1.1, 0.6), cx(0.9, -0.4)};
  const auto dense_d = testutil::dense_mobius_d(p, mp);
  const auto eig = penceig::eigen(dense_d, true);
  const auto jd = penceig::complexify(penceig::to_dense(p.j()));
  int checked = 0;
  for (size_t q = 0; q < eig.values.size(); ++q) {
    const cx mu = eig.values[q];
    if (std::abs(mu - mp.k) < 1e-3 * (1.0 + std::abs(mp.k))) continue;
    std::vector<cx> z(p.order());
    for (int i = 0; i < p.order(); ++i) z[i] = eig.vectors.at(i, q);
    const cx lambda = mobius_inverse_map(mp, mu).value();
    const auto jz = jd.matvec(z);
    const auto lz = p.apply_l(z);
    double err = 0.0;
    for (int i = 0; i < p.order(); ++i)
      err = std::max(err, std::abs(jz[i] - lambda * lz[i]));
    EXPECT_LE(err, 1e-8 * (1.0 + std::abs(lambda)));
    ++checked;
  }
  EXPECT_EQ(checked, p.n_states());
}
