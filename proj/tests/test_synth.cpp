#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

#include "penceig/penceig.hpp"
#include "test_util.hpp"

namespace {

using penceig::cx;
using penceig::PlantSpec;

TEST(PlantedPencil, MinimalPlantKeepsCoreOnDiagonal) {
  PlantSpec spec;
  spec.planted = {cx(2, 0)};
  spec.n_states = 1;
  spec.m_algebraic = 1;
  spec.density = 0.5;
  spec.seed = 11;

  const auto plant = penceig::planted_pencil(spec);
  ASSERT_EQ(plant.spectrum.size(), 1u);
  EXPECT_EQ(plant.spectrum[0], cx(2, 0));

  const auto& p = plant.pencil;
  EXPECT_EQ(p.order(), 2);
  EXPECT_EQ(p.j().nnz(), 2);
  const auto dense = penceig::to_dense(p.j());
  const int s = p.state_indices()[0];
  const int a = p.algebraic_indices()[0];
  EXPECT_EQ(dense.at(s, s), 2.0);
  EXPECT_GE(dense.at(a, a), 2.0);
  EXPECT_LE(dense.at(a, a), 4.0);
  EXPECT_EQ(dense.at(s, a), 0.0);
  EXPECT_EQ(dense.at(a, s), 0.0);
}

TEST(PlantedPencil, DenseOracleRecoversReturnedSpectrum) {
  PlantSpec spec;
  spec.planted = {cx(0.1814, 4.8323), cx(0.0233, 0.0)};
  spec.n_states = 60;
  spec.m_algebraic = 40;
  spec.density = 0.05;
  spec.seed = 20260817;

  const auto plant = penceig::planted_pencil(spec);
  ASSERT_EQ(plant.spectrum.size(), 60u);

  const auto state = plant.pencil.dense_state_matrix(500);
  const auto eig = penceig::eigen(state);
  EXPECT_TRUE(penceig::match_multisets(eig.values, plant.spectrum, 1e-8));
}

TEST(PlantedPencil, SpectrumIsConjugateClosedExactly) {
  const auto plant = testutil::small_plant(31, 14, 7, {cx(1.0, 2.0), cx(-0.5, 0.0)});
  for (const cx& v : plant.spectrum) {
    if (v.imag() == 0.0) continue;
    EXPECT_NE(std::find(plant.spectrum.begin(), plant.spectrum.end(),
                        std::conj(v)),
              plant.spectrum.end())
        << "missing conjugate of " << v.real() << "+" << v.imag() << "i";
  }
}

TEST(PlantedPencil, SeedDeterminesEveryBit) {
  PlantSpec spec;
  spec.planted = {cx(0.4, 1.1)};
  spec.n_states = 16;
  spec.m_algebraic = 8;
  spec.density = 0.1;
  spec.seed = 77;

  const auto a = penceig::planted_pencil(spec);
  const auto b = penceig::planted_pencil(spec);
  EXPECT_EQ(a.spectrum, b.spectrum);
  EXPECT_EQ(a.pencil.l_diag(), b.pencil.l_diag());
  EXPECT_EQ(a.pencil.j().col_ptr(), b.pencil.j().col_ptr());
  EXPECT_EQ(a.pencil.j().row_idx(), b.pencil.j().row_idx());
  EXPECT_EQ(a.pencil.j().values(), b.pencil.j().values());

  spec.seed = 78;
  const auto c = penceig::planted_pencil(spec);
  EXPECT_NE(a.pencil.j().values(), c.pencil.j().values());
}

TEST(PlantedPencil, FillerValuesStayInLeftHalfPlane) {
  const auto plant = testutil::small_plant(99, 12, 6, {cx(1.0, 2.0)});
  ASSERT_EQ(plant.spectrum.size(), 12u);

  int planted_seen = 0;
  int big_reals = 0;
  for (const cx& v : plant.spectrum) {
    if (v == cx(1, 2) || v == cx(1, -2)) {
      ++planted_seen;
      continue;
    }
    EXPECT_LT(v.real(), 0.0);
    if (v.imag() == 0.0 && v.real() <= -10.0) ++big_reals;
  }
  EXPECT_EQ(planted_seen, 2);
  EXPECT_GE(big_reals, 3);
}

TEST(PlantedPencil, UnitDiagonalLeftSide) {
  const auto plant = testutil::small_plant(5, 9, 4, {cx(0.7, 0.0)});
  int ones = 0, zeros = 0;
  for (double d : plant.pencil.l_diag()) {
    if (d == 1.0)
      ++ones;
    else if (d == 0.0)
      ++zeros;
    else
      ADD_FAILURE() << "unexpected left diagonal entry " << d;
  }
  EXPECT_EQ(ones, 9);
  EXPECT_EQ(zeros, 4);
}

TEST(PlantedPencil, AlgebraicBlockIsDiagonallyDominant) {
  const auto plant = testutil::small_plant(123, 20, 10, {cx(0.2, 3.0)});
  const auto dense = penceig::to_dense(plant.pencil.j());
  const auto& alg = plant.pencil.algebraic_indices();
  for (int r : alg) {
    double diag = 0.0, off = 0.0;
    for (int c : alg) {
      if (c == r)
        diag = std::abs(dense.at(r, c));
      else
        off += std::abs(dense.at(r, c));
    }
    EXPECT_GE(diag, 2.0);
    EXPECT_LE(diag, 4.0);
    EXPECT_GE(diag - off, 0.99);
  }
}

TEST(PlantedPencil, ExactModeMakesSpectrumShiftsSingular) {
  for (uint64_t seed : {501u, 502u}) {
    const auto plant =
        testutil::small_plant(seed, 6, 3, {cx(0.5, 0.0)}, true);
    const auto state = plant.pencil.dense_state_matrix(500);
    const auto eig = penceig::eigen(state);
    EXPECT_TRUE(penceig::match_multisets(eig.values, plant.spectrum, 1e-10));
    for (const cx& lam : plant.spectrum) {
      EXPECT_THROW(penceig::SparseLU lu(plant.pencil.assemble_shifted(lam)),
                   penceig::SingularShift)
          << "seed " << seed << " at " << lam.real() << "+" << lam.imag()
          << "i";
    }
  }
}

TEST(PlantedPencil, RejectsInfeasibleSpecs) {
  PlantSpec spec;
  spec.planted = {cx(1, 0)};
  spec.n_states = 30;
  spec.m_algebraic = 0;
  spec.density = 0.001;
  EXPECT_THROW(penceig::planted_pencil(spec), penceig::StructuralError);

  spec.density = 1.5;
  EXPECT_THROW(penceig::planted_pencil(spec), penceig::StructuralError);

  spec.density = 0.5;
  spec.n_states = 1;
  spec.planted = {cx(1, 2)};
  EXPECT_THROW(penceig::planted_pencil(spec), penceig::StructuralError);

  spec.n_states = 4;
  spec.left_fill_lo = -1.0;
  spec.left_fill_hi = -2.0;
  EXPECT_THROW(penceig::planted_pencil(spec), penceig::StructuralError);

  spec.left_fill_lo = -2.0;
  spec.left_fill_hi = 0.5;
  EXPECT_THROW(penceig::planted_pencil(spec), penceig::StructuralError);
}

}  // namespace
