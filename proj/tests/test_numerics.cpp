#include "test_util.hpp"
#include <gtest/gtest.h>

using namespace cfolab;
using cfolab::testing::max_abs_diff;
using cfolab::testing::random_vector;

TEST(Dft, ImpulseIsFlat) {
  ComplexVector x = ComplexVector::Zero(4);
  x[0] = 1.0;
  const ComplexVector y = dft(x);
  for (int k = 0; k < 4; ++k) EXPECT_NEAR(std::abs(y[k] - Complex(0.5, 0.0)), 0.0, 1e-15);
}

TEST(Dft, ConstantIsScaledImpulse) {
  const ComplexVector y = dft(ComplexVector::Ones(4));
  EXPECT_NEAR(std::abs(y[0] - Complex(2.0, 0.0)), 0.0, 1e-15);
  for (int k = 1; k < 4; ++k) EXPECT_NEAR(std::abs(y[k]), 0.0, 1e-15);
}

TEST(Dft, InverseRoundTrip) {
  const ComplexVector x = random_vector(16, 1);
  EXPECT_LT(max_abs_diff(dft(dft(x), true), x), 1e-12);
}

TEST(Dft, ParsevalAcrossLengths) {
  for (int n : {1, 2, 3, 12, 64, 1024}) {
    const ComplexVector x = random_vector(n, static_cast<std::uint64_t>(n));
    EXPECT_NEAR(dft(x).squaredNorm() / x.squaredNorm(), 1.0, 1e-12) << "n=" << n;
  }
}

TEST(Dft, Radix2MatchesDirect) {
  for (int n : {2, 8, 64, 256}) {
    const ComplexVector x = random_vector(n, 7);
    EXPECT_LT(max_abs_diff(dft(x), dft_direct(x)), 1e-12 * std::sqrt(n));
    EXPECT_LT(max_abs_diff(dft(x, true), dft_direct(x, true)), 1e-12 * std::sqrt(n));
  }
}

TEST(Dft, MatrixIsUnitary) {
  const ComplexMatrix f = dft_matrix(16);
  EXPECT_LT((f * f.adjoint() - ComplexMatrix::Identity(16, 16)).cwiseAbs().maxCoeff(), 1e-13);
  const ComplexVector x = random_vector(16, 3);
  EXPECT_LT(max_abs_diff(f * x, dft(x)), 1e-13);
}

TEST(PhaseRamp, Examples) {
  EXPECT_LT(max_abs_diff(phase_ramp(4, 0.0, 8), ComplexVector::Ones(4)), 1e-15);
  const ComplexVector r = phase_ramp(2, 2.0, 8);
  EXPECT_NEAR(std::abs(r[0] - Complex(1, 0)), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(r[1] - Complex(0, 1)), 0.0, 1e-15);
  EXPECT_LT(max_abs_diff(phase_ramp(16, 16.0, 16), ComplexVector::Ones(16)), 1e-12);
}

TEST(CyclicShift, Examples) {
  ComplexVector x(4);
  x << 1.0, 2.0, 3.0, 4.0;
  ComplexVector expected(4);
  expected << 4.0, 1.0, 2.0, 3.0;
  EXPECT_EQ(cyclic_shift(x, 1), expected);
  EXPECT_EQ(cyclic_shift(x, 0), x);
  EXPECT_EQ(cyclic_shift(x, 4), x);
  EXPECT_EQ(cyclic_shift(x, -1), cyclic_shift(x, 3));
}

TEST(CyclicShift, Composition) {
  const ComplexVector x = random_vector(11, 5);
  for (int a : {0, 3, -7, 20})
    for (int b : {1, -4, 11})
      EXPECT_EQ(cyclic_shift(cyclic_shift(x, a), b), cyclic_shift(x, a + b));
}

TEST(HermitianDefect, DetectsAsymmetry) {
  ComplexMatrix a = ComplexMatrix::Random(5, 5);
  const ComplexMatrix h = a * a.adjoint();
  EXPECT_LE(hermitian_defect(h), 1e-12 * h.cwiseAbs().maxCoeff());
  EXPECT_GT(hermitian_defect(a), 1e-3);
}

TEST(RandomSource, Reproducible) {
  RandomSource a(42, 7);
  RandomSource b(42, 7);
  for (int i = 0; i < 100; ++i) {
    EXPECT_EQ(a.next_u64(), b.next_u64());
    const Complex ca = a.complex_gaussian(2.0);
    const Complex cb = b.complex_gaussian(2.0);
    EXPECT_EQ(ca, cb);
  }
}

TEST(RandomSource, StreamsDiffer) {
  RandomSource a(42, RandomSource::stream(1, 1));
  RandomSource b(42, RandomSource::stream(1, 2));
  RandomSource c(43, RandomSource::stream(1, 1));
  const auto va = a.next_u64();
  EXPECT_NE(va, b.next_u64());
  EXPECT_NE(va, c.next_u64());
}

TEST(RandomSource, ComplexGaussianMoments) {
  RandomSource rng(3, 0);
  const int n = 200000;
  double power = 0.0;
  double re2 = 0.0;
  Complex mean = 0.0;
  for (int i = 0; i < n; ++i) {
    const Complex v = rng.complex_gaussian(2.0);
    power += std::norm(v);
    re2 += v.real() * v.real();
    mean += v;
  }
  EXPECT_NEAR(power / n, 2.0, 0.03);
  EXPECT_NEAR(re2 / n, 1.0, 0.02);
  EXPECT_LT(std::abs(mean / static_cast<double>(n)), 0.01);
}
