#include <cmath>
#include <random>
#include <vector>

#include <Eigen/Dense>
#include <gtest/gtest.h>

#include "shubin/matrix_calculus.hpp"

using namespace shubin;

namespace {

// Z phi_k = phi_{k-1}: ones on the superdiagonal (m = n - 1).
OperatorMatrix shift_matrix(std::size_t size, std::size_t pad) {
  OperatorMatrix K(size, size, pad, Provenance::analytic, std::size_t{1});
  for (std::size_t n = 1; n < K.computed_cols(); ++n) K(n - 1, n) = 1.0;
  return K;
}

OperatorMatrix diag_power(double s, std::size_t size, std::size_t pad = 0) {
  return diagonal_matrix(size, pad, [s](std::size_t n) { return std::pow(2.0 + 2.0 * n, s / 2.0); });
}

Eigen::MatrixXcd to_eigen(const OperatorMatrix& K) {
  Eigen::MatrixXcd E(K.rows(), K.cols());
  for (std::size_t m = 0; m < K.rows(); ++m)
    for (std::size_t n = 0; n < K.cols(); ++n) E(m, n) = K(m, n);
  return E;
}

OperatorMatrix random_matrix(std::size_t rows, std::size_t cols, unsigned seed) {
  std::mt19937 gen(seed);
  std::normal_distribution<double> dist;
  OperatorMatrix K(rows, cols);
  for (std::size_t m = 0; m < rows; ++m)
    for (std::size_t n = 0; n < cols; ++n) K(m, n) = Complex(dist(gen), dist(gen));
  return K;
}

}  // namespace

TEST(Delta, DiagonalExample) {
  const OperatorMatrix K = diag_power(1.0, 40, 2);
  const OperatorMatrix D = delta(K, 1);
  for (std::size_t n = 0; n < D.rows(); ++n)
    EXPECT_NEAR(std::abs(D(n, n) - (std::sqrt(4.0 + 2.0 * n) - std::sqrt(2.0 + 2.0 * n))), 0.0, 1e-14);
  // diagonal stays diagonal
  for (std::size_t m = 0; m < D.rows(); ++m)
    for (std::size_t n = 0; n < D.cols(); ++n)
      if (m != n) EXPECT_EQ(D(m, n), Complex(0.0));
}

TEST(Delta, ZeroOrderIsIdentity) {
  const OperatorMatrix K = random_matrix(6, 6, 1);
  EXPECT_EQ(max_abs_difference(delta(K, 0), K), 0.0);
}

TEST(Delta, ConstantMatrixVanishes) {
  const OperatorMatrix K = OperatorMatrix::generate(10, 10, 0, Provenance::analytic, [](auto, auto) { return 2.5; });
  const OperatorMatrix D = delta(K, 1);
  EXPECT_EQ(D.max_abs(), 0.0);
}

TEST(Delta, PadShrinksBeforeReportedBlock) {
  const OperatorMatrix K = random_matrix(10, 10, 2).leading(8, 8, 2);
  const OperatorMatrix D1 = delta(K, 1);
  EXPECT_EQ(D1.rows(), 8u);
  EXPECT_EQ(D1.pad(), 1u);
  const OperatorMatrix D3 = delta(K, 3);
  EXPECT_EQ(D3.rows(), 7u);
  EXPECT_EQ(D3.pad(), 0u);
  // hand oracle: second difference
  const OperatorMatrix D2 = delta(K, 2);
  EXPECT_NEAR(std::abs(D2(3, 4) - (K(5, 6) - 2.0 * K(4, 5) + K(3, 4))), 0.0, 1e-14);
}

TEST(Delta, Linear) {
  const OperatorMatrix A = random_matrix(9, 9, 3), B = random_matrix(9, 9, 4);
  const Complex a(2.0, -1.0), b(0.5, 3.0);
  const OperatorMatrix lhs = delta(linear_combination(a, A, b, B), 2);
  const OperatorMatrix rhs = linear_combination(a, delta(A, 2), b, delta(B, 2));
  EXPECT_LT(max_abs_difference(lhs, rhs), 1e-13);
}

TEST(Delta, RejectsBadOrders) {
  const OperatorMatrix K = random_matrix(4, 4, 5);
  EXPECT_THROW(delta(K, -1), std::invalid_argument);
  EXPECT_THROW(delta(K, 4), std::invalid_argument);
  EXPECT_NO_THROW(delta(K, 3));
}

TEST(Matmul, ShiftTimesAdjointIsIdentity) {
  const OperatorMatrix Z = shift_matrix(20, 2);
  const OperatorMatrix P = matmul(Z, Z.adjoint());
  ASSERT_GE(P.rows(), 20u);
  for (std::size_t m = 0; m < P.rows(); ++m)
    for (std::size_t n = 0; n < P.cols(); ++n) EXPECT_EQ(P(m, n), Complex(m == n ? 1.0 : 0.0));
  EXPECT_TRUE(P.flagged().empty());
}

TEST(Matmul, AdjointTimesShiftKillsGroundState) {
  const OperatorMatrix Z = shift_matrix(20, 2);
  const OperatorMatrix P = matmul(Z.adjoint(), Z);
  for (std::size_t m = 0; m < P.rows(); ++m)
    for (std::size_t n = 0; n < P.cols(); ++n)
      EXPECT_EQ(P(m, n), Complex(m == n && m > 0 ? 1.0 : 0.0)) << m << "," << n;
}

TEST(Matmul, DiagonalProduct) {
  const auto A = diagonal_matrix(12, 1, [](std::size_t n) { return 1.0 + n; });
  const auto B = diagonal_matrix(12, 1, [](std::size_t n) { return 2.0 - 0.5 * n; });
  const OperatorMatrix P = matmul(A, B);
  EXPECT_EQ(P.rows(), 12u);
  for (std::size_t n = 0; n < 12; ++n) EXPECT_EQ(P(n, n), Complex((1.0 + n) * (2.0 - 0.5 * n)));
  EXPECT_EQ(P.band(), std::size_t{0});
}

TEST(Matmul, DenseAgreesWithEigenAndFlagsLeakage) {
  const OperatorMatrix A = random_matrix(7, 7, 6), B = random_matrix(7, 7, 7);
  const OperatorMatrix P = matmul(A, B);
  const Eigen::MatrixXcd E = to_eigen(A) * to_eigen(B);
  for (std::size_t m = 0; m < 7; ++m)
    for (std::size_t n = 0; n < 7; ++n) EXPECT_NEAR(std::abs(P(m, n) - E(m, n)), 0.0, 1e-12);
  // dense random operands have large final terms everywhere
  EXPECT_EQ(P.flagged().size(), 49u);
}

TEST(Matmul, BandedTrustRegionIsExact) {
  // tridiagonal operands: reported entries must equal the untruncated product
  const std::size_t big = 40;
  const auto make = [](std::size_t size, std::size_t pad, double shift) {
    return OperatorMatrix::generate(
        size, size, pad, Provenance::analytic,
        [shift](std::size_t m, std::size_t n) {
          const long d = static_cast<long>(m) - static_cast<long>(n);
          return std::abs(d) <= 1 ? std::sqrt(1.0 + m + n) + shift * d : 0.0;
        },
        std::size_t{1});
  };
  const OperatorMatrix P = matmul(make(16, 2, 0.3), make(16, 2, -0.7));
  const OperatorMatrix Q = matmul(make(big, 0, 0.3), make(big, 0, -0.7));
  EXPECT_GE(P.rows(), 16u);
  EXPECT_EQ(P.band(), std::size_t{2});
  EXPECT_LT(max_abs_difference(P, Q, P.computed_rows(), P.computed_cols()), 1e-13);
}

TEST(Classify, ShiftMatrixIsOrderZero) {
  const OperatorMatrix Z = shift_matrix(64, 3);
  const ClassifierReport rep = classify(Z, 0.0, 2, 2);
  EXPECT_TRUE(rep.pass);
  const BandFit* f = rep.fit(0, -1);
  ASSERT_NE(f, nullptr);
  ASSERT_TRUE(f->slope.has_value());
  EXPECT_NEAR(*f->slope, 0.0, 1e-12);
  EXPECT_EQ(delta(Z, 1).max_abs(), 0.0);
  EXPECT_TRUE(rep.fit(1, -1)->insufficient);
  EXPECT_TRUE(rep.fit(0, 3)->insufficient);
}

TEST(Classify, DiagonalExamplePassesAtItsOrderOnly) {
  const OperatorMatrix K = diag_power(1.0, 96, 3);
  EXPECT_TRUE(classify(K, 0.5, 2, 2).pass);
  const ClassifierReport bad = classify(K, 0.0, 2, 2);
  EXPECT_FALSE(bad.pass);
  EXPECT_FALSE(bad.fit(0, 0)->pass);
  EXPECT_FALSE(bad.constant(0, 0)->stable);
}

TEST(Classify, CreationMatrixIsOrderHalf) {
  OperatorMatrix K(64, 64, 3, Provenance::analytic, std::size_t{1});
  for (std::size_t n = 0; n + 1 < K.computed_rows(); ++n) K(n + 1, n) = std::sqrt(n + 1.0);
  const ClassifierReport rep = classify(K, 0.5, 2, 2);
  EXPECT_TRUE(rep.pass);
  EXPECT_NEAR(*rep.fit(0, 1)->slope, 0.5, 0.05);
}

TEST(Classify, ReportCoversRequestedGrid) {
  const ClassifierReport rep = classify(diag_power(2.0, 48, 2), 1.0, 2, 3);
  EXPECT_EQ(rep.constants.size(), 3u * 4u);
  EXPECT_EQ(rep.fits.size(), 3u * 17u);
  for (int a = 0; a <= 2; ++a)
    for (int N = 0; N <= 3; ++N) EXPECT_NE(rep.constant(a, N), nullptr);
}

TEST(Classify, RejectsSmallTruncation) {
  EXPECT_THROW(classify(diag_power(1.0, 31, 0), 0.5, 1, 1), std::invalid_argument);
  EXPECT_THROW(classify(diag_power(1.0, 40, 0), 0.5, -1, 1), std::invalid_argument);
}

TEST(Classify, OrderCalculusOnGeneratedFamily) {
  for (double r : {-1.0, 0.0, 1.0}) {
    const OperatorMatrix K = generated_symbol_matrix(r, 6.0, 96, 3);
    ASSERT_TRUE(classify(K, r, 1, 2).pass) << r;
    EXPECT_TRUE(classify(delta(K, 1), r - 1.0, 1, 2).pass) << r;
  }
}

TEST(FitOrder, DiagonalExample) {
  for (double s : {-2.0, -1.0, 1.0, 2.0}) {
    const auto r = fit_order(diag_power(s, 128, 3));
    ASSERT_TRUE(r[0] && r[1]);
    EXPECT_NEAR(*r[0], s / 2.0, 0.05) << s;
    EXPECT_NEAR(*r[1], s / 2.0 - 1.0, 0.1) << s;
  }
}

TEST(FitOrder, IdentityHasUndefinedDifferenceOrder) {
  const auto r = fit_order(diagonal_matrix(64, 2, [](std::size_t) { return 1.0; }));
  ASSERT_TRUE(r[0]);
  EXPECT_NEAR(*r[0], 0.0, 1e-12);
  EXPECT_FALSE(r[1].has_value());
  EXPECT_FALSE(r[2].has_value());
}

TEST(FitOrder, HarmonicOscillator) {
  const auto r = fit_order(diagonal_matrix(64, 2, [](std::size_t n) { return 2.0 * n + 1.0; }));
  EXPECT_NEAR(*r[0], 1.0, 0.05);
}

TEST(SchurBound, Examples) {
  EXPECT_DOUBLE_EQ(schur_norm_bound(diagonal_matrix(10, 0, [](std::size_t) { return 1.0; })), 1.0);
  EXPECT_DOUBLE_EQ(schur_norm_bound(shift_matrix(10, 0)), 1.0);
  // rank one u v*: exact norm |u| |v|
  std::vector<double> u{1, -2, 3, 0.5}, v{2, 1, -1};
  const OperatorMatrix K =
      OperatorMatrix::generate(4, 3, 0, Provenance::composed, [&](std::size_t m, std::size_t n) { return u[m] * v[n]; });
  const double exact = std::sqrt(1 + 4 + 9 + 0.25) * std::sqrt(4 + 1 + 1.0);
  EXPECT_GE(schur_norm_bound(K), exact);
  EXPECT_NEAR(l2_norm(K), exact, 1e-10 * exact);
}

TEST(L2Norm, Examples) {
  EXPECT_NEAR(l2_norm(OperatorMatrix::from_rows({{3.0, 0.0}, {0.0, 1.0}})), 3.0, 1e-12);
  EXPECT_NEAR(l2_norm(shift_matrix(12, 0)), 1.0, 1e-12);
  EXPECT_EQ(l2_norm(OperatorMatrix(5, 5)), 0.0);
}

TEST(L2Norm, AgreesWithSvdOracle) {
  for (unsigned seed = 10; seed < 20; ++seed) {
    const OperatorMatrix K = random_matrix(8, 8, seed);
    const double oracle = Eigen::JacobiSVD<Eigen::MatrixXcd>(to_eigen(K)).singularValues()(0);
    EXPECT_NEAR(l2_norm(K), oracle, 1e-8 * oracle) << seed;
    EXPECT_GE(schur_norm_bound(K), oracle * (1 - 1e-12));
  }
}

TEST(FrobeniusTail, PSeries) {
  const auto K = diagonal_matrix(32, 0, [](std::size_t n) { return 1.0 / (1.0 + n); });
  const std::vector<std::size_t> blocks{8, 16, 32};
  const auto sums = frobenius_tail(K, blocks);
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    double p = 0.0;
    for (std::size_t n = 0; n < blocks[i]; ++n) p += 1.0 / ((1.0 + n) * (1.0 + n));
    EXPECT_NEAR(sums[i], p, 1e-14);
  }
  const auto inc = tail_increments(sums);
  EXPECT_LT(inc[1], inc[0]);
}

TEST(FrobeniusTail, IdentityDiverges) {
  const auto K = diagonal_matrix(32, 0, [](std::size_t) { return 1.0; });
  const std::vector<std::size_t> blocks{8, 16, 32};
  const auto inc = tail_increments(frobenius_tail(K, blocks));
  EXPECT_DOUBLE_EQ(inc[0], 8.0);
  EXPECT_DOUBLE_EQ(inc[1], 16.0);
}

TEST(FrobeniusTail, GeneratedNegativeOrderConverges) {
  const OperatorMatrix K = generated_symbol_matrix(-0.75, 4.0, 128);
  const std::vector<std::size_t> blocks{16, 32, 64, 128};
  const auto inc = tail_increments(frobenius_tail(K, blocks));
  for (std::size_t i = 1; i < inc.size(); ++i) EXPECT_LT(inc[i], inc[i - 1]);
}

TEST(FrobeniusTail, RejectsBadBlocks) {
  const OperatorMatrix K = generated_symbol_matrix(0.0, 2.0, 16);
  EXPECT_THROW(frobenius_tail(K, std::vector<std::size_t>{8, 4}), std::invalid_argument);
  EXPECT_THROW(frobenius_tail(K, std::vector<std::size_t>{8, 32}), std::invalid_argument);
}

TEST(PointwiseMul, UnitMultiplierIsIdentity) {
  const OperatorMatrix K = random_matrix(6, 6, 30);
  EXPECT_EQ(max_abs_difference(pointwise_mul(K, [](auto, auto) { return 1.0; }), K), 0.0);
}

TEST(PointwiseMul, ProductRuleRaisesOrder) {
  const OperatorMatrix K = generated_symbol_matrix(0.5, 6.0, 96, 3);
  ASSERT_TRUE(classify(K, 0.5, 2, 2).pass);
  for (double s : {-1.0, 1.0}) {
    const OperatorMatrix P =
        pointwise_mul(K, [s](std::size_t m, std::size_t n) { return std::pow(1.0 + m + n, s); });
    EXPECT_TRUE(classify(P, 0.5 + s, 2, 2).pass) << s;
  }
}

TEST(PointwiseMul, LadderMultiplierKeepsOrder) {
  const auto g = [](std::size_t m, std::size_t n) { return std::sqrt((n + 1.0) / 2.0) - std::sqrt(m / 2.0); };
  // On the first subdiagonal m = n + 1 the multiplier vanishes identically.
  OperatorMatrix K(96, 96, 3, Provenance::analytic, std::size_t{1});
  for (std::size_t n = 0; n + 1 < K.computed_rows(); ++n) K(n + 1, n) = std::pow(2.0 + 2.0 * n, 0.5);
  EXPECT_EQ(pointwise_mul(K, g).max_abs(), 0.0);
  // Elsewhere it is bounded and smooth along diagonals: order is not raised.
  const OperatorMatrix D = diag_power(1.0, 96, 3);
  EXPECT_TRUE(classify(pointwise_mul(D, g), 0.5, 2, 2).pass);
  const OperatorMatrix G = generated_symbol_matrix(0.5, 6.0, 96, 3);
  EXPECT_TRUE(classify(pointwise_mul(G, g), 0.5, 2, 2).pass);
}
