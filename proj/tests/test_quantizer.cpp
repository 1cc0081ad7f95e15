#include <cmath>
#include <numbers>
#include <vector>

#include <gtest/gtest.h>

#include "shubin/expression.hpp"
#include "shubin/operator_algebra.hpp"
#include "shubin/quantizer.hpp"

using namespace shubin;

namespace {

const Complex I(0.0, 1.0);

// Matrix of -i d/dx from the ladder relations, independent of the quantizer.
OperatorMatrix frequency_matrix(int M, int N, std::size_t pad = 0) {
  return OperatorMatrix::generate(M + 1, N + 1, pad, Provenance::analytic, [](std::size_t m, std::size_t n) {
    const double dn = static_cast<double>(n);
    if (m + 1 == n) return Complex(0.0, -std::sqrt(dn / 2.0));
    if (m == n + 1) return Complex(0.0, std::sqrt((dn + 1.0) / 2.0));
    return Complex(0.0);
  });
}

}  // namespace

TEST(Quantize, ConstantIsIdentity) {
  const QuantizedMatrix q = quantize(constant_symbol(1.0), 20, 20);
  const OperatorMatrix Id = matrix_of(NamedOperator::identity(), 20, 20);
  EXPECT_LT(max_abs_difference(q.matrix, Id), 1e-8);
  EXPECT_EQ(q.non_converged, 0u);
  EXPECT_EQ(q.matrix.provenance(), Provenance::quantized);
}

TEST(Quantize, PositionIsMultiplication) {
  const QuantizedMatrix q = quantize(position_symbol(), 24, 24);
  EXPECT_LT(max_abs_difference(q.matrix, matrix_of(NamedOperator::multiply_x(), 24, 24)), 1e-7);
}

TEST(Quantize, FrequencyIsMinusIDerivative) {
  const QuantizedMatrix q = quantize(frequency_symbol(), 20, 20);
  EXPECT_LT(max_abs_difference(q.matrix, frequency_matrix(20, 20)), 1e-7);
  // and -i times the derivative matrix
  const OperatorMatrix D = matrix_of(NamedOperator::derivative_x(), 20, 20);
  EXPECT_LT(max_abs_difference(q.matrix, linear_combination(-I, D, 0.0, D)), 1e-7);
}

TEST(Quantize, HarmonicOscillator) {
  const QuantizedMatrix q = quantize(parse_symbol("x^2 + xi^2"), 24, 24);
  EXPECT_LT(max_abs_difference(q.matrix, matrix_of(NamedOperator::harmonic(), 24, 24)), 1e-7);
}

TEST(Quantize, LeftQuantizationOrdersPositionFirst) {
  // Op(x xi) = x (-i d/dx): product of the exact matrices
  const int T = 16;
  const QuantizedMatrix q = quantize(parse_symbol("x*xi"), T, T);
  const OperatorMatrix X = matrix_of(NamedOperator::multiply_x(), T, T, 2);
  const OperatorMatrix P = matmul(X, frequency_matrix(T, T, 2));
  EXPECT_LT(max_abs_difference(q.matrix, P, T + 1, T + 1), 1e-7);
}

TEST(Quantize, EvenSymbolsPreserveParity) {
  const QuantizedMatrix q = quantize(harmonic_symbol(-1.0), 20, 20);
  for (std::size_t m = 0; m <= 20; ++m)
    for (std::size_t n = 0; n <= 20; ++n)
      if ((m + n) % 2 == 1) EXPECT_LT(std::abs(q.matrix(m, n)), 1e-10) << m << "," << n;
}

TEST(Quantize, SeparatedRealSymbolIsHermitian) {
  const QuantizedMatrix q = quantize(parse_symbol("x^2 + xi^4"), 16, 16);
  const OperatorMatrix A = q.matrix.adjoint();
  EXPECT_LT(max_abs_difference(q.matrix, A), 1e-7);
}

TEST(Quantize, RadialSymbolIsDiagonalDominant) {
  // jb(2) = 1 + x^2 + xi^2 quantizes to diag(2n + 2)
  const QuantizedMatrix q = quantize(harmonic_symbol(2.0), 16, 16);
  const OperatorMatrix expect = diagonal_matrix(17, 0, [](std::size_t n) { return 2.0 * n + 2.0; });
  EXPECT_LT(max_abs_difference(q.matrix, expect), 1e-7);
}

TEST(Quantize, ErrorEstimateTracksBaseRule) {
  const QuantizedMatrix q = quantize(harmonic_symbol(1.0), 12, 12);
  ASSERT_EQ(q.error.size(), q.matrix.data().size());
  for (std::size_t m = 0; m <= 12; ++m)
    for (std::size_t n = 0; n <= 12; ++n)
      EXPECT_DOUBLE_EQ(q.error_at(m, n), std::abs(q.matrix(m, n) - q.coarse(m, n)));
  EXPECT_LT(q.max_error, 1e-8);
  EXPECT_EQ(q.non_converged_fraction(), 0.0);
}

TEST(Quantize, CoarseRuleFlagsNonConvergence) {
  QuantizationConfig cfg;
  cfg.panels = 8;
  cfg.order_per_panel = 16;
  cfg.window = 10.0;
  const QuantizedMatrix q = quantize(parse_symbol("x^2 + xi^2"), 20, 20, cfg);
  EXPECT_GT(q.non_converged, 0u);
  EXPECT_EQ(q.matrix.flagged().size(), q.non_converged);
}

TEST(Quantize, VerifyOffSkipsEstimates) {
  QuantizationConfig cfg;
  cfg.verify = false;
  const QuantizedMatrix q = quantize(constant_symbol(1.0), 8, 8, cfg);
  EXPECT_TRUE(q.error.empty());
  EXPECT_EQ(max_abs_difference(q.matrix, q.coarse), 0.0);
}

TEST(Quantize, PaddedEntriesAreComputed) {
  const QuantizedMatrix q = quantize(position_symbol(), 10, 10, {}, 2);
  EXPECT_EQ(q.matrix.pad(), 2u);
  EXPECT_NEAR(std::abs(q.matrix(12, 11) - std::sqrt(6.0)), 0.0, 1e-8);
}

TEST(Quantize, RectangularBlock) {
  const QuantizedMatrix q = quantize(position_symbol(), 6, 10);
  EXPECT_EQ(q.matrix.rows(), 7u);
  EXPECT_EQ(q.matrix.cols(), 11u);
  EXPECT_NEAR(std::abs(q.matrix(6, 7) - std::sqrt(3.5)), 0.0, 1e-8);
}

TEST(Quantize, IndependentOfThreadCount) {
  const int saved = thread_count();
  set_thread_count(1);
  const QuantizedMatrix a = quantize(harmonic_symbol(-1.0), 16, 16);
  set_thread_count(4);
  const QuantizedMatrix b = quantize(harmonic_symbol(-1.0), 16, 16);
  set_thread_count(saved);
  for (std::size_t i = 0; i < a.matrix.data().size(); ++i) EXPECT_EQ(a.matrix.data()[i], b.matrix.data()[i]);
}

TEST(QuantizationConfig, Validation) {
  QuantizationConfig cfg;
  EXPECT_THROW(cfg.rule(129), std::invalid_argument);
  EXPECT_THROW(cfg.rule(-1), std::invalid_argument);
  EXPECT_NO_THROW(cfg.rule(128));
  cfg.window = 3.0;
  EXPECT_THROW(cfg.rule(20), std::invalid_argument);  // turning point sqrt(41)
  cfg.window = 0.0;
  cfg.panels = 2;
  cfg.order_per_panel = 8;
  EXPECT_THROW(cfg.rule(10), std::invalid_argument);  // 16 nodes < 72
  EXPECT_THROW(quantize(constant_symbol(1.0), -1, 3), std::invalid_argument);
}

TEST(OffDiagonalCheck, ConjugationMatchesIndexGap) {
  EXPECT_LT(off_diagonal_check(harmonic_symbol(1.0), 16, 16), 1e-6);
  EXPECT_LT(off_diagonal_check(position_symbol(), 12, 12), 1e-6);
  EXPECT_LT(off_diagonal_check(parse_symbol("x*xi"), 12, 12), 1e-6);
}

TEST(DerivativeCheck, BoxCombinationIsXDerivative) {
  EXPECT_LT(quantize_derivative_check(position_symbol(), 16, 16), 1e-6);
  EXPECT_LT(quantize_derivative_check(harmonic_symbol(1.0), 16, 16), 1e-6);
  EXPECT_LT(quantize_derivative_check(parse_symbol("x^2*xi"), 12, 12), 1e-6);
}

TEST(BoxX1d, NeedsPad) {
  EXPECT_THROW(box_x_1d(OperatorMatrix(4, 4, 0)), std::invalid_argument);
  // exact position matrix: d x / dx = 1
  const OperatorMatrix B = box_x_1d(matrix_of(NamedOperator::multiply_x(), 10, 10, 1));
  EXPECT_LT(max_abs_difference(B, matrix_of(NamedOperator::identity(), 10, 10)), 1e-13);
}

TEST(DequantizeKernel, IdentityReproducesProjection) {
  // sum_n phi_n(x) phi_n(y) at x = y is the truncated density
  const OperatorMatrix Id = matrix_of(NamedOperator::identity(), 9, 9);
  const std::vector<double> xs{-1.0, 0.0, 0.7};
  const Grid2d g = dequantize_kernel(Id, xs, xs);
  for (std::size_t i = 0; i < xs.size(); ++i) {
    double expect = 0.0;
    for (int n = 0; n < 10; ++n) expect += hermite_function(n, xs[i]) * hermite_function(n, xs[i]);
    EXPECT_NEAR(std::abs(g.at(i, i) - expect), 0.0, 1e-14);
  }
}

TEST(DequantizeSymbol, DenseMatrixMatchesEigenfunctionTransform) {
  // F phi_n = sqrt(2 pi) i^n phi_n gives a closed form for any finite matrix
  const int T = 12;
  OperatorMatrix K(T, T);
  for (int m = 0; m < T; ++m)
    for (int n = 0; n < T; ++n) K(m, n) = Complex(std::sin(1.0 + m + 2.0 * n), std::cos(3.0 * m - n));
  const std::vector<double> xs{-2.0, -0.4, 0.0, 1.3}, xis{-1.5, 0.2, 2.5};
  const Grid2d g = dequantize_symbol(K, xs, xis, default_quadrature(T - 1));
  for (std::size_t i = 0; i < xs.size(); ++i)
    for (std::size_t j = 0; j < xis.size(); ++j) {
      Complex sum = 0.0;
      for (int m = 0; m < T; ++m)
        for (int n = 0; n < T; ++n)
          sum += K(m, n) * hermite_function(m, xs[i]) * std::pow(I, n) * hermite_function(n, xis[j]);
      const Complex expect = std::polar(1.0, -xs[i] * xis[j]) * std::sqrt(2.0 * std::numbers::pi) * sum;
      EXPECT_NEAR(std::abs(g.at(i, j) - expect), 0.0, 1e-11) << xs[i] << "," << xis[j];
    }
}

TEST(DequantizeSymbol, BasisFourierTransformOracle) {
  // A rank-one matrix e_0 e_0^T: a = e^{-ix xi} phi_0(x) F phi_0(xi), closed form
  OperatorMatrix K(1, 1);
  K(0, 0) = 1.0;
  const QuadratureRule quad = default_quadrature(4);
  const std::vector<double> xs{-0.5, 0.3}, xis{-1.2, 0.4};
  const Grid2d g = dequantize_symbol(K, xs, xis, quad);
  for (std::size_t i = 0; i < xs.size(); ++i)
    for (std::size_t j = 0; j < xis.size(); ++j) {
      const double x = xs[i], xi = xis[j];
      const Complex expect = std::polar(1.0, -x * xi) * hermite_function(0, x) * std::sqrt(2.0 * std::numbers::pi) *
                             hermite_function(0, xi);
      EXPECT_NEAR(std::abs(g.at(i, j) - expect), 0.0, 1e-13);
    }
}

TEST(DequantizeSymbol, RoundtripConvergesWithTruncation) {
  const Symbol a = harmonic_symbol(-2.0);
  std::vector<double> pts;
  for (int k = 0; k <= 12; ++k) pts.push_back(-3.0 + 0.5 * k);
  const auto rel_error = [&](int T) {
    const QuantizedMatrix q = quantize(a, T - 1, T - 1);
    const Grid2d g = dequantize_symbol(q.matrix, pts, pts, default_quadrature(T - 1));
    double worst = 0.0;
    for (std::size_t i = 0; i < pts.size(); ++i)
      for (std::size_t j = 0; j < pts.size(); ++j) {
        const double exact = a(pts[i], pts[j]).real();
        worst = std::max(worst, std::abs(g.at(i, j) - exact) / std::abs(exact));
      }
    return worst;
  };
  const double e48 = rel_error(48), e96 = rel_error(96);
  EXPECT_LT(e48, 2e-2);
  EXPECT_LT(e96, 0.5 * e48);
}
