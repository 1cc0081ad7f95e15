#ifndef SHUBIN_QUANTIZER_HPP
#define SHUBIN_QUANTIZER_HPP

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "shubin/hermite.hpp"
#include "shubin/operator_matrix.hpp"
#include "shubin/parallel.hpp"
#include "shubin/quadrature.hpp"
#include "shubin/symbol.hpp"

// Left quantization in the Hermite basis:
//   K_{m,n} = (-i)^n / sqrt(2 pi) * int int e^{i x xi} a(x, xi) phi_n(xi) phi_m(x) dxi dx,
// the matrix <A phi_n, phi_m> of Au(x) = int e^{i x xi} a(x, xi) Fu(xi) dxi / (2 pi)
// with Fu(xi) = int e^{-i x xi} u(x) dx.

namespace shubin {

struct QuantizationConfig {
  double window = 0.0;        // half width L; 0 picks default_window(largest index)
  double panel_width = 0.5;   // used when panels == 0
  int panels = 0;
  int order_per_panel = 16;
  double tolerance = 1e-8;    // node-doubling disagreement ceiling per entry
  bool verify = true;         // run the doubled rule; off skips error estimates

  // Tensor rule for indices up to n_max; validates the node budget.
  QuadratureRule rule(int n_max) const {
    if (n_max < 0) throw std::invalid_argument("QuantizationConfig: negative index");
    if (n_max > kMaxHermiteIndex)
      throw std::invalid_argument("QuantizationConfig: index above " + std::to_string(kMaxHermiteIndex));
    const double L = window > 0.0 ? window : default_window(n_max);
    if (L < turning_point(n_max))
      throw std::invalid_argument("QuantizationConfig: window does not cover the turning point of index " +
                                  std::to_string(n_max));
    if (!(panel_width > 0.0) && panels <= 0) throw std::invalid_argument("QuantizationConfig: panel width must be positive");
    const int p = panels > 0 ? panels : static_cast<int>(std::ceil(2.0 * L / panel_width));
    QuadratureRule q = make_quadrature(L, p, order_per_panel);
    if (q.size() < static_cast<std::size_t>(4 * n_max + 32))
      throw std::invalid_argument("QuantizationConfig: " + std::to_string(q.size()) + " nodes per axis, need at least " +
                                  std::to_string(4 * n_max + 32));
    return q;
  }
};

struct QuantizedMatrix {
  OperatorMatrix matrix;        // values from the doubled rule when verify is on
  OperatorMatrix coarse;        // values from the base rule
  std::vector<double> error;    // |doubled - base| per computed entry, row-major
  double max_error = 0.0;
  std::size_t non_converged = 0;
  QuadratureRule rule;          // the base rule

  double error_at(std::size_t m, std::size_t n) const { return error[m * matrix.computed_cols() + n]; }
  double non_converged_fraction() const {
    return error.empty() ? 0.0 : static_cast<double>(non_converged) / static_cast<double>(error.size());
  }
};

namespace detail {

// Hermite table phi[node * (n_max+1) + k].
inline std::vector<double> hermite_table(const QuadratureRule& q, int n_max) {
  const std::size_t width = static_cast<std::size_t>(n_max) + 1;
  std::vector<double> table(q.size() * width);
  for (std::size_t i = 0; i < q.size(); ++i)
    hermite_functions(n_max, q.nodes[i], std::span<double>(table.data() + i * width, width));
  return table;
}

inline OperatorMatrix quantize_with(const Symbol& sym, std::size_t rows, std::size_t cols, std::size_t pad,
                                    const QuadratureRule& q) {
  const std::size_t R = rows + pad, C = cols + pad;
  const int n_max = static_cast<int>(std::max(R, C)) - 1;
  const std::size_t width = static_cast<std::size_t>(n_max) + 1;
  const std::vector<double> phi = hermite_table(q, n_max);
  const std::size_t Q = q.size();

  // Fixed-size blocks of x nodes reduced in block order: the result does not
  // depend on the thread count.
  constexpr std::size_t kBlock = 32;
  const std::size_t blocks = (Q + kBlock - 1) / kBlock;
  std::vector<std::vector<Complex>> partial(blocks);
  parallel_for(0, blocks, [&](std::size_t b) {
    std::vector<Complex> acc(R * C, Complex(0.0));
    std::vector<Complex> v(C);
    const std::size_t end = std::min(Q, (b + 1) * kBlock);
    for (std::size_t i = b * kBlock; i < end; ++i) {
      const double x = q.nodes[i];
      std::fill(v.begin(), v.end(), Complex(0.0));
      for (std::size_t j = 0; j < Q; ++j) {
        const double xi = q.nodes[j];
        const Complex g = q.weights[j] * std::polar(1.0, x * xi) * sym(x, xi);
        const double* row = phi.data() + j * width;
        for (std::size_t n = 0; n < C; ++n) v[n] += g * row[n];
      }
      const double* px = phi.data() + i * width;
      for (std::size_t m = 0; m < R; ++m) {
        const double wm = q.weights[i] * px[m];
        Complex* out = acc.data() + m * C;
        for (std::size_t n = 0; n < C; ++n) out[n] += wm * v[n];
      }
    }
    partial[b] = std::move(acc);
  });

  OperatorMatrix K(rows, cols, pad, Provenance::quantized);
  const double scale = 1.0 / std::sqrt(2.0 * std::numbers::pi);
  static constexpr Complex kPhase[4] = {{1.0, 0.0}, {0.0, -1.0}, {-1.0, 0.0}, {0.0, 1.0}};  // (-i)^n
  for (std::size_t m = 0; m < R; ++m)
    for (std::size_t n = 0; n < C; ++n) {
      Complex s = 0.0;
      for (std::size_t b = 0; b < blocks; ++b) s += partial[b][m * C + n];
      K(m, n) = scale * kPhase[n % 4] * s;
    }
  return K;
}

}  // namespace detail

// Matrix of the operator with left symbol a on indices 0..M x 0..N, plus pad
// extra rows and columns. Every computed entry is also evaluated with twice
// the panels; entries whose two values differ by more than cfg.tolerance are
// flagged on the returned matrix.
inline QuantizedMatrix quantize(const Symbol& sym, int M, int N, const QuantizationConfig& cfg = {},
                                std::size_t pad = 0) {
  if (M < 0 || N < 0) throw std::invalid_argument("quantize: negative truncation");
  const std::size_t rows = static_cast<std::size_t>(M) + 1, cols = static_cast<std::size_t>(N) + 1;
  const int n_max = static_cast<int>(std::max(rows, cols) + pad) - 1;
  QuantizedMatrix out;
  out.rule = cfg.rule(n_max);
  out.coarse = detail::quantize_with(sym, rows, cols, pad, out.rule);
  if (!cfg.verify) {
    out.matrix = out.coarse;
    return out;
  }
  out.matrix = detail::quantize_with(sym, rows, cols, pad, refined(out.rule));
  out.error.resize(out.matrix.data().size());
  for (std::size_t m = 0; m < out.matrix.computed_rows(); ++m)
    for (std::size_t n = 0; n < out.matrix.computed_cols(); ++n) {
      const double e = std::abs(out.matrix(m, n) - out.coarse(m, n));
      out.error[m * out.matrix.computed_cols() + n] = e;
      out.max_error = std::max(out.max_error, e);
      if (!(e <= cfg.tolerance)) {
        out.matrix.flag({m, n});
        ++out.non_converged;
      }
    }
  return out;
}

// Values on a tensor grid, values[i * ys.size() + j] at (xs[i], ys[j]).
struct Grid2d {
  std::vector<double> xs;
  std::vector<double> ys;
  std::vector<Complex> values;
  const Complex& at(std::size_t i, std::size_t j) const { return values[i * ys.size() + j]; }
};

// Schwartz kernel K(x, y) = sum_{m,n} K_{m,n} phi_m(x) phi_n(y) over the
// reported block.
inline Grid2d dequantize_kernel(const OperatorMatrix& K, std::span<const double> xs, std::span<const double> ys) {
  Grid2d g{{xs.begin(), xs.end()}, {ys.begin(), ys.end()}, std::vector<Complex>(xs.size() * ys.size())};
  if (K.rows() == 0 || K.cols() == 0) return g;
  const int rmax = static_cast<int>(K.rows()) - 1, cmax = static_cast<int>(K.cols()) - 1;
  std::vector<std::vector<double>> py(ys.size());
  for (std::size_t j = 0; j < ys.size(); ++j) py[j] = hermite_functions(cmax, ys[j]);
  parallel_for(0, xs.size(), [&](std::size_t i) {
    const std::vector<double> px = hermite_functions(rmax, xs[i]);
    std::vector<Complex> u(K.cols(), Complex(0.0));  // u_n = sum_m K_{m,n} phi_m(x)
    for (std::size_t m = 0; m < K.rows(); ++m)
      for (std::size_t n = 0; n < K.cols(); ++n) u[n] += K(m, n) * px[m];
    for (std::size_t j = 0; j < ys.size(); ++j) {
      Complex s = 0.0;
      for (std::size_t n = 0; n < K.cols(); ++n) s += u[n] * py[j][n];
      g.values[i * ys.size() + j] = s;
    }
  });
  return g;
}

// Recovers the left symbol a(x, xi) = int e^{-i(x-y) xi} K(x, y) dy from the
// reported block. The y-integral of each basis function, int e^{i y xi}
// phi_n(y) dy, is computed with quad.
inline Grid2d dequantize_symbol(const OperatorMatrix& K, std::span<const double> xs, std::span<const double> xis,
                                const QuadratureRule& quad) {
  Grid2d g{{xs.begin(), xs.end()}, {xis.begin(), xis.end()}, std::vector<Complex>(xs.size() * xis.size())};
  if (K.rows() == 0 || K.cols() == 0) return g;
  const int rmax = static_cast<int>(K.rows()) - 1, cmax = static_cast<int>(K.cols()) - 1;
  const std::vector<double> phi = detail::hermite_table(quad, cmax);
  const std::size_t width = static_cast<std::size_t>(cmax) + 1;

  // F[j][n] = int e^{i y xi_j} phi_n(y) dy
  std::vector<std::vector<Complex>> F(xis.size(), std::vector<Complex>(width));
  parallel_for(0, xis.size(), [&](std::size_t j) {
    for (std::size_t k = 0; k < quad.size(); ++k) {
      const Complex e = quad.weights[k] * std::polar(1.0, quad.nodes[k] * xis[j]);
      const double* row = phi.data() + k * width;
      for (std::size_t n = 0; n < width; ++n) F[j][n] += e * row[n];
    }
  });

  parallel_for(0, xs.size(), [&](std::size_t i) {
    const std::vector<double> px = hermite_functions(rmax, xs[i]);
    std::vector<Complex> u(K.cols(), Complex(0.0));
    for (std::size_t m = 0; m < K.rows(); ++m)
      for (std::size_t n = 0; n < K.cols(); ++n) u[n] += K(m, n) * px[m];
    for (std::size_t j = 0; j < xis.size(); ++j) {
      Complex s = 0.0;
      for (std::size_t n = 0; n < K.cols(); ++n) s += u[n] * F[j][n];
      g.values[i * xis.size() + j] = std::polar(1.0, -xs[i] * xis[j]) * s;
    }
  });
  return g;
}

// One-dimensional box_x on a padded matrix: the matrix of d a / d x computed
// from the matrix of a. Needs one row and column of pad; the result has none.
inline OperatorMatrix box_x_1d(const OperatorMatrix& K) {
  if (K.pad() < 1) throw std::invalid_argument("box_x_1d: needs one row and column of pad");
  OperatorMatrix out(K.rows(), K.cols(), K.pad() - 1, Provenance::composed);
  for (std::size_t m = 0; m < out.computed_rows(); ++m)
    for (std::size_t n = 0; n < out.computed_cols(); ++n) {
      const auto lm = static_cast<long>(m), ln = static_cast<long>(n);
      const double dm = static_cast<double>(m), dn = static_cast<double>(n);
      out(m, n) = std::sqrt((dn + 1.0) / 2.0) * K(m, n + 1) - std::sqrt(dn / 2.0) * K.at_or_zero(lm, ln - 1) +
                  std::sqrt((dm + 1.0) / 2.0) * K(m + 1, n) - std::sqrt(dm / 2.0) * K.at_or_zero(lm - 1, ln);
    }
  return out;
}

// Max entrywise |quantize(d a/dx) - box_x_1d(quantize(a))| on 0..M x 0..N.
// The two sides are independent quadratures of different symbols.
inline double quantize_derivative_check(const Symbol& sym, int M, int N, const QuantizationConfig& cfg = {}) {
  const QuantizedMatrix base = quantize(sym, M, N, cfg, 1);
  const QuantizedMatrix deriv = quantize(derivative_symbol(sym, 1, 0), M, N, cfg);
  const OperatorMatrix combined = box_x_1d(base.matrix);
  return max_abs_difference(combined, deriv.matrix, static_cast<std::size_t>(M) + 1, static_cast<std::size_t>(N) + 1);
}

// Max entrywise |2(m-n) quantize(a) - quantize(a~)| with a~ the oscillator
// conjugation of a.
inline double off_diagonal_check(const Symbol& sym, int M, int N, const QuantizationConfig& cfg = {}) {
  const QuantizedMatrix K = quantize(sym, M, N, cfg);
  const QuantizedMatrix T = quantize(oscillator_conjugation(sym), M, N, cfg);
  double worst = 0.0;
  for (int m = 0; m <= M; ++m)
    for (int n = 0; n <= N; ++n) {
      const auto um = static_cast<std::size_t>(m), un = static_cast<std::size_t>(n);
      worst = std::max(worst, std::abs(2.0 * (m - n) * K.matrix(um, un) - T.matrix(um, un)));
    }
  return worst;
}

}  // namespace shubin

#endif  // SHUBIN_QUANTIZER_HPP
