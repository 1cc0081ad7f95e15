#ifndef SHUBIN_MATRIX_CALCULUS_HPP
#define SHUBIN_MATRIX_CALCULUS_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "shubin/operator_matrix.hpp"
#include "shubin/parallel.hpp"
#include "shubin/regression.hpp"

namespace shubin {

// Delta^alpha K with (Delta K)(m, n) = K(m+1, n+1) - K(m, n).
//
// Each difference consumes one computed row and column: the pad shrinks first,
// then the reported block. Entries that would reference indices beyond the
// computed block are dropped, never zero-filled.
inline OperatorMatrix delta(const OperatorMatrix& K, int alpha) {
  if (alpha < 0) throw std::invalid_argument("delta: alpha must be >= 0");
  if (alpha == 0) return K;
  const auto a = static_cast<std::size_t>(alpha);
  if (a >= K.computed_rows() || a >= K.computed_cols())
    throw std::invalid_argument("delta: alpha exceeds the available truncation");

  OperatorMatrix cur = K;
  for (std::size_t step = 0; step < a; ++step) {
    const std::size_t pad = cur.pad() > 0 ? cur.pad() - 1 : 0;
    const std::size_t rows = cur.computed_rows() - 1 - pad;
    const std::size_t cols = cur.computed_cols() - 1 - pad;
    OperatorMatrix next(rows, cols, pad, Provenance::composed, cur.band());
    for (std::size_t m = 0; m < next.computed_rows(); ++m)
      for (std::size_t n = 0; n < next.computed_cols(); ++n) next(m, n) = cur(m + 1, n + 1) - cur(m, n);
    cur = std::move(next);
  }
  return cur;
}

struct MatmulOptions {
  double leakage_tolerance = 1e-9;  // flag when the last summed terms exceed this
};

// Truncated product (AB)_{m,n} = sum_k A_{m,k} B_{k,n} over the shared inner
// range. The reported block keeps only entries whose sum is complete: with a
// band hint on A (resp. B) every row m < K - band_A (resp. column
// n < K - band_B) is exact. Without band hints the whole block is kept and
// entries whose final terms exceed the leakage tolerance are flagged.
inline OperatorMatrix matmul(const OperatorMatrix& A, const OperatorMatrix& B, const MatmulOptions& opt = {}) {
  const std::size_t inner = std::min(A.computed_cols(), B.computed_rows());
  if (inner == 0) throw std::invalid_argument("matmul: empty inner dimension");
  const std::size_t ra = A.computed_rows();
  const std::size_t cb = B.computed_cols();

  std::size_t trusted_rows = ra;
  std::size_t trusted_cols = cb;
  const auto clamp_sub = [](std::size_t n, std::size_t w) { return n > w ? n - w : 0; };
  if (A.band() && B.band()) {
    const std::size_t rows_only = std::min(ra, clamp_sub(inner, *A.band()));
    const std::size_t cols_only = std::min(cb, clamp_sub(inner, *B.band()));
    // Either rectangle is exact on its own; keep whichever leaves more pad.
    const auto pad_of = [&](std::size_t tr, std::size_t tc) -> long {
      return std::min(static_cast<long>(tr) - static_cast<long>(A.rows()),
                      static_cast<long>(tc) - static_cast<long>(B.cols()));
    };
    if (pad_of(rows_only, cb) >= pad_of(ra, cols_only)) {
      trusted_rows = rows_only;
    } else {
      trusted_cols = cols_only;
    }
  } else if (A.band()) {
    trusted_rows = std::min(ra, clamp_sub(inner, *A.band()));
  } else if (B.band()) {
    trusted_cols = std::min(cb, clamp_sub(inner, *B.band()));
  }

  const std::size_t rows = std::min(A.rows(), trusted_rows);
  const std::size_t cols = std::min(B.cols(), trusted_cols);
  const std::size_t pad = std::min(trusted_rows - rows, trusted_cols - cols);
  std::optional<std::size_t> band;
  if (A.band() && B.band()) band = *A.band() + *B.band();
  OperatorMatrix C(rows, cols, pad, Provenance::composed, band);

  const std::size_t tail = std::min<std::size_t>(2, inner);
  std::vector<std::vector<EntryIndex>> leaks(C.computed_rows());
  parallel_for(0, C.computed_rows(), [&](std::size_t m) {
    for (std::size_t n = 0; n < C.computed_cols(); ++n) {
      std::size_t lo = 0, reach = inner + 1;  // reach: one past the last nonzero term, if known
      if (A.band()) {
        lo = std::max(lo, clamp_sub(m, *A.band()));
        reach = std::min(reach, m + *A.band() + 1);
      }
      if (B.band()) {
        lo = std::max(lo, clamp_sub(n, *B.band()));
        reach = std::min(reach, n + *B.band() + 1);
      }
      const std::size_t hi = std::min(reach, inner);
      Complex sum = 0.0;
      for (std::size_t k = lo; k < hi; ++k) sum += A(m, k) * B(k, n);
      C(m, n) = sum;
      // A band window that closes inside the inner range is a complete sum.
      if (m < rows && n < cols && reach > inner) {
        double last = 0.0;
        for (std::size_t k = inner - tail; k < inner; ++k) last = std::max(last, std::abs(A(m, k) * B(k, n)));
        if (last > opt.leakage_tolerance) leaks[m].push_back({m, n});
      }
    }
  });
  std::vector<EntryIndex> flags;
  for (auto& row : leaks) flags.insert(flags.end(), row.begin(), row.end());
  C.set_flags(std::move(flags));
  return C;
}

// Entrywise product with g(m, n) over the computed block.
template <class G>
OperatorMatrix pointwise_mul(const OperatorMatrix& K, G&& g) {
  OperatorMatrix out(K.rows(), K.cols(), K.pad(), Provenance::composed, K.band());
  for (std::size_t m = 0; m < K.computed_rows(); ++m)
    for (std::size_t n = 0; n < K.computed_cols(); ++n) out(m, n) = K(m, n) * Complex(g(m, n));
  return out;
}

// sqrt(max row sum * max column sum) of |K| over the reported block: the
// Schur-test bound on the l2 operator norm.
inline double schur_norm_bound(const OperatorMatrix& K) {
  double row_max = 0.0;
  std::vector<double> col_sum(K.cols(), 0.0);
  for (std::size_t m = 0; m < K.rows(); ++m) {
    double row = 0.0;
    for (std::size_t n = 0; n < K.cols(); ++n) {
      const double v = std::abs(K(m, n));
      row += v;
      col_sum[n] += v;
    }
    row_max = std::max(row_max, row);
  }
  const double col_max = col_sum.empty() ? 0.0 : *std::max_element(col_sum.begin(), col_sum.end());
  return std::sqrt(row_max * col_max);
}

struct PowerIterationOptions {
  int max_iterations = 20000;
  double relative_tolerance = 1e-14;
  int stable_iterations = 3;
};

// Largest singular value of the reported block by power iteration on K*K.
// Starts from the unit vector of the heaviest column plus a fixed
// perturbation, so results are deterministic.
inline double l2_norm(const OperatorMatrix& K, const PowerIterationOptions& opt = {}) {
  const std::size_t rows = K.rows(), cols = K.cols();
  if (rows == 0 || cols == 0) return 0.0;

  const auto apply = [&](std::span<const Complex> v, std::span<Complex> out) {
    for (std::size_t m = 0; m < rows; ++m) {
      Complex s = 0.0;
      for (std::size_t n = 0; n < cols; ++n) s += K(m, n) * v[n];
      out[m] = s;
    }
  };
  const auto apply_adjoint = [&](std::span<const Complex> w, std::span<Complex> out) {
    std::fill(out.begin(), out.end(), Complex(0.0));
    for (std::size_t m = 0; m < rows; ++m)
      for (std::size_t n = 0; n < cols; ++n) out[n] += std::conj(K(m, n)) * w[m];
  };
  const auto norm = [](std::span<const Complex> v) {
    double s = 0.0;
    for (const auto& z : v) s += std::norm(z);
    return std::sqrt(s);
  };

  std::size_t heaviest = 0;
  double heaviest_norm = -1.0;
  for (std::size_t n = 0; n < cols; ++n) {
    double s = 0.0;
    for (std::size_t m = 0; m < rows; ++m) s += std::norm(K(m, n));
    if (s > heaviest_norm) {
      heaviest_norm = s;
      heaviest = n;
    }
  }
  if (heaviest_norm <= 0.0) return 0.0;

  std::vector<Complex> v(cols), w(rows);
  for (std::size_t n = 0; n < cols; ++n) v[n] = 1e-3 / (1.0 + static_cast<double>(n));
  v[heaviest] += 1.0;

  double sigma = 0.0;
  int stable = 0;
  for (int it = 0; it < opt.max_iterations; ++it) {
    const double vn = norm(v);
    for (auto& z : v) z /= vn;
    apply(v, w);
    const double next = norm(w);
    if (next == 0.0) break;
    const double change = std::abs(next - sigma) / next;
    sigma = next;
    if (change < opt.relative_tolerance) {
      if (++stable >= opt.stable_iterations) break;
    } else {
      stable = 0;
    }
    apply_adjoint(w, v);
  }
  return sigma;
}

// Sum of |K_{m,n}|^2 over each leading b x b block.
inline std::vector<double> frobenius_tail(const OperatorMatrix& K, std::span<const std::size_t> block_sizes) {
  std::vector<double> sums;
  std::size_t prev = 0;
  for (std::size_t b : block_sizes) {
    if (b <= prev && !sums.empty()) throw std::invalid_argument("frobenius_tail: block sizes must increase");
    if (b > K.rows() || b > K.cols()) throw std::invalid_argument("frobenius_tail: block exceeds truncation");
    double s = 0.0;
    for (std::size_t m = 0; m < b; ++m)
      for (std::size_t n = 0; n < b; ++n) s += std::norm(K(m, n));
    sums.push_back(s);
    prev = b;
  }
  return sums;
}

// Differences between consecutive entries of frobenius_tail.
inline std::vector<double> tail_increments(std::span<const double> sums) {
  std::vector<double> inc;
  for (std::size_t i = 1; i < sums.size(); ++i) inc.push_back(sums[i] - sums[i - 1]);
  return inc;
}

// (1+m+n)^r (1+|m-n|)^(-p): a symbol matrix of order r whose off-diagonal
// decay is only polynomial of degree p.
inline OperatorMatrix generated_symbol_matrix(double r, double p, std::size_t size, std::size_t pad = 0) {
  return OperatorMatrix::generate(size, size, pad, Provenance::analytic, [r, p](std::size_t m, std::size_t n) {
    const double d = std::abs(static_cast<double>(m) - static_cast<double>(n));
    return std::pow(1.0 + static_cast<double>(m + n), r) * std::pow(1.0 + d, -p);
  });
}

template <class F>
OperatorMatrix diagonal_matrix(std::size_t size, std::size_t pad, F&& f,
                               Provenance provenance = Provenance::analytic) {
  OperatorMatrix K(size, size, pad, provenance, std::size_t{0});
  for (std::size_t n = 0; n < K.computed_rows(); ++n) K(n, n) = Complex(f(n));
  return K;
}

struct ClassifierOptions {
  double slope_slack = 0.15;           // fitted slope may exceed r - alpha by this much
  double stabilization_slack = 0.10;   // C(full) <= (1 + slack) C(half)
  long band_limit = 8;                 // bands d = m - n with |d| <= band_limit are fitted
  std::size_t min_points = 4;          // fewer points above floor: band reported as insufficient
  double fit_start_fraction = 0.25;    // fits use min(m, n) >= fraction * truncation
};

struct BandFit {
  int alpha = 0;
  long band = 0;  // d = m - n
  std::size_t points = 0;
  std::optional<double> slope;
  double threshold = 0.0;
  bool pass = true;
  bool insufficient = false;
};

struct ConstantEstimate {
  int alpha = 0;
  int decay = 0;  // N
  double half = 0.0;
  double full = 0.0;
  bool stable = true;
  double ratio() const { return half > 0.0 ? full / half : (full > 0.0 ? INFINITY : 1.0); }
};

struct ClassifierReport {
  double order = 0.0;
  int alpha_max = 0;
  int decay_max = 0;
  double floor = 0.0;
  ClassifierOptions options;
  std::size_t truncation = 0;
  std::vector<BandFit> fits;
  std::vector<ConstantEstimate> constants;
  bool pass = true;

  const BandFit* fit(int alpha, long band) const {
    for (const auto& f : fits)
      if (f.alpha == alpha && f.band == band) return &f;
    return nullptr;
  }
  const ConstantEstimate* constant(int alpha, int decay) const {
    for (const auto& c : constants)
      if (c.alpha == alpha && c.decay == decay) return &c;
    return nullptr;
  }
};

namespace detail {

// Samples (log(1+m+n), log|D|) along band d inside the fit window.
inline void band_samples(const OperatorMatrix& D, long d, std::size_t start, double floor, std::vector<double>& lx,
                         std::vector<double>& ly) {
  lx.clear();
  ly.clear();
  for (std::size_t n = 0; n < D.cols(); ++n) {
    const long m = static_cast<long>(n) + d;
    if (m < 0 || static_cast<std::size_t>(m) >= D.rows()) continue;
    if (std::min<std::size_t>(static_cast<std::size_t>(m), n) < start) continue;
    const double v = std::abs(D(static_cast<std::size_t>(m), n));
    if (!(v >= floor) || v == 0.0) continue;
    lx.push_back(std::log(1.0 + static_cast<double>(m) + static_cast<double>(n)));
    ly.push_back(std::log(v));
  }
}

inline double weighted_sup(const OperatorMatrix& D, std::size_t rows, std::size_t cols, double exponent, int decay,
                           double floor) {
  double sup = 0.0;
  for (std::size_t m = 0; m < rows; ++m)
    for (std::size_t n = 0; n < cols; ++n) {
      const double v = std::abs(D(m, n));
      if (!(v >= floor) || v == 0.0) continue;
      const double gap = std::abs(static_cast<double>(m) - static_cast<double>(n));
      sup = std::max(sup, v * std::pow(1.0 + static_cast<double>(m + n), exponent) * std::pow(1.0 + gap, decay));
    }
  return sup;
}

}  // namespace detail

// Empirical test of the order-r symbol-matrix estimates
//   |Delta^alpha K(m,n)| <= C_{alpha,N} (1+m+n)^(r-alpha) (1+|m-n|)^(-N)
// for alpha <= alpha_max, N <= decay_max. Passes when every fitted band slope
// is at most r - alpha + slope_slack and every constant estimate grows by at
// most stabilization_slack between the half and the full truncation.
inline ClassifierReport classify(const OperatorMatrix& K, double r, int alpha_max, int decay_max,
                                 double floor = 1e-13, const ClassifierOptions& opt = {}) {
  if (alpha_max < 0 || decay_max < 0) throw std::invalid_argument("classify: alpha_max and N_max must be >= 0");
  if (K.rows() < 32 || K.cols() < 32) throw std::invalid_argument("classify: truncation must be at least 32x32");
  ClassifierReport report;
  report.order = r;
  report.alpha_max = alpha_max;
  report.decay_max = decay_max;
  report.floor = floor;
  report.options = opt;
  report.truncation = std::min(K.rows(), K.cols());

  std::vector<double> lx, ly;
  for (int alpha = 0; alpha <= alpha_max; ++alpha) {
    const OperatorMatrix D = delta(K, alpha);
    const std::size_t size = std::min(D.rows(), D.cols());
    const auto start = static_cast<std::size_t>(opt.fit_start_fraction * static_cast<double>(size));
    for (long d = -opt.band_limit; d <= opt.band_limit; ++d) {
      BandFit fit;
      fit.alpha = alpha;
      fit.band = d;
      fit.threshold = r - alpha + opt.slope_slack;
      detail::band_samples(D, d, start, floor, lx, ly);
      fit.points = lx.size();
      if (lx.size() >= opt.min_points)
        if (auto f = fit_line(lx, ly)) fit.slope = f->slope;
      if (fit.slope) {
        fit.pass = *fit.slope <= fit.threshold;
      } else {
        fit.insufficient = true;
      }
      report.pass = report.pass && fit.pass;
      report.fits.push_back(fit);
    }
    for (int N = 0; N <= decay_max; ++N) {
      ConstantEstimate c;
      c.alpha = alpha;
      c.decay = N;
      c.full = detail::weighted_sup(D, D.rows(), D.cols(), alpha - r, N, floor);
      c.half = detail::weighted_sup(D, D.rows() / 2, D.cols() / 2, alpha - r, N, floor);
      c.stable = c.full <= (1.0 + opt.stabilization_slack) * c.half || c.full == 0.0;
      report.pass = report.pass && c.stable;
      report.constants.push_back(c);
    }
  }
  return report;
}

// Diagonal growth exponents r(alpha) for alpha = 0, 1, 2: least-squares slope
// of log|Delta^alpha K|_{n,n} against log(1+2n) over the fit window.
// Undefined where the diagonal sits below the floor.
inline std::array<std::optional<double>, 3> fit_order(const OperatorMatrix& K, double floor = 1e-13,
                                                      const ClassifierOptions& opt = {}) {
  std::array<std::optional<double>, 3> out;
  std::vector<double> lx, ly;
  for (int alpha = 0; alpha < 3; ++alpha) {
    if (static_cast<std::size_t>(alpha) >= std::min(K.computed_rows(), K.computed_cols())) break;
    const OperatorMatrix D = delta(K, alpha);
    const std::size_t size = std::min(D.rows(), D.cols());
    const auto start = static_cast<std::size_t>(opt.fit_start_fraction * static_cast<double>(size));
    detail::band_samples(D, 0, start, floor, lx, ly);
    if (lx.size() >= opt.min_points)
      if (auto f = fit_line(lx, ly)) out[alpha] = f->slope;
  }
  return out;
}

}  // namespace shubin

#endif  // SHUBIN_MATRIX_CALCULUS_HPP
