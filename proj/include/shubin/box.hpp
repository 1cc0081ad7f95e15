#ifndef SHUBIN_BOX_HPP
#define SHUBIN_BOX_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "shubin/operator_matrix.hpp"
#include "shubin/regression.hpp"

// Box operators on multi-indexed matrices, K(m, n) = <A phi_n, phi_m> with m
// the row (x) multi-index and n the column (xi) multi-index:
//   (box_x_k K)(m,n)  = sqrt((n_k+1)/2) K(m,n+e_k) - sqrt(n_k/2) K(m,n-e_k)
//                     + sqrt((m_k+1)/2) K(m+e_k,n) - sqrt(m_k/2) K(m-e_k,n)
//   (box_xi_k K)(m,n) = sqrt((m_k+1)/2) K(m+e_k,n) + sqrt(m_k/2) K(m-e_k,n)
//                     - sqrt((n_k+1)/2) K(m,n+e_k) - sqrt(n_k/2) K(m,n-e_k)
// box_x_k K is the matrix of the symbol d a / d x_k; box_xi_k K is the matrix
// of i d a / d xi_k. Each application drops the outermost index layer.

namespace shubin {

namespace detail {

inline OperatorMatrixNd::MultiIndex shifted(OperatorMatrixNd::MultiIndex k, int axis, int by) {
  k[axis] += by;
  return k;
}

inline void require_axis(const OperatorMatrixNd& K, int axis) {
  if (axis < 0 || axis >= K.dimension()) throw std::invalid_argument("box: axis out of range");
  if (K.cutoff() < 1) throw std::invalid_argument("box: cutoff too small for a shifted combination");
}

// frequency = false gives box_x, true gives box_xi.
inline OperatorMatrixNd box_combination(const OperatorMatrixNd& K, int axis, bool frequency) {
  require_axis(K, axis);
  OperatorMatrixNd out(K.dimension(), K.cutoff() - 1);
  const std::size_t count = out.index_count();
  for (std::size_t i = 0; i < count; ++i) {
    const auto m = out.multi(i);
    const double mk = m[axis];
    for (std::size_t j = 0; j < count; ++j) {
      const auto n = out.multi(j);
      const double nk = n[axis];
      const Complex col_up = std::sqrt((nk + 1.0) / 2.0) * K.at_or_zero(m, shifted(n, axis, 1));
      const Complex col_down = std::sqrt(nk / 2.0) * K.at_or_zero(m, shifted(n, axis, -1));
      const Complex row_up = std::sqrt((mk + 1.0) / 2.0) * K.at_or_zero(shifted(m, axis, 1), n);
      const Complex row_down = std::sqrt(mk / 2.0) * K.at_or_zero(shifted(m, axis, -1), n);
      out(m, n) = frequency ? row_up + row_down - col_up - col_down : col_up - col_down + row_up - row_down;
    }
  }
  return out;
}

}  // namespace detail

inline OperatorMatrixNd box_x(const OperatorMatrixNd& K, int axis) {
  return detail::box_combination(K, axis, false);
}

inline OperatorMatrixNd box_xi(const OperatorMatrixNd& K, int axis) {
  return detail::box_combination(K, axis, true);
}

// box^{alpha,beta}: the xi boxes are applied first, then the x boxes (they
// commute wherever both sides are defined).
inline OperatorMatrixNd box(const OperatorMatrixNd& K, const OperatorMatrixNd::MultiIndex& alpha,
                            const OperatorMatrixNd::MultiIndex& beta) {
  OperatorMatrixNd out = K;
  for (int k = 0; k < K.dimension(); ++k)
    for (int j = 0; j < beta[k]; ++j) out = box_xi(out, k);
  for (int k = 0; k < K.dimension(); ++k)
    for (int j = 0; j < alpha[k]; ++j) out = box_x(out, k);
  return out;
}

// (Delta_{e_k} K)(m, n) = K(m+e_k, n+e_k) - K(m, n), on cutoff - 1.
inline OperatorMatrixNd delta_axis(const OperatorMatrixNd& K, int axis) {
  detail::require_axis(K, axis);
  OperatorMatrixNd out(K.dimension(), K.cutoff() - 1);
  const std::size_t count = out.index_count();
  for (std::size_t i = 0; i < count; ++i) {
    const auto m = out.multi(i);
    for (std::size_t j = 0; j < count; ++j) {
      const auto n = out.multi(j);
      out(m, n) = K(detail::shifted(m, axis, 1), detail::shifted(n, axis, 1)) - K(m, n);
    }
  }
  return out;
}

// Matrix of the creation operator C_k^dagger: sqrt(n_k+1) delta_{m, n+e_k}.
inline OperatorMatrixNd creation_matrix_nd(int dimension, int cutoff, int axis) {
  OperatorMatrixNd K(dimension, cutoff);
  if (axis < 0 || axis >= dimension) throw std::invalid_argument("creation_matrix_nd: axis out of range");
  const std::size_t count = K.index_count();
  for (std::size_t j = 0; j < count; ++j) {
    const auto n = K.multi(j);
    const auto m = detail::shifted(n, axis, 1);
    if (K.in_range(m)) K(m, n) = std::sqrt(n[axis] + 1.0);
  }
  return K;
}

// Residual of the off-diagonal identity
//   (m_k - n_k) K(m,n) = sqrt(m_k/2) ((box_x + box_xi) K)(m-e_k, n)
//                      - sqrt(n_k/2) ((box_x - box_xi) K)(m, n-e_k)
// over multi-indices inside cutoff - 1.
inline double off_diagonal_identity_residual(const OperatorMatrixNd& K, int axis) {
  const OperatorMatrixNd bx = box_x(K, axis);
  const OperatorMatrixNd bxi = box_xi(K, axis);
  double worst = 0.0;
  const std::size_t count = bx.index_count();
  for (std::size_t i = 0; i < count; ++i) {
    const auto m = bx.multi(i);
    for (std::size_t j = 0; j < count; ++j) {
      const auto n = bx.multi(j);
      const auto mm = detail::shifted(m, axis, -1);
      const auto nn = detail::shifted(n, axis, -1);
      const Complex rhs = std::sqrt(m[axis] / 2.0) * (bx.at_or_zero(mm, n) + bxi.at_or_zero(mm, n)) -
                          std::sqrt(n[axis] / 2.0) * (bx.at_or_zero(m, nn) - bxi.at_or_zero(m, nn));
      const Complex lhs = static_cast<double>(m[axis] - n[axis]) * K(m, n);
      worst = std::max(worst, std::abs(lhs - rhs));
    }
  }
  return worst;
}

struct BoxBoundCell {
  OperatorMatrixNd::MultiIndex alpha{};
  OperatorMatrixNd::MultiIndex beta{};
  double constant = 0.0;  // max |box K| / (1+|m|+|n|)^((r-|alpha|-|beta|)/2)
};

// Weighted sup of box^{alpha,beta} K for every |alpha| + |beta| <= max_total.
inline std::vector<BoxBoundCell> box_bound_constants(const OperatorMatrixNd& K, double r, int max_total) {
  std::vector<BoxBoundCell> cells;
  const int d = K.dimension();
  const auto within = [&](const OperatorMatrixNd::MultiIndex& k) { return d == 2 || k[1] == 0; };
  for (int a0 = 0; a0 <= max_total; ++a0)
    for (int a1 = 0; a1 <= max_total - a0; ++a1)
      for (int b0 = 0; b0 <= max_total - a0 - a1; ++b0)
        for (int b1 = 0; b1 <= max_total - a0 - a1 - b0; ++b1) {
          const OperatorMatrixNd::MultiIndex alpha{a0, a1}, beta{b0, b1};
          if (!within(alpha) || !within(beta)) continue;
          const int total = a0 + a1 + b0 + b1;
          if (total >= K.cutoff()) continue;
          const OperatorMatrixNd B = box(K, alpha, beta);
          const double exponent = 0.5 * (r - total);
          BoxBoundCell cell{alpha, beta, 0.0};
          const std::size_t count = B.index_count();
          for (std::size_t i = 0; i < count; ++i) {
            const auto m = B.multi(i);
            for (std::size_t j = 0; j < count; ++j) {
              const auto n = B.multi(j);
              const double v = std::abs(B(m, n));
              if (v == 0.0) continue;
              const double weight = std::pow(1.0 + OperatorMatrixNd::l1(m) + OperatorMatrixNd::l1(n), exponent);
              cell.constant = std::max(cell.constant, v / weight);
            }
          }
          cells.push_back(cell);
        }
  return cells;
}

struct BandValue {
  int n1 = 0;
  double value = 0.0;       // (Delta_{e_1} K)(n+e_1, n) at n = (n1, 0)
  double two_step_form = 0.0;  // 2 / (sqrt(n1+3) + sqrt(n1+1))
  double exact_form = 0.0;  // 1 / (sqrt(n1+2) + sqrt(n1+1))
};

struct CounterexampleRecord {
  int cutoff = 0;
  double order = 1.0;
  std::vector<BandValue> band;
  double two_step_residual = 0.0;  // max over all (n1, n2)
  double exact_form_residual = 0.0;
  double slope_n2 = 0.0;      // worst |slope| along n2 with n1 fixed
  double slope_n1 = 0.0;      // along n1 at n2 = 0, for contrast
  std::vector<BoxBoundCell> box_cells;
  double box_constant = 0.0;  // max over box_cells
  double identity_residual = 0.0;
};

// The d = 2 matrix of C_1^dagger: Delta_{e_1} decays like n_1^(-1/2) but is
// constant in n_2, so the one-dimensional difference criterion fails, while
// the box-operator bounds still hold with r = 1.
inline CounterexampleRecord counterexample_2d(int cutoff = 24) {
  if (cutoff < 4) throw std::invalid_argument("counterexample_2d: cutoff must be >= 4");
  CounterexampleRecord rec;
  rec.cutoff = cutoff;
  const OperatorMatrixNd K = creation_matrix_nd(2, cutoff, 0);
  const OperatorMatrixNd D = delta_axis(K, 0);

  // Band m = n + e_1 inside D's range: n1 <= cutoff - 2, n2 <= cutoff - 1.
  std::vector<double> lx, ly;
  rec.slope_n2 = 0.0;
  for (int n1 = 0; n1 + 1 <= D.cutoff(); ++n1) {
    const double two_step = 2.0 / (std::sqrt(n1 + 3.0) + std::sqrt(n1 + 1.0));
    const double exact = 1.0 / (std::sqrt(n1 + 2.0) + std::sqrt(n1 + 1.0));
    lx.clear();
    ly.clear();
    for (int n2 = 0; n2 <= D.cutoff(); ++n2) {
      const OperatorMatrixNd::MultiIndex n{n1, n2}, m{n1 + 1, n2};
      const double v = std::abs(D(m, n));
      rec.two_step_residual = std::max(rec.two_step_residual, std::abs(v - two_step));
      rec.exact_form_residual = std::max(rec.exact_form_residual, std::abs(v - exact));
      lx.push_back(std::log(1.0 + OperatorMatrixNd::l1(m) + OperatorMatrixNd::l1(n)));
      ly.push_back(std::log(v));
    }
    rec.band.push_back({n1, std::abs(D({n1 + 1, 0}, {n1, 0})), two_step, exact});
    if (auto f = fit_line(lx, ly)) rec.slope_n2 = std::max(rec.slope_n2, std::abs(f->slope));
  }
  lx.clear();
  ly.clear();
  for (int n1 = 0; n1 + 1 <= D.cutoff(); ++n1) {
    lx.push_back(std::log(2.0 + 2.0 * n1));
    ly.push_back(std::log(std::abs(D({n1 + 1, 0}, {n1, 0}))));
  }
  if (auto f = fit_line(lx, ly)) rec.slope_n1 = f->slope;

  rec.box_cells = box_bound_constants(K, rec.order, 2);
  for (const auto& c : rec.box_cells) rec.box_constant = std::max(rec.box_constant, c.constant);
  rec.identity_residual = std::max(off_diagonal_identity_residual(K, 0), off_diagonal_identity_residual(K, 1));
  return rec;
}

}  // namespace shubin

#endif  // SHUBIN_BOX_HPP
