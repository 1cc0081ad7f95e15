#ifndef SHUBIN_OPERATOR_ALGEBRA_HPP
#define SHUBIN_OPERATOR_ALGEBRA_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <memory>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "shubin/hermite_basis.hpp"
#include "shubin/matrix_calculus.hpp"
#include "shubin/operator_matrix.hpp"
#include "shubin/parallel.hpp"

namespace shubin {

class NamedOperator {
 public:
  enum class Kind {
    harmonic_power,  // (1+H)^{s/2}
    harmonic,        // H = -d^2 + x^2
    shift,           // Z: phi_k -> phi_{k-1}
    shift_adjoint,   // Z^dagger: phi_k -> phi_{k+1}
    creation,
    annihilation,
    multiply_x,
    derivative_x,
    identity,
    custom,
  };

  static NamedOperator harmonic_power(double s) { return {Kind::harmonic_power, s}; }
  static NamedOperator harmonic() { return {Kind::harmonic}; }
  static NamedOperator shift() { return {Kind::shift}; }
  static NamedOperator shift_adjoint() { return {Kind::shift_adjoint}; }
  static NamedOperator creation() { return {Kind::creation}; }
  static NamedOperator annihilation() { return {Kind::annihilation}; }
  static NamedOperator multiply_x() { return {Kind::multiply_x}; }
  static NamedOperator derivative_x() { return {Kind::derivative_x}; }
  static NamedOperator identity() { return {Kind::identity}; }
  static NamedOperator custom(OperatorMatrix K) {
    NamedOperator op{Kind::custom};
    op.custom_ = std::make_shared<const OperatorMatrix>(std::move(K));
    return op;
  }

  // Names accepted by from_name, in the order of Kind.
  static constexpr std::string_view kNames[] = {"harmonic_power", "harmonic", "shift",        "shift_adjoint",
                                                "creation",       "annihilation", "multiply_x", "derivative_x",
                                                "identity"};

  static NamedOperator from_name(std::string_view name, double parameter = 0.0) {
    for (std::size_t i = 0; i < std::size(kNames); ++i)
      if (kNames[i] == name) return {static_cast<Kind>(i), parameter};
    throw std::invalid_argument("unknown operator '" + std::string(name) + "'");
  }

  Kind kind() const { return kind_; }
  double parameter() const { return parameter_; }
  const OperatorMatrix* custom_matrix() const { return custom_.get(); }

  std::string name() const {
    if (kind_ == Kind::custom) return "custom";
    std::string n(kNames[static_cast<std::size_t>(kind_)]);
    if (kind_ == Kind::harmonic_power) n += "(" + std::to_string(parameter_) + ")";
    return n;
  }

  // Isotropic order: the r with A in Psi^r_iso. Unknown for custom matrices.
  std::optional<double> order() const {
    switch (kind_) {
      case Kind::harmonic_power: return parameter_;
      case Kind::harmonic: return 2.0;
      case Kind::shift:
      case Kind::shift_adjoint:
      case Kind::identity: return 0.0;
      case Kind::creation:
      case Kind::annihilation:
      case Kind::multiply_x:
      case Kind::derivative_x: return 1.0;
      case Kind::custom: return std::nullopt;
    }
    return std::nullopt;
  }

  std::optional<std::size_t> band() const {
    switch (kind_) {
      case Kind::harmonic_power:
      case Kind::harmonic:
      case Kind::identity: return 0;
      case Kind::custom: return custom_->band();
      default: return 1;
    }
  }

 private:
  NamedOperator(Kind k, double p = 0.0) : kind_(k), parameter_(p) {}

  Kind kind_ = Kind::identity;
  double parameter_ = 0.0;
  std::shared_ptr<const OperatorMatrix> custom_;
};

// Exact matrix on 0..M x 0..N plus pad; custom matrices are cut to that block.
inline OperatorMatrix matrix_of(const NamedOperator& op, int M, int N, std::size_t pad = 0) {
  if (M < 0 || N < 0) throw std::invalid_argument("matrix_of: negative truncation");
  const std::size_t rows = static_cast<std::size_t>(M) + 1, cols = static_cast<std::size_t>(N) + 1;
  using K = NamedOperator::Kind;
  if (op.kind() == K::custom) return op.custom_matrix()->leading(rows, cols, pad);

  const double s = op.parameter();
  const K kind = op.kind();
  return OperatorMatrix::generate(
      rows, cols, pad, Provenance::analytic,
      [kind, s](std::size_t m, std::size_t n) -> double {
        const double dn = static_cast<double>(n);
        const bool diag = m == n, up = m + 1 == n, down = m == n + 1;  // up: m = n - 1
        switch (kind) {
          case K::harmonic_power: return diag ? std::pow(2.0 + 2.0 * dn, 0.5 * s) : 0.0;
          case K::harmonic: return diag ? 2.0 * dn + 1.0 : 0.0;
          case K::shift: return up ? 1.0 : 0.0;
          case K::shift_adjoint: return down ? 1.0 : 0.0;
          case K::creation: return down ? std::sqrt(dn + 1.0) : 0.0;
          case K::annihilation: return up ? std::sqrt(dn) : 0.0;
          case K::multiply_x: return down ? std::sqrt((dn + 1.0) / 2.0) : up ? std::sqrt(dn / 2.0) : 0.0;
          case K::derivative_x: return down ? -std::sqrt((dn + 1.0) / 2.0) : up ? std::sqrt(dn / 2.0) : 0.0;
          case K::identity: return diag ? 1.0 : 0.0;
          case K::custom: break;
        }
        return 0.0;
      },
      op.band());
}

// Leading block shared by two matrices; pad is what both can still supply.
inline std::pair<OperatorMatrix, OperatorMatrix> common_block(const OperatorMatrix& a, const OperatorMatrix& b) {
  const std::size_t rows = std::min(a.rows(), b.rows()), cols = std::min(a.cols(), b.cols());
  const std::size_t pad = std::min({a.computed_rows() - rows, a.computed_cols() - cols, b.computed_rows() - rows,
                                    b.computed_cols() - cols});
  return {a.leading(rows, cols, pad), b.leading(rows, cols, pad)};
}

// [A, B] = AB - BA through truncated products; leakage flags from either
// product are carried over.
inline OperatorMatrix commutator(const OperatorMatrix& A, const OperatorMatrix& B, const MatmulOptions& opt = {}) {
  auto [ab, ba] = common_block(matmul(A, B, opt), matmul(B, A, opt));
  OperatorMatrix out = linear_combination(1.0, ab, -1.0, ba);
  std::vector<EntryIndex> flags = ab.flagged();
  for (const auto& f : ba.flagged())
    if (std::find(flags.begin(), flags.end(), f) == flags.end()) flags.push_back(f);
  out.set_flags(std::move(flags));
  return out;
}

// ([A, H])_{m,n} = 2(n - m) A_{m,n}; exact on the whole computed block.
inline OperatorMatrix commutator_with_H(const OperatorMatrix& A) {
  OperatorMatrix out(A.rows(), A.cols(), A.pad(), Provenance::composed, A.band());
  for (std::size_t m = 0; m < A.computed_rows(); ++m)
    for (std::size_t n = 0; n < A.computed_cols(); ++n)
      out(m, n) = 2.0 * (static_cast<double>(n) - static_cast<double>(m)) * A(m, n);
  return out;
}

// ([A, Z])_{m,n} = A_{m,n-1} - A_{m+1,n} with A_{m,-1} = 0. Consumes one
// row and column of pad.
inline OperatorMatrix commutator_with_Z(const OperatorMatrix& A) {
  if (A.pad() < 1) throw std::invalid_argument("commutator_with_Z: pad exhausted");
  std::optional<std::size_t> band;
  if (A.band()) band = *A.band() + 1;
  OperatorMatrix out(A.rows(), A.cols(), A.pad() - 1, Provenance::composed, band);
  for (std::size_t m = 0; m < out.computed_rows(); ++m)
    for (std::size_t n = 0; n < out.computed_cols(); ++n)
      out(m, n) = A.at_or_zero(static_cast<long>(m), static_cast<long>(n) - 1) - A(m + 1, n);
  return out;
}

// Matrix-vector product over the reported block.
inline HermiteSequence apply(const OperatorMatrix& A, const HermiteSequence& u) {
  if (u.size() > A.cols()) throw std::invalid_argument("apply: sequence longer than the matrix has columns");
  std::vector<Complex> out(A.rows(), Complex(0.0));
  for (std::size_t m = 0; m < A.rows(); ++m)
    for (std::size_t n = 0; n < u.size(); ++n) out[m] += A(m, n) * u[n];
  return HermiteSequence(std::move(out));
}

inline double seminorm(const HermiteSequence& u, int N) {
  if (N < 0) throw std::invalid_argument("seminorm: N must be >= 0");
  if (auto cached = u.cached_seminorm(N)) return *cached;
  return u.compute_seminorm(N);
}

// sqrt(sum_k (1+k)^s |c_k|^2)
inline double sobolev_norm(const HermiteSequence& u, double s) {
  double sum = 0.0;
  for (std::size_t k = 0; k < u.size(); ++k) sum += std::pow(1.0 + static_cast<double>(k), s) * std::norm(u[k]);
  return std::sqrt(sum);
}

// Truncated H^{s_in}_iso -> H^{s_out}_iso norm: the l2 norm of
// D_{s_out} A D_{s_in}^{-1}, D_s = diag((1+k)^{s/2}).
inline double operator_norm_between(const OperatorMatrix& A, double s_in, double s_out) {
  const OperatorMatrix W = OperatorMatrix::generate(A.rows(), A.cols(), 0, Provenance::composed,
                                                    [&](std::size_t m, std::size_t n) {
                                                      return A(m, n) * std::pow(1.0 + static_cast<double>(m), 0.5 * s_out) /
                                                             std::pow(1.0 + static_cast<double>(n), 0.5 * s_in);
                                                    });
  return l2_norm(W);
}

// Bound on ||A u||_N when ||u||_{N+2} <= 1 and A is a symbol matrix of order
// 0 with off-diagonal constant C_{0,N}: (1+m)^N <= (1+|m-n|)^N (1+n)^N leaves
// sum_n (1+n)^{-2} = pi^2/6.
inline double decay_bound(double constant_0N) { return constant_0N * std::numbers::pi * std::numbers::pi / 6.0; }

struct BealsOptions {
  double stabilization_slack = 0.10;  // norm_full <= (1 + slack) norm_half
  double zero_norm = 1e-12;           // both norms below this: the cell is identically zero
};

struct BealsCell {
  int alpha = 0;
  int beta = 0;
  double s = 0.0;
  double s_in = 0.0;
  double norm_half = 0.0;
  double norm_full = 0.0;
  std::size_t pad_consumed = 0;
  bool pad_exhausted = false;
  bool bounded = false;

  double ratio() const {
    if (norm_half > 0.0) return norm_full / norm_half;
    return norm_full > 0.0 ? INFINITY : 1.0;
  }
  std::string_view verdict() const {
    if (pad_exhausted) return "pad-exhausted";
    return bounded ? "bounded" : "growing";
  }
};

struct BealsReport {
  double order = 0.0;
  int alpha_max = 0;
  int beta_max = 0;
  std::vector<double> s_list;
  BealsOptions options;
  std::size_t truncation = 0;
  std::vector<BealsCell> cells;
  bool pass = true;

  std::size_t pad_exhausted_cells() const {
    return static_cast<std::size_t>(std::count_if(cells.begin(), cells.end(), [](const BealsCell& c) { return c.pad_exhausted; }));
  }
  const BealsCell* cell(int alpha, int beta, double s) const {
    for (const auto& c : cells)
      if (c.alpha == alpha && c.beta == beta && c.s == s) return &c;
    return nullptr;
  }
};

inline std::vector<double> default_s_list() { return {-2.0, -1.0, 0.0, 1.0, 2.0}; }

// Commutes A beta times with Z, then alpha times with H, and estimates the
// H^{r+s-2beta}_iso -> H^s_iso norm on the half and the full reported block.
// A cell is bounded when the norm grows by at most the stabilization slack.
inline BealsReport beals_test(const OperatorMatrix& A, double r, int alpha_max, int beta_max,
                              const std::vector<double>& s_list, const BealsOptions& opt = {}) {
  if (alpha_max < 0 || beta_max < 0) throw std::invalid_argument("beals_test: alpha_max and beta_max must be >= 0");
  if (s_list.empty()) throw std::invalid_argument("beals_test: empty s list");
  if (A.rows() < 4 || A.cols() < 4) throw std::invalid_argument("beals_test: truncation too small");
  BealsReport report;
  report.order = r;
  report.alpha_max = alpha_max;
  report.beta_max = beta_max;
  report.s_list = s_list;
  report.options = opt;
  report.truncation = std::min(A.rows(), A.cols());

  // Iterated commutators per (alpha, beta); nullopt once the pad runs out.
  std::vector<std::optional<OperatorMatrix>> commuted;
  for (int beta = 0; beta <= beta_max; ++beta) {
    std::optional<OperatorMatrix> z = A;
    for (int j = 0; j < beta && z; ++j) {
      if (z->pad() < 1) {
        z.reset();
      } else {
        z = commutator_with_Z(*z);
      }
    }
    for (int alpha = 0; alpha <= alpha_max; ++alpha) {
      commuted.push_back(z);
      if (z) z = commutator_with_H(*z);
    }
  }

  for (int beta = 0; beta <= beta_max; ++beta)
    for (int alpha = 0; alpha <= alpha_max; ++alpha)
      for (double s : s_list) {
        BealsCell c;
        c.alpha = alpha;
        c.beta = beta;
        c.s = s;
        c.s_in = r + s - 2.0 * beta;
        c.pad_consumed = static_cast<std::size_t>(beta);
        report.cells.push_back(c);
      }

  parallel_for(0, report.cells.size(), [&](std::size_t i) {
    BealsCell& c = report.cells[i];
    const auto& B = commuted[static_cast<std::size_t>(c.beta * (alpha_max + 1) + c.alpha)];
    if (!B) {
      c.pad_exhausted = true;
      return;
    }
    const OperatorMatrix full = B->reported();
    const OperatorMatrix half = B->leading(full.rows() / 2, full.cols() / 2);
    c.norm_full = operator_norm_between(full, c.s_in, c.s);
    c.norm_half = operator_norm_between(half, c.s_in, c.s);
    c.bounded = (c.norm_full <= opt.zero_norm && c.norm_half <= opt.zero_norm) ||
                c.norm_full <= (1.0 + opt.stabilization_slack) * c.norm_half;
  });
  for (const auto& c : report.cells) report.pass = report.pass && c.bounded && !c.pad_exhausted;
  return report;
}

}  // namespace shubin

#endif  // SHUBIN_OPERATOR_ALGEBRA_HPP
