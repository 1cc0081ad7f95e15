#ifndef SHUBIN_OPERATOR_MATRIX_HPP
#define SHUBIN_OPERATOR_MATRIX_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace shubin {

using Complex = std::complex<double>;

enum class Provenance { analytic, quantized, composed };

inline std::string_view to_string(Provenance p) {
  switch (p) {
    case Provenance::analytic: return "analytic";
    case Provenance::quantized: return "quantized";
    case Provenance::composed: return "composed";
  }
  return "composed";
}

inline Provenance provenance_from_string(std::string_view s) {
  if (s == "analytic") return Provenance::analytic;
  if (s == "quantized") return Provenance::quantized;
  if (s == "composed") return Provenance::composed;
  throw std::invalid_argument("unknown provenance '" + std::string(s) + "'");
}

struct EntryIndex {
  std::size_t row = 0;
  std::size_t col = 0;
  friend bool operator==(const EntryIndex&, const EntryIndex&) = default;
};

// Truncation K_{m,n} = <A phi_n, phi_m> of an operator matrix.
//
// Entries are computed on a (rows + pad) x (cols + pad) block; the reported
// block is the leading rows x cols corner. The pad is what later operations
// (differences, products, commutators) may consume without reaching entries
// that were never computed. An optional band hint records that entries with
// |m - n| > band vanish identically.
class OperatorMatrix {
 public:
  OperatorMatrix() = default;
  OperatorMatrix(std::size_t rows, std::size_t cols, std::size_t pad = 0,
                 Provenance provenance = Provenance::composed, std::optional<std::size_t> band = std::nullopt)
      : rows_(rows),
        cols_(cols),
        pad_(pad),
        provenance_(provenance),
        band_(band),
        data_((rows + pad) * (cols + pad)) {}

  template <class F>
  static OperatorMatrix generate(std::size_t rows, std::size_t cols, std::size_t pad, Provenance provenance,
                                 F&& f, std::optional<std::size_t> band = std::nullopt) {
    OperatorMatrix k(rows, cols, pad, provenance, band);
    for (std::size_t m = 0; m < k.computed_rows(); ++m)
      for (std::size_t n = 0; n < k.computed_cols(); ++n) k(m, n) = Complex(f(m, n));
    return k;
  }

  // Dense block from nested rows, no pad.
  static OperatorMatrix from_rows(const std::vector<std::vector<Complex>>& rows,
                                  Provenance provenance = Provenance::composed) {
    const std::size_t r = rows.size();
    const std::size_t c = r ? rows.front().size() : 0;
    OperatorMatrix k(r, c, 0, provenance);
    for (std::size_t m = 0; m < r; ++m) {
      if (rows[m].size() != c) throw std::invalid_argument("OperatorMatrix::from_rows: ragged rows");
      for (std::size_t n = 0; n < c; ++n) k(m, n) = rows[m][n];
    }
    return k;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t pad() const { return pad_; }
  std::size_t computed_rows() const { return rows_ + pad_; }
  std::size_t computed_cols() const { return cols_ + pad_; }
  Provenance provenance() const { return provenance_; }
  std::optional<std::size_t> band() const { return band_; }

  Complex& operator()(std::size_t m, std::size_t n) { return data_[m * computed_cols() + n]; }
  const Complex& operator()(std::size_t m, std::size_t n) const { return data_[m * computed_cols() + n]; }

  // Entry with the phi_{-1} = 0 convention: negative indices read as zero.
  Complex at_or_zero(long m, long n) const {
    if (m < 0 || n < 0) return 0.0;
    const auto um = static_cast<std::size_t>(m), un = static_cast<std::size_t>(n);
    if (um >= computed_rows() || un >= computed_cols())
      throw std::out_of_range("OperatorMatrix: entry beyond the computed block");
    return (*this)(um, un);
  }

  std::span<const Complex> data() const { return data_; }
  std::span<Complex> data() { return data_; }

  // Entries flagged by the producing operation (non-converged quadrature,
  // truncation leakage in a product).
  const std::vector<EntryIndex>& flagged() const { return flagged_; }
  void flag(EntryIndex e) { flagged_.push_back(e); }
  void set_flags(std::vector<EntryIndex> flags) { flagged_ = std::move(flags); }

  void set_provenance(Provenance p) { provenance_ = p; }
  void set_band(std::optional<std::size_t> band) { band_ = band; }

  bool all_finite() const {
    return std::all_of(data_.begin(), data_.end(),
                       [](const Complex& z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); });
  }

  void require_finite(std::string_view context) const {
    if (!all_finite()) throw std::domain_error(std::string(context) + ": matrix has non-finite entries");
  }

  // Leading block of computed entries, reported as rows x cols with the
  // given pad (rows + pad and cols + pad must fit in the computed block).
  OperatorMatrix leading(std::size_t rows, std::size_t cols, std::size_t pad = 0) const {
    if (rows + pad > computed_rows() || cols + pad > computed_cols())
      throw std::out_of_range("OperatorMatrix::leading: block exceeds computed entries");
    OperatorMatrix out(rows, cols, pad, provenance_, band_);
    for (std::size_t m = 0; m < out.computed_rows(); ++m)
      for (std::size_t n = 0; n < out.computed_cols(); ++n) out(m, n) = (*this)(m, n);
    for (const auto& f : flagged_)
      if (f.row < out.computed_rows() && f.col < out.computed_cols()) out.flag(f);
    return out;
  }

  // The reported block alone, pad dropped.
  OperatorMatrix reported() const { return leading(rows_, cols_, 0); }

  // Conjugate transpose, pad and band preserved.
  OperatorMatrix adjoint() const {
    OperatorMatrix out(cols_, rows_, pad_, provenance_, band_);
    for (std::size_t m = 0; m < computed_rows(); ++m)
      for (std::size_t n = 0; n < computed_cols(); ++n) out(n, m) = std::conj((*this)(m, n));
    return out;
  }

  double max_abs() const {
    double v = 0.0;
    for (std::size_t m = 0; m < rows_; ++m)
      for (std::size_t n = 0; n < cols_; ++n) v = std::max(v, std::abs((*this)(m, n)));
    return v;
  }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::size_t pad_ = 0;
  Provenance provenance_ = Provenance::composed;
  std::optional<std::size_t> band_;
  std::vector<Complex> data_;
  std::vector<EntryIndex> flagged_;
};

// Largest |A - B| over the leading rows x cols block common to both.
inline double max_abs_difference(const OperatorMatrix& a, const OperatorMatrix& b, std::size_t rows,
                                 std::size_t cols) {
  if (rows > std::min(a.computed_rows(), b.computed_rows()) ||
      cols > std::min(a.computed_cols(), b.computed_cols()))
    throw std::out_of_range("max_abs_difference: block exceeds an operand");
  double d = 0.0;
  for (std::size_t m = 0; m < rows; ++m)
    for (std::size_t n = 0; n < cols; ++n) d = std::max(d, std::abs(a(m, n) - b(m, n)));
  return d;
}

inline double max_abs_difference(const OperatorMatrix& a, const OperatorMatrix& b) {
  return max_abs_difference(a, b, std::min(a.rows(), b.rows()), std::min(a.cols(), b.cols()));
}

// Entrywise a*A + b*B over the common computed block; pad is the smaller one.
inline OperatorMatrix linear_combination(Complex a, const OperatorMatrix& A, Complex b, const OperatorMatrix& B) {
  if (A.rows() != B.rows() || A.cols() != B.cols())
    throw std::invalid_argument("linear_combination: reported shapes differ");
  const std::size_t pad = std::min(A.pad(), B.pad());
  std::optional<std::size_t> band;
  if (A.band() && B.band()) band = std::max(*A.band(), *B.band());
  OperatorMatrix out(A.rows(), A.cols(), pad, Provenance::composed, band);
  for (std::size_t m = 0; m < out.computed_rows(); ++m)
    for (std::size_t n = 0; n < out.computed_cols(); ++n) out(m, n) = a * A(m, n) + b * B(m, n);
  return out;
}

// Multi-indexed matrix for dimension d in {1, 2}: rows and columns range over
// multi-indices with every component in [0, cutoff].
class OperatorMatrixNd {
 public:
  using MultiIndex = std::array<int, 2>;

  OperatorMatrixNd() = default;
  OperatorMatrixNd(int dimension, int cutoff) : dimension_(dimension), cutoff_(cutoff) {
    if (dimension != 1 && dimension != 2) throw std::invalid_argument("OperatorMatrixNd: dimension must be 1 or 2");
    if (cutoff < 0) throw std::invalid_argument("OperatorMatrixNd: cutoff must be >= 0");
    const std::size_t n = index_count();
    data_.assign(n * n, 0.0);
  }

  int dimension() const { return dimension_; }
  int cutoff() const { return cutoff_; }
  std::size_t index_count() const {
    const std::size_t side = static_cast<std::size_t>(cutoff_) + 1;
    return dimension_ == 1 ? side : side * side;
  }

  bool in_range(const MultiIndex& k) const {
    for (int j = 0; j < dimension_; ++j)
      if (k[j] < 0 || k[j] > cutoff_) return false;
    for (int j = dimension_; j < 2; ++j)
      if (k[j] != 0) return false;
    return true;
  }

  std::size_t linear(const MultiIndex& k) const {
    const std::size_t side = static_cast<std::size_t>(cutoff_) + 1;
    return dimension_ == 1 ? static_cast<std::size_t>(k[0])
                           : static_cast<std::size_t>(k[0]) * side + static_cast<std::size_t>(k[1]);
  }

  MultiIndex multi(std::size_t linear_index) const {
    const std::size_t side = static_cast<std::size_t>(cutoff_) + 1;
    if (dimension_ == 1) return {static_cast<int>(linear_index), 0};
    return {static_cast<int>(linear_index / side), static_cast<int>(linear_index % side)};
  }

  Complex& operator()(const MultiIndex& m, const MultiIndex& n) {
    return data_[linear(m) * index_count() + linear(n)];
  }
  const Complex& operator()(const MultiIndex& m, const MultiIndex& n) const {
    return data_[linear(m) * index_count() + linear(n)];
  }

  // Any component equal to -1 reads as zero (phi_{-1} = 0). Components above
  // the cutoff are an error: callers must stay inside the computed range.
  Complex at_or_zero(const MultiIndex& m, const MultiIndex& n) const {
    for (int j = 0; j < 2; ++j)
      if (m[j] < 0 || n[j] < 0) return 0.0;
    if (!in_range(m) || !in_range(n)) throw std::out_of_range("OperatorMatrixNd: index beyond cutoff");
    return (*this)(m, n);
  }

  bool all_finite() const {
    return std::all_of(data_.begin(), data_.end(),
                       [](const Complex& z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); });
  }

  static int l1(const MultiIndex& k) { return k[0] + k[1]; }

 private:
  int dimension_ = 1;
  int cutoff_ = 0;
  std::vector<Complex> data_;
};

}  // namespace shubin

#endif  // SHUBIN_OPERATOR_MATRIX_HPP
