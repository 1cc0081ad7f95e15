#ifndef SHUBIN_HERMITE_BASIS_HPP
#define SHUBIN_HERMITE_BASIS_HPP

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <initializer_list>
#include <optional>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "shubin/hermite.hpp"
#include "shubin/quadrature.hpp"

namespace shubin {

using Complex = std::complex<double>;

// Truncated Hermite coefficient vector c_k = <f, phi_k>, k = 0..size()-1.
// Immutable; seminorms requested at construction are cached alongside.
class HermiteSequence {
 public:
  HermiteSequence() = default;
  explicit HermiteSequence(std::vector<Complex> coefficients)
      : coefficients_(std::move(coefficients)) {
    for (const auto& c : coefficients_)
      if (!std::isfinite(c.real()) || !std::isfinite(c.imag()))
        throw std::invalid_argument("HermiteSequence: non-finite coefficient");
  }

  static HermiteSequence unit(std::size_t k, std::size_t length) {
    if (k >= length) throw std::invalid_argument("HermiteSequence::unit: index out of range");
    std::vector<Complex> c(length);
    c[k] = 1.0;
    return HermiteSequence(std::move(c));
  }

  static HermiteSequence zeros(std::size_t length) {
    return HermiteSequence(std::vector<Complex>(length));
  }

  std::size_t size() const { return coefficients_.size(); }
  const Complex& operator[](std::size_t k) const { return coefficients_[k]; }
  std::span<const Complex> coefficients() const { return coefficients_; }

  // sup_k (1+k)^N |c_k| over the truncation.
  double compute_seminorm(int order) const {
    if (order < 0) throw std::invalid_argument("seminorm: order must be >= 0");
    double sup = 0.0;
    for (std::size_t k = 0; k < coefficients_.size(); ++k)
      sup = std::max(sup, std::pow(1.0 + static_cast<double>(k), order) * std::abs(coefficients_[k]));
    return sup;
  }

  // Copy carrying cached seminorms for the given orders.
  HermiteSequence with_seminorms(std::initializer_list<int> orders) const {
    return with_seminorms(std::span<const int>(orders.begin(), orders.size()));
  }
  HermiteSequence with_seminorms(std::span<const int> orders) const {
    HermiteSequence out = *this;
    for (int n : orders) {
      if (out.cached_seminorm(n)) continue;
      out.cache_.emplace_back(n, compute_seminorm(n));
    }
    std::sort(out.cache_.begin(), out.cache_.end());
    return out;
  }

  std::optional<double> cached_seminorm(int order) const {
    for (const auto& [n, v] : cache_)
      if (n == order) return v;
    return std::nullopt;
  }

 private:
  std::vector<Complex> coefficients_;
  std::vector<std::pair<int, double>> cache_;
};

struct GridFunction {
  std::vector<double> nodes;
  std::vector<Complex> values;

  GridFunction() = default;
  GridFunction(std::vector<double> x, std::vector<Complex> v) : nodes(std::move(x)), values(std::move(v)) {
    if (nodes.size() != values.size())
      throw std::invalid_argument("GridFunction: nodes and values differ in length");
  }
  std::size_t size() const { return nodes.size(); }
};

// c_k = <f, phi_k> for k <= n_max, integrated with quad. f may return a real
// or complex value. Accuracy is governed by the window and node density.
template <class F>
HermiteSequence hermite_coefficients(F&& f, int n_max, const QuadratureRule& quad) {
  if (n_max < 0) throw std::invalid_argument("hermite_coefficients: n_max must be >= 0");
  std::vector<Complex> c(static_cast<std::size_t>(n_max) + 1);
  std::vector<double> phi(c.size());
  for (std::size_t i = 0; i < quad.size(); ++i) {
    const double x = quad.nodes[i];
    const Complex fx = Complex(f(x)) * quad.weights[i];
    hermite_functions(n_max, x, phi);
    for (std::size_t k = 0; k < c.size(); ++k) c[k] += fx * phi[k];
  }
  return HermiteSequence(std::move(c));
}

// sum_k c_k phi_k(x) at every x.
inline GridFunction synthesize(const HermiteSequence& seq, std::span<const double> xs) {
  std::vector<Complex> values(xs.size());
  if (seq.size() == 0) return GridFunction({xs.begin(), xs.end()}, std::move(values));
  const int n_max = static_cast<int>(seq.size()) - 1;
  std::vector<double> phi(seq.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    hermite_functions(n_max, xs[i], phi);
    Complex sum = 0.0;
    for (std::size_t k = 0; k < seq.size(); ++k) sum += seq[k] * phi[k];
    values[i] = sum;
  }
  return GridFunction({xs.begin(), xs.end()}, std::move(values));
}

}  // namespace shubin

#endif  // SHUBIN_HERMITE_BASIS_HPP
