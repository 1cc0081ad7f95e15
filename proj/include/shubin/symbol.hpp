#ifndef SHUBIN_SYMBOL_HPP
#define SHUBIN_SYMBOL_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "shubin/regression.hpp"

namespace shubin {

using Complex = std::complex<double>;

// An isotropic symbol a(x, xi) of declared order r, meaning
//   |d_x^alpha d_xi^beta a| <= C (1 + |x| + |xi|)^(r - alpha - beta).
// Derivatives come from an analytic closure when one is supplied, otherwise
// from central finite differences with a step proportional to 1+|x|+|xi|.
class Symbol {
 public:
  using Eval = std::function<Complex(double, double)>;
  using Derivative = std::function<Complex(int, int, double, double)>;

  static constexpr double kDefaultStepScale = 1e-4;
  static constexpr int kMaxFiniteDifferenceOrder = 4;

  Symbol(Eval eval, double declared_order, Derivative derivative = {}, std::string name = {})
      : eval_(std::move(eval)),
        derivative_(std::move(derivative)),
        order_(declared_order),
        name_(std::move(name)) {
    if (!eval_) throw std::invalid_argument("Symbol: empty evaluation closure");
  }

  Complex operator()(double x, double xi) const { return eval_(x, xi); }

  double declared_order() const { return order_; }
  const std::string& name() const { return name_; }
  bool has_analytic_derivatives() const { return static_cast<bool>(derivative_); }
  const Derivative& analytic_derivative() const { return derivative_; }
  double step_scale() const { return step_scale_; }

  Symbol with_declared_order(double r) const {
    Symbol s = *this;
    s.order_ = r;
    return s;
  }

  // Same function, derivatives forced through finite differences.
  Symbol with_finite_differences(double step_scale = kDefaultStepScale) const {
    if (!(step_scale > 0.0)) throw std::invalid_argument("Symbol: step scale must be positive");
    Symbol s = *this;
    s.derivative_ = {};
    s.step_scale_ = step_scale;
    return s;
  }

 private:
  Eval eval_;
  Derivative derivative_;
  double order_ = 0.0;
  double step_scale_ = kDefaultStepScale;
  std::string name_;
};

namespace detail {

struct Stencil {
  std::array<int, 5> offsets{};
  std::array<double, 5> weights{};
  int size = 0;
};

// Second-order accurate central stencils for derivative orders 0..4.
inline Stencil central_stencil(int order) {
  switch (order) {
    case 0: return {{0}, {1.0}, 1};
    case 1: return {{-1, 1}, {-0.5, 0.5}, 2};
    case 2: return {{-1, 0, 1}, {1.0, -2.0, 1.0}, 3};
    case 3: return {{-2, -1, 1, 2}, {-0.5, 1.0, -1.0, 0.5}, 4};
    case 4: return {{-2, -1, 0, 1, 2}, {1.0, -4.0, 6.0, -4.0, 1.0}, 5};
    default: throw std::domain_error("central_stencil: derivative order above 4");
  }
}

// Relative step for a total derivative order k. Orders 1 and 2 use the
// configured scale; higher orders are floored at eps^(1/(k+2)) so rounding
// does not swamp the h^2 truncation term.
inline double relative_step(double scale, int total_order) {
  if (total_order <= 2) return scale;
  const double eps = std::numeric_limits<double>::epsilon();
  return std::max(scale, std::pow(eps, 1.0 / (total_order + 2)));
}

inline double binomial(int n, int k) {
  double b = 1.0;
  for (int i = 1; i <= k; ++i) b = b * (n - k + i) / i;
  return b;
}

// alpha! / (i! (alpha-2i)!): number-weighted pairings in the Faa di Bruno
// expansion for a quadratic inner function.
inline double pairing_coefficient(int alpha, int i) {
  double c = 1.0;
  for (int k = 2; k <= alpha; ++k) c *= k;
  for (int k = 2; k <= i; ++k) c /= k;
  for (int k = 2; k <= alpha - 2 * i; ++k) c /= k;
  return c;
}

}  // namespace detail

// d_x^alpha d_xi^beta (1 + x^2 + xi^2)^(p/2), exact for all orders.
inline double bracket_partial(double p, int alpha, int beta, double x, double xi) {
  const double q = 0.5 * p;
  const double rho = 1.0 + x * x + xi * xi;
  double total = 0.0;
  for (int i = 0; 2 * i <= alpha; ++i) {
    const double cx = detail::pairing_coefficient(alpha, i) * std::pow(2.0 * x, alpha - 2 * i);
    for (int j = 0; 2 * j <= beta; ++j) {
      const double cxi = detail::pairing_coefficient(beta, j) * std::pow(2.0 * xi, beta - 2 * j);
      const int k = (alpha - i) + (beta - j);
      double falling = 1.0;
      for (int t = 0; t < k; ++t) falling *= (q - t);
      total += cx * cxi * falling * std::pow(rho, q - k);
    }
  }
  return total;
}

// Mixed partial d_x^alpha d_xi^beta a(x, xi) by the symbol's strategy.
inline Complex partial(const Symbol& sym, int alpha, int beta, double x, double xi) {
  if (alpha < 0 || beta < 0) throw std::invalid_argument("partial: negative derivative order");
  if (alpha == 0 && beta == 0) return sym(x, xi);
  if (sym.has_analytic_derivatives()) return sym.analytic_derivative()(alpha, beta, x, xi);
  const int total = alpha + beta;
  if (total > Symbol::kMaxFiniteDifferenceOrder)
    throw std::domain_error("partial: finite differences limited to total order 4");
  const double h = detail::relative_step(sym.step_scale(), total) * (1.0 + std::abs(x) + std::abs(xi));
  const auto sx = detail::central_stencil(alpha);
  const auto sxi = detail::central_stencil(beta);
  Complex sum = 0.0;
  for (int i = 0; i < sx.size; ++i)
    for (int j = 0; j < sxi.size; ++j)
      sum += sx.weights[i] * sxi.weights[j] * sym(x + sx.offsets[i] * h, xi + sxi.offsets[j] * h);
  return sum / std::pow(h, total);
}

// (1 + x^2 + xi^2)^(s/2): the principal symbol of (1+H)^(s/2), order s.
inline Symbol harmonic_symbol(double s) {
  return Symbol(
      [s](double x, double xi) { return Complex(std::pow(1.0 + x * x + xi * xi, 0.5 * s), 0.0); }, s,
      [s](int a, int b, double x, double xi) { return Complex(bracket_partial(s, a, b, x, xi), 0.0); },
      "harmonic(" + std::to_string(s) + ")");
}

inline Symbol constant_symbol(Complex c) {
  return Symbol([c](double, double) { return c; }, 0.0,
                [c](int a, int b, double, double) { return (a == 0 && b == 0) ? c : Complex(0.0); },
                "constant");
}

// a(x, xi) = x
inline Symbol position_symbol() {
  return Symbol([](double x, double) { return Complex(x); }, 1.0,
                [](int a, int b, double x, double) {
                  if (b != 0 || a > 1) return Complex(0.0);
                  return a == 0 ? Complex(x) : Complex(1.0);
                },
                "x");
}

// a(x, xi) = xi
inline Symbol frequency_symbol() {
  return Symbol([](double, double xi) { return Complex(xi); }, 1.0,
                [](int a, int b, double, double xi) {
                  if (a != 0 || b > 1) return Complex(0.0);
                  return b == 0 ? Complex(xi) : Complex(1.0);
                },
                "xi");
}

// The symbol d_x^alpha d_xi^beta a, of order r - alpha - beta.
inline Symbol derivative_symbol(const Symbol& sym, int alpha, int beta) {
  if (alpha < 0 || beta < 0) throw std::invalid_argument("derivative_symbol: negative order");
  Symbol::Derivative deriv;
  if (sym.has_analytic_derivatives()) {
    deriv = [sym, alpha, beta](int a, int b, double x, double xi) {
      return partial(sym, alpha + a, beta + b, x, xi);
    };
  }
  Symbol out([sym, alpha, beta](double x, double xi) { return partial(sym, alpha, beta, x, xi); },
             sym.declared_order() - alpha - beta, std::move(deriv), "d(" + sym.name() + ")");
  return sym.has_analytic_derivatives() ? out : out.with_finite_differences(sym.step_scale());
}

// a~ = (-2i xi d_x + 2i x d_xi - d_x^2 + d_xi^2) a, defined by
//   (H_x - H_xi)[e^{i x xi} a] = e^{i x xi} a~.
// The result has the same declared order as a.
inline Symbol oscillator_conjugation(const Symbol& sym) {
  constexpr Complex I(0.0, 1.0);
  Symbol::Derivative deriv;
  if (sym.has_analytic_derivatives()) {
    deriv = [sym, I](int a, int b, double x, double xi) {
      // Leibniz on xi * a_x and x * a_xi; the coefficients are linear.
      Complex xi_ax = xi * partial(sym, a + 1, b, x, xi);
      if (b > 0) xi_ax += static_cast<double>(b) * partial(sym, a + 1, b - 1, x, xi);
      Complex x_axi = x * partial(sym, a, b + 1, x, xi);
      if (a > 0) x_axi += static_cast<double>(a) * partial(sym, a - 1, b + 1, x, xi);
      return -2.0 * I * xi_ax + 2.0 * I * x_axi - partial(sym, a + 2, b, x, xi) +
             partial(sym, a, b + 2, x, xi);
    };
  }
  Symbol out(
      [sym, I](double x, double xi) {
        return -2.0 * I * xi * partial(sym, 1, 0, x, xi) + 2.0 * I * x * partial(sym, 0, 1, x, xi) -
               partial(sym, 2, 0, x, xi) + partial(sym, 0, 2, x, xi);
      },
      sym.declared_order(), std::move(deriv), "conj(" + sym.name() + ")");
  return sym.has_analytic_derivatives() ? out : out.with_finite_differences(sym.step_scale());
}

// k-th of `samples` equally spaced points on the l1-circle |x| + |xi| = R,
// walked edge by edge from (R, 0).
inline std::pair<double, double> l1_circle_point(double radius, int k, int samples) {
  const double u = 4.0 * k / samples;
  const int edge = std::min(3, static_cast<int>(u));
  const double f = u - edge;
  switch (edge) {
    case 0: return {radius * (1.0 - f), radius * f};
    case 1: return {-radius * f, radius * (1.0 - f)};
    case 2: return {-radius * (1.0 - f), -radius * f};
    default: return {radius * f, -radius * (1.0 - f)};
  }
}

inline std::vector<double> default_order_radii() { return {16, 32, 64, 128, 256, 512}; }

// Least-squares slope of log sup_{|x|+|xi|=R} |a| against log(1+R).
// nullopt when a vanishes on the probe circles.
inline std::optional<double> estimate_order(const Symbol& sym,
                                            std::span<const double> radii,
                                            int angular_samples = 64) {
  if (radii.size() < 2) throw std::invalid_argument("estimate_order: need at least two radii");
  for (std::size_t i = 1; i < radii.size(); ++i)
    if (!(radii[i] > radii[i - 1])) throw std::invalid_argument("estimate_order: radii must increase");
  if (radii.front() <= 0.0) throw std::invalid_argument("estimate_order: radii must be positive");
  if (radii.back() < 32.0) throw std::invalid_argument("estimate_order: largest radius must be >= 32");
  std::vector<double> lx, ly;
  for (double R : radii) {
    double sup = 0.0;
    for (int k = 0; k < angular_samples; ++k) {
      const auto [x, xi] = l1_circle_point(R, k, angular_samples);
      sup = std::max(sup, std::abs(sym(x, xi)));
    }
    if (sup > 0.0 && std::isfinite(sup)) {
      lx.push_back(std::log1p(R));
      ly.push_back(std::log(sup));
    }
  }
  const auto fit = fit_line(lx, ly);
  if (!fit) return std::nullopt;
  return fit->slope;
}

inline std::optional<double> estimate_order(const Symbol& sym) {
  const auto radii = default_order_radii();
  return estimate_order(sym, radii);
}

struct SymbolProbe {
  std::vector<double> radii{4, 8, 16, 32, 64};
  int angular_samples = 64;
  double ceiling = 1e6;        // largest admissible weighted sup
  double trend_slack = 0.10;   // allowed growth between consecutive circles
  double trend_from = 16.0;    // trend is only enforced from this radius on
  double absolute_floor = 1e-12;
};

struct SymbolClassEntry {
  int alpha = 0;
  int beta = 0;
  std::vector<double> weighted_sup;  // one per probe radius
  std::optional<double> growth_slope;
  bool bounded = true;
  bool non_increasing = true;
  bool pass() const { return bounded && non_increasing; }
};

struct SymbolClassReport {
  double order = 0.0;
  SymbolProbe probe;
  std::vector<SymbolClassEntry> entries;  // (alpha, beta) in row-major order
  bool pass = true;

  const SymbolClassEntry& at(int alpha, int beta) const {
    for (const auto& e : entries)
      if (e.alpha == alpha && e.beta == beta) return e;
    throw std::out_of_range("SymbolClassReport: no entry for requested (alpha, beta)");
  }
};

// Finite-probe proxy for membership in the order-r isotropic symbol class:
// on each l1-circle of radius R, sup |d^alpha d^beta a| (1+R)^(alpha+beta-r)
// must stay below the ceiling and be non-increasing (within slack) from
// trend_from on.
inline SymbolClassReport verify_symbol_class(const Symbol& sym, double r, int alpha_max, int beta_max,
                                             const SymbolProbe& probe = {}) {
  if (alpha_max < 0 || beta_max < 0)
    throw std::invalid_argument("verify_symbol_class: negative derivative bound");
  if (!sym.has_analytic_derivatives() && alpha_max + beta_max > Symbol::kMaxFiniteDifferenceOrder)
    throw std::domain_error("verify_symbol_class: finite differences limited to total order 4");
  SymbolClassReport report;
  report.order = r;
  report.probe = probe;
  for (int a = 0; a <= alpha_max; ++a) {
    for (int b = 0; b <= beta_max; ++b) {
      SymbolClassEntry entry;
      entry.alpha = a;
      entry.beta = b;
      std::vector<double> lx, ly;
      for (double R : probe.radii) {
        double sup = 0.0;
        for (int k = 0; k < probe.angular_samples; ++k) {
          const auto [x, xi] = l1_circle_point(R, k, probe.angular_samples);
          sup = std::max(sup, std::abs(partial(sym, a, b, x, xi)));
        }
        const double w = sup * std::pow(1.0 + R, a + b - r);
        entry.weighted_sup.push_back(w);
        if (!(w <= probe.ceiling)) entry.bounded = false;
        if (w > 0.0) {
          lx.push_back(std::log1p(R));
          ly.push_back(std::log(w));
        }
      }
      for (std::size_t i = 1; i < probe.radii.size(); ++i) {
        if (probe.radii[i - 1] < probe.trend_from) continue;
        const double prev = entry.weighted_sup[i - 1];
        if (entry.weighted_sup[i] > (1.0 + probe.trend_slack) * prev + probe.absolute_floor)
          entry.non_increasing = false;
      }
      if (auto fit = fit_line(lx, ly)) entry.growth_slope = fit->slope;
      report.pass = report.pass && entry.pass();
      report.entries.push_back(std::move(entry));
    }
  }
  return report;
}

}  // namespace shubin

#endif  // SHUBIN_SYMBOL_HPP
