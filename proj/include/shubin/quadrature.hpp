#ifndef SHUBIN_QUADRATURE_HPP
#define SHUBIN_QUADRATURE_HPP

#include <cmath>
#include <cstddef>
#include <numbers>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace shubin {

struct GaussLegendre {
  std::vector<double> nodes;    // ascending on (-1, 1)
  std::vector<double> weights;
};

// Nodes and weights of the order-point Gauss-Legendre rule on [-1, 1], by
// Newton iteration on P_order started from the Chebyshev-like guesses.
inline GaussLegendre gauss_legendre(int order) {
  if (order < 1) throw std::invalid_argument("gauss_legendre: order must be >= 1");
  GaussLegendre rule;
  rule.nodes.assign(order, 0.0);
  rule.weights.assign(order, 0.0);
  const int half = (order + 1) / 2;
  for (int i = 0; i < half; ++i) {
    double z = std::cos(std::numbers::pi * (i + 0.75) / (order + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = 0.0;
      for (int k = 1; k <= order; ++k) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p2) / k;
      }
      dp = order * (z * p0 - p1) / (z * z - 1.0);
      const double dz = p0 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    // recompute derivative at the converged node
    double p0 = 1.0, p1 = 0.0;
    for (int k = 1; k <= order; ++k) {
      const double p2 = p1;
      p1 = p0;
      p0 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p2) / k;
    }
    dp = order * (z * p0 - p1) / (z * z - 1.0);
    const double w = 2.0 / ((1.0 - z * z) * dp * dp);
    rule.nodes[i] = -z;
    rule.nodes[order - 1 - i] = z;
    rule.weights[i] = w;
    rule.weights[order - 1 - i] = w;
  }
  if (order % 2 == 1) rule.nodes[order / 2] = 0.0;
  return rule;
}

// Composite Gauss-Legendre rule on [-L, L].
struct QuadratureRule {
  std::vector<double> nodes;    // strictly increasing
  std::vector<double> weights;  // strictly positive
  double half_width = 0.0;
  int panels = 0;
  int order_per_panel = 0;
  std::string scheme = "composite-gauss-legendre";

  std::size_t size() const { return nodes.size(); }

  template <class F>
  auto integrate(F&& f) const {
    using R = decltype(f(0.0));
    R sum{};
    for (std::size_t i = 0; i < nodes.size(); ++i) sum += weights[i] * f(nodes[i]);
    return sum;
  }
};

inline QuadratureRule make_quadrature(double half_width, int panels, int order_per_panel) {
  if (!(half_width > 0.0) || !std::isfinite(half_width))
    throw std::invalid_argument("make_quadrature: half width must be positive");
  if (panels < 1) throw std::invalid_argument("make_quadrature: need at least one panel");
  if (order_per_panel < 2) throw std::invalid_argument("make_quadrature: order per panel must be >= 2");

  const GaussLegendre base = gauss_legendre(order_per_panel);
  QuadratureRule rule;
  rule.half_width = half_width;
  rule.panels = panels;
  rule.order_per_panel = order_per_panel;
  rule.nodes.reserve(static_cast<std::size_t>(panels) * order_per_panel);
  rule.weights.reserve(rule.nodes.capacity());
  const double h = 2.0 * half_width / panels;
  for (int p = 0; p < panels; ++p) {
    const double left = -half_width + p * h;
    for (int q = 0; q < order_per_panel; ++q) {
      rule.nodes.push_back(left + 0.5 * h * (base.nodes[q] + 1.0));
      rule.weights.push_back(0.5 * h * base.weights[q]);
    }
  }
  return rule;
}

// Same window and per-panel order, twice the panels. Used for the
// node-doubling accuracy check.
inline QuadratureRule refined(const QuadratureRule& rule) {
  return make_quadrature(rule.half_width, 2 * rule.panels, rule.order_per_panel);
}

// Default window for expansions up to index n_max: past the classical
// turning point by a fixed decay pad.
inline double default_window(int n_max, double decay_pad = 6.0) {
  return std::sqrt(2.0 * (2.0 * n_max + 1.0)) + decay_pad;
}

inline QuadratureRule default_quadrature(int n_max, double panel_width = 0.5, int order = 16) {
  const double half_width = default_window(n_max);
  const int panels = static_cast<int>(std::ceil(2.0 * half_width / panel_width));
  return make_quadrature(half_width, panels, order);
}

}  // namespace shubin

#endif  // SHUBIN_QUADRATURE_HPP
