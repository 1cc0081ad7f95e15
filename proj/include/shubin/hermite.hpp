#ifndef SHUBIN_HERMITE_HPP
#define SHUBIN_HERMITE_HPP

#include <cmath>
#include <numbers>
#include <span>
#include <stdexcept>
#include <vector>

namespace shubin {

// Desk-scale cap on the Hermite index. The normalized recurrence itself is
// stable well beyond this, but quadrature defaults are tuned up to here.
inline constexpr int kMaxHermiteIndex = 128;

namespace detail {

// Rescale threshold for the unnormalized recurrence. The Gaussian factor is
// applied at the end so large |x| does not underflow phi_0 before the
// polynomial part has had a chance to grow.
inline constexpr double kRescale = 1e150;

}  // namespace detail

// Fills out[0..n_max] with the L2-normalized Hermite functions
//   phi_0(x) = pi^{-1/4} exp(-x^2/2),
//   phi_{n+1}(x) = x sqrt(2/(n+1)) phi_n(x) - sqrt(n/(n+1)) phi_{n-1}(x).
inline void hermite_functions(int n_max, double x, std::span<double> out) {
  if (n_max < 0) throw std::invalid_argument("hermite_functions: n_max must be >= 0");
  if (out.size() < static_cast<std::size_t>(n_max) + 1)
    throw std::invalid_argument("hermite_functions: output span too small");

  const double gauss_log = -0.5 * x * x;
  double log_scale = 0.0;
  double prev = 0.0;
  double cur = 1.0 / std::sqrt(std::sqrt(std::numbers::pi));
  out[0] = cur * std::exp(gauss_log);
  for (int n = 0; n < n_max; ++n) {
    const double next = x * std::sqrt(2.0 / (n + 1)) * cur -
                        std::sqrt(static_cast<double>(n) / (n + 1)) * prev;
    prev = cur;
    cur = next;
    if (std::abs(cur) > detail::kRescale) {
      cur /= detail::kRescale;
      prev /= detail::kRescale;
      log_scale += std::log(detail::kRescale);
    }
    out[n + 1] = cur * std::exp(gauss_log + log_scale);
  }
}

inline std::vector<double> hermite_functions(int n_max, double x) {
  std::vector<double> out(static_cast<std::size_t>(n_max) + 1);
  hermite_functions(n_max, x, out);
  return out;
}

// phi_n(x). Total: far outside the turning point the value underflows to 0.
inline double hermite_function(int n, double x) {
  if (n < 0) throw std::invalid_argument("hermite_function: index must be >= 0");
  return hermite_functions(n, x).back();
}

// phi_n'(x) = sqrt(n/2) phi_{n-1}(x) - sqrt((n+1)/2) phi_{n+1}(x), for n <= n_max.
inline std::vector<double> hermite_derivatives(int n_max, double x) {
  const auto phi = hermite_functions(n_max + 1, x);
  std::vector<double> d(static_cast<std::size_t>(n_max) + 1);
  for (int n = 0; n <= n_max; ++n) {
    const double down = n > 0 ? std::sqrt(n / 2.0) * phi[n - 1] : 0.0;
    d[n] = down - std::sqrt((n + 1) / 2.0) * phi[n + 1];
  }
  return d;
}

// phi_n''(x) from applying the ladder derivative identity twice.
inline std::vector<double> hermite_second_derivatives(int n_max, double x) {
  const auto d1 = hermite_derivatives(n_max + 1, x);
  std::vector<double> d2(static_cast<std::size_t>(n_max) + 1);
  for (int n = 0; n <= n_max; ++n) {
    const double down = n > 0 ? std::sqrt(n / 2.0) * d1[n - 1] : 0.0;
    d2[n] = down - std::sqrt((n + 1) / 2.0) * d1[n + 1];
  }
  return d2;
}

// Classical turning point of phi_n: |x| = sqrt(2n+1).
inline double turning_point(int n) { return std::sqrt(2.0 * n + 1.0); }

}  // namespace shubin

#endif  // SHUBIN_HERMITE_HPP
