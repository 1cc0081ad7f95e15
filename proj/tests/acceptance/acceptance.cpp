// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "shubin/shubin.hpp"

using namespace shubin;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

int failures = 0;

void criterion(int id, const char* title, double budget_s, const std::function<Outcome()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& ex) {
    o = {false, std::string("exception: ") + ex.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (budget_s > 0.0 && secs > budget_s) {
    o.pass = false;
    o.detail += "; over time budget " + fmt("%.0f s", budget_s);
  }
  if (!o.pass) ++failures;
  std::printf("criterion %2d: %s  %s (%s) [%.2f s]\n", id, o.pass ? "PASS" : "FAIL", title, o.detail.c_str(), secs);
  std::fflush(stdout);
}

OperatorMatrix diag_power(double s, std::size_t size, std::size_t pad) {
  return diagonal_matrix(size, pad, [s](std::size_t n) { return std::pow(2.0 + 2.0 * n, s / 2.0); });
}

OperatorMatrix random_banded(std::size_t size, std::size_t pad, std::size_t band, std::mt19937& gen) {
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  OperatorMatrix K(size, size, pad, Provenance::composed, band);
  for (std::size_t m = 0; m < K.computed_rows(); ++m)
    for (std::size_t n = 0; n < K.computed_cols(); ++n)
      if ((m > n ? m - n : n - m) <= band) K(m, n) = Complex(dist(gen), dist(gen));
  return K;
}

}  // namespace

int main() {
  criterion(1, "basis orthonormality and ladder algebra", 10.0, [] {
    const int n_max = 40;
    const QuadratureRule q = default_quadrature(n_max);
    std::vector<std::vector<double>> phi;
    for (double x : q.nodes) phi.push_back(hermite_functions(n_max, x));
    double ortho = 0.0;
    for (int m = 0; m <= n_max; ++m)
      for (int n = 0; n <= n_max; ++n) {
        double s = 0.0;
        for (std::size_t i = 0; i < q.size(); ++i) s += q.weights[i] * phi[i][m] * phi[i][n];
        ortho = std::max(ortho, std::abs(s - (m == n ? 1.0 : 0.0)));
      }
    const int T = 47;
    const OperatorMatrix X = matrix_of(NamedOperator::multiply_x(), T, T, 2);
    const OperatorMatrix D = matrix_of(NamedOperator::derivative_x(), T, T, 2);
    const OperatorMatrix H = linear_combination(1.0, matmul(X, X), -1.0, matmul(D, D));
    const double ladder = max_abs_difference(H, matrix_of(NamedOperator::harmonic(), T, T), 48, 48);
    return Outcome{ortho < 1e-10 && ladder < 1e-12,
                   "orthonormality " + fmt("%.2e", ortho) + ", ladder " + fmt("%.2e", ladder)};
  });

  criterion(2, "quantizer ground truth", 120.0, [] {
    const double one =
        max_abs_difference(quantize(constant_symbol(1.0), 24, 24).matrix, matrix_of(NamedOperator::identity(), 24, 24));
    const double x =
        max_abs_difference(quantize(position_symbol(), 24, 24).matrix, matrix_of(NamedOperator::multiply_x(), 24, 24));
    const double h = max_abs_difference(quantize(parse_symbol("x^2 + xi^2"), 24, 24).matrix,
                                        matrix_of(NamedOperator::harmonic(), 24, 24));
    return Outcome{one < 1e-8 && x < 1e-7 && h < 1e-7,
                   "a=1 " + fmt("%.2e", one) + ", a=x " + fmt("%.2e", x) + ", a=x^2+xi^2 " + fmt("%.2e", h)};
  });

  criterion(3, "diagonal example classifies at order s/2", 0.0, [] {
    bool ok = true;
    std::string d;
    for (double s : {-2.0, -1.0, 1.0, 2.0}) {
      const OperatorMatrix K = diag_power(s, 128, 3);
      const ClassifierReport rep = classify(K, s / 2.0, 2, 2);
      const auto r = fit_order(K);
      const bool slopes = r[0] && r[1] && std::abs(*r[0] - s / 2.0) <= 0.05 && std::abs(*r[1] - (s / 2.0 - 1.0)) <= 0.1;
      ok = ok && rep.pass && slopes;
      d += "s=" + fmt("%g", s) + ": " + (rep.pass ? "pass" : "fail") + " r0=" + fmt("%.3f", r[0].value_or(NAN)) +
           " r1=" + fmt("%.3f", r[1].value_or(NAN)) + "; ";
    }
    return Outcome{ok, d};
  });

  criterion(4, "off-diagonal mechanism via oscillator conjugation", 0.0, [] {
    const double r = off_diagonal_check(harmonic_symbol(1.0), 16, 16);
    return Outcome{r < 1e-6, "residual " + fmt("%.2e", r)};
  });

  criterion(5, "x-derivative identity on quantized matrices", 0.0, [] {
    const double rx = quantize_derivative_check(position_symbol(), 16, 16);
    const double rh = quantize_derivative_check(harmonic_symbol(1.0), 16, 16);
    return Outcome{rx < 1e-6 && rh < 1e-6, "a=x " + fmt("%.2e", rx) + ", a=jb(1) " + fmt("%.2e", rh)};
  });

  criterion(6, "commutator shortcuts match products", 0.0, [] {
    std::mt19937 gen(20240601);
    const int T = 31;
    const OperatorMatrix H = matrix_of(NamedOperator::harmonic(), T, T, 3);
    const OperatorMatrix Z = matrix_of(NamedOperator::shift(), T, T, 3);
    double worst = 0.0;
    for (int k = 0; k < 20; ++k) {
      const OperatorMatrix A = random_banded(T + 1, 3, 1 + static_cast<std::size_t>(k % 4), gen);
      const OperatorMatrix hm = commutator(A, H);
      worst = std::max(worst, max_abs_difference(commutator_with_H(A), hm, hm.rows(), hm.cols()));
      const OperatorMatrix zs = commutator_with_Z(A), zm = commutator(A, Z);
      worst = std::max(worst, max_abs_difference(zs, zm, std::min(zs.rows(), zm.rows()), std::min(zs.cols(), zm.cols())));
    }
    return Outcome{worst < 1e-12, "max deviation " + fmt("%.2e", worst)};
  });

  criterion(7, "classifier and commutator test agree", 300.0, [] {
    const int M = 95;
    const std::size_t pad = 3;
    const std::vector<double> s_list{-2.0, 0.0, 2.0};
    struct Case {
      std::string name;
      OperatorMatrix K;
      double r;
      double floor;
      bool expect;
    };
    std::vector<Case> cases;
    cases.push_back({"HP(1)", matrix_of(NamedOperator::harmonic_power(1.0), M, M, pad), 1.0, 1e-13, true});
    cases.push_back({"HP(-1)", matrix_of(NamedOperator::harmonic_power(-1.0), M, M, pad), -1.0, 1e-13, true});
    cases.push_back({"Shift", matrix_of(NamedOperator::shift(), M, M, pad), 0.0, 1e-13, true});
    cases.push_back({"Creation", matrix_of(NamedOperator::creation(), M, M, pad), 1.0, 1e-13, true});
    // quadrature noise sits near 1e-12; entries below 1e-10 are not fitted
    cases.push_back({"quantize(jb(1))", quantize(harmonic_symbol(1.0), M, M, {}, pad).matrix, 1.0, 1e-10, true});
    cases.push_back({"diag(1+n)", diagonal_matrix(M + 1, pad, [](std::size_t n) { return 1.0 + n; }), 0.0, 1e-13,
                     false});
    bool ok = true;
    std::string d;
    for (const auto& c : cases) {
      const bool cl = classify(c.K.reported(), c.r / 2.0, 2, 2, c.floor).pass;
      const bool be = beals_test(c.K, c.r, 2, 2, s_list).pass;
      ok = ok && cl == c.expect && be == c.expect;
      d += c.name + " " + (cl ? "pass" : "fail") + "/" + (be ? "pass" : "fail") + "; ";
    }
    return Outcome{ok, d};
  });

  criterion(8, "square-summability tails", 0.0, [] {
    const std::vector<std::size_t> blocks{16, 32, 64, 128};
    const auto inc = tail_increments(frobenius_tail(generated_symbol_matrix(-0.75, 4.0, 128), blocks));
    const auto wit = tail_increments(frobenius_tail(diagonal_matrix(128, 0, [](std::size_t) { return 1.0; }), blocks));
    bool dec = true, nondec = true;
    for (std::size_t i = 1; i < inc.size(); ++i) {
      dec = dec && inc[i] < inc[i - 1];
      nondec = nondec && wit[i] >= wit[i - 1];
    }
    std::string d = "order -0.75 increments";
    for (double v : inc) d += " " + fmt("%.3g", v);
    d += "; order 0 increments";
    for (double v : wit) d += " " + fmt("%.3g", v);
    return Outcome{dec && nondec, d};
  });

  criterion(9, "Schur bound dominates the l2 norm", 0.0, [] {
    const int M = 63;
    std::vector<std::pair<std::string, OperatorMatrix>> corpus{
        {"HP(1)", matrix_of(NamedOperator::harmonic_power(1.0), M, M)},
        {"HP(-1)", matrix_of(NamedOperator::harmonic_power(-1.0), M, M)},
        {"Shift", matrix_of(NamedOperator::shift(), M, M)},
        {"Creation", matrix_of(NamedOperator::creation(), M, M)},
        {"x", matrix_of(NamedOperator::multiply_x(), M, M)},
        {"quantize(jb(1))", quantize(harmonic_symbol(1.0), M, M).matrix},
        {"quantize(jb(-2))", quantize(harmonic_symbol(-2.0), M, M).matrix},
        {"SM^-0.75", generated_symbol_matrix(-0.75, 4.0, 64)},
        {"SM^0.5", generated_symbol_matrix(0.5, 2.0, 64)}};
    bool ok = true;
    double tightest = INFINITY;
    for (const auto& [name, K] : corpus) {
      const double s = schur_norm_bound(K), l = l2_norm(K);
      ok = ok && s >= l;
      tightest = std::min(tightest, s - l);
    }
    return Outcome{ok, std::to_string(corpus.size()) + " matrices, min(schur - l2) " + fmt("%.3g", tightest)};
  });

  criterion(10, "two-dimensional creation counterexample", 0.0, [] {
    const CounterexampleRecord rec = counterexample_2d(24);
    const bool slope = rec.slope_n2 <= 0.05;
    const bool box = rec.box_constant <= 2.0;
    const bool band = rec.two_step_residual < 1e-12;
    std::string d = "slope in n2 " + fmt("%.3g", rec.slope_n2) + (slope ? " ok" : " BAD") + "; box constant " +
                    fmt("%.3f", rec.box_constant) + (box ? " ok" : " BAD") + "; band vs 2/(sqrt(n1+3)+sqrt(n1+1)) " +
                    fmt("%.3g", rec.two_step_residual) + (band ? " ok" : " BAD") +
                    "; band vs 1/(sqrt(n1+2)+sqrt(n1+1)) " + fmt("%.3g", rec.exact_form_residual);
    return Outcome{slope && box && band, d};
  });

  criterion(11, "dequantization roundtrip", 0.0, [] {
    const Symbol a = harmonic_symbol(-2.0);
    std::vector<double> pts;
    for (int k = 0; k <= 24; ++k) pts.push_back(-3.0 + 0.25 * k);
    const auto err = [&](int T) {
      const QuantizedMatrix q = quantize(a, T - 1, T - 1);
      const Grid2d g = dequantize_symbol(q.matrix, pts, pts, default_quadrature(T));
      double worst = 0.0;
      for (std::size_t i = 0; i < pts.size(); ++i)
        for (std::size_t j = 0; j < pts.size(); ++j) {
          const double exact = a(pts[i], pts[j]).real();
          worst = std::max(worst, std::abs(g.at(i, j) - exact) / exact);
        }
      return worst;
    };
    const double e48 = err(48), e96 = err(96);
    return Outcome{e48 <= 2e-2 && e96 <= 0.5 * e48,
                   "T=48 " + fmt("%.3g", e48) + ", T=96 " + fmt("%.3g", e96) + ", ratio " + fmt("%.2f", e48 / e96)};
  });

  criterion(12, "order-0 symbol size vs Schur bound", 0.0, [] {
    const std::vector<std::pair<std::string, Symbol>> corpus{
        {"1", constant_symbol(1.0)},
        {"jb(0)", harmonic_symbol(0.0)},
        {"(x - i xi) jb(-1)", parse_symbol("(x - i*xi) * jb(-1)")},
        {"x xi jb(-2)", parse_symbol("x*xi*jb(-2)")}};
    bool ok = true;
    std::string d;
    for (const auto& [name, sym] : corpus) {
      double sup = 0.0;
      for (int i = -40; i <= 40; ++i)
        for (int j = -40; j <= 40; ++j) sup = std::max(sup, std::abs(sym(0.25 * i, 0.25 * j)));
      const double bound = schur_norm_bound(quantize(sym, 47, 47).matrix);
      ok = ok && sup <= 10.0 * bound;
      d += name + ": sup " + fmt("%.3f", sup) + " vs " + fmt("%.3f", bound) + "; ";
    }
    return Outcome{ok, d};
  });

  std::printf("%d of 12 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
