#ifndef SHUBIN_IO_HPP
#define SHUBIN_IO_HPP

#include <cmath>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "shubin/box.hpp"
#include "shubin/matrix_calculus.hpp"
#include "shubin/operator_algebra.hpp"
#include "shubin/quantizer.hpp"

// On-disk formats.
//
// Matrix (JSON): {"rows", "cols", "pad", "provenance", "band" (optional),
//   "entries": [[re, im], ...] row-major over the computed block of
//   (rows + pad) x (cols + pad), "flagged": [[m, n], ...]}.
// Reports are CSV with a header row; numbers use %.17g so a file is a pure
// function of the values.

namespace shubin::io {

using nlohmann::json;

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline std::string num(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline json to_json(const OperatorMatrix& K) {
  json j;
  j["rows"] = K.rows();
  j["cols"] = K.cols();
  j["pad"] = K.pad();
  j["provenance"] = std::string(to_string(K.provenance()));
  if (K.band()) j["band"] = *K.band();
  json entries = json::array();
  for (const auto& z : K.data()) entries.push_back(json::array({z.real(), z.imag()}));
  j["entries"] = std::move(entries);
  json flags = json::array();
  for (const auto& f : K.flagged()) flags.push_back(json::array({f.row, f.col}));
  j["flagged"] = std::move(flags);
  return j;
}

inline OperatorMatrix matrix_from_json(const json& j) {
  try {
    const auto rows = j.at("rows").get<std::size_t>();
    const auto cols = j.at("cols").get<std::size_t>();
    const auto pad = j.value("pad", std::size_t{0});
    const Provenance prov = provenance_from_string(j.value("provenance", std::string("composed")));
    std::optional<std::size_t> band;
    if (j.contains("band") && !j.at("band").is_null()) band = j.at("band").get<std::size_t>();
    OperatorMatrix K(rows, cols, pad, prov, band);
    const json& e = j.at("entries");
    if (!e.is_array() || e.size() != K.data().size())
      throw IoError("matrix: expected " + std::to_string(K.data().size()) + " entries");
    auto data = K.data();
    for (std::size_t i = 0; i < data.size(); ++i) {
      const json& z = e[i];
      if (z.is_number()) {
        data[i] = z.get<double>();
      } else if (z.is_array() && z.size() == 2) {
        data[i] = Complex(z[0].get<double>(), z[1].get<double>());
      } else {
        throw IoError("matrix: entry " + std::to_string(i) + " is not [re, im]");
      }
    }
    if (j.contains("flagged"))
      for (const auto& f : j.at("flagged")) K.flag({f.at(0).get<std::size_t>(), f.at(1).get<std::size_t>()});
    K.require_finite("matrix");
    return K;
  } catch (const json::exception& ex) {
    throw IoError(std::string("matrix: ") + ex.what());
  }
}

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << text;
  if (!out) throw IoError("write failed for '" + path + "'");
}

inline std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_matrix(const std::string& path, const OperatorMatrix& K) { write_text(path, to_json(K).dump(1) + "\n"); }

inline OperatorMatrix read_matrix(const std::string& path) {
  json j;
  try {
    j = json::parse(read_text(path));
  } catch (const json::parse_error& ex) {
    throw IoError("'" + path + "': " + ex.what());
  }
  return matrix_from_json(j);
}

// One row per (alpha, band) fit.
inline std::string classifier_csv(const ClassifierReport& r) {
  std::string s = "alpha,band,points,slope,threshold,verdict\n";
  for (const auto& f : r.fits) {
    s += std::to_string(f.alpha) + "," + std::to_string(f.band) + "," + std::to_string(f.points) + ",";
    s += (f.slope ? num(*f.slope) : "") + "," + num(f.threshold) + ",";
    s += f.insufficient ? "insufficient" : (f.pass ? "pass" : "fail");
    s += "\n";
  }
  return s;
}

inline std::string constants_csv(const ClassifierReport& r) {
  std::string s = "alpha,N,c_half,c_full,ratio,verdict\n";
  for (const auto& c : r.constants)
    s += std::to_string(c.alpha) + "," + std::to_string(c.decay) + "," + num(c.half) + "," + num(c.full) + "," +
         num(c.ratio()) + "," + (c.stable ? "stable" : "growing") + "\n";
  return s;
}

inline std::string beals_csv(const BealsReport& r) {
  std::string s = "alpha,beta,s,norm_half,norm_full,ratio,verdict\n";
  for (const auto& c : r.cells)
    s += std::to_string(c.alpha) + "," + std::to_string(c.beta) + "," + num(c.s) + "," + num(c.norm_half) + "," +
         num(c.norm_full) + "," + num(c.ratio()) + "," + std::string(c.verdict()) + "\n";
  return s;
}

// Entry index, doubled-rule estimate, base-rule estimate, and their gap.
inline std::string convergence_csv(const QuantizedMatrix& q) {
  std::string s = "m,n,estimate_re,estimate_im,doubled_re,doubled_im,delta\n";
  const OperatorMatrix& K = q.matrix;
  for (std::size_t m = 0; m < K.computed_rows(); ++m)
    for (std::size_t n = 0; n < K.computed_cols(); ++n) {
      const Complex a = q.coarse(m, n), b = K(m, n);
      const double d = q.error.empty() ? 0.0 : q.error_at(m, n);
      s += std::to_string(m) + "," + std::to_string(n) + "," + num(a.real()) + "," + num(a.imag()) + "," +
           num(b.real()) + "," + num(b.imag()) + "," + num(d) + "\n";
    }
  return s;
}

struct PlotSeries {
  int alpha = 0;
  long band = 0;
  std::vector<double> x;  // log(1 + 2n + d)
  std::vector<double> y;  // log |Delta^alpha K|_{n+d, n}
  std::optional<double> slope;
};

// Log-log series per (alpha, band) with every entry above the floor across
// the whole reported block (no fit window), for external plotting.
inline std::vector<PlotSeries> plot_series(const OperatorMatrix& K, const ClassifierReport& report) {
  std::vector<PlotSeries> out;
  for (int alpha = 0; alpha <= report.alpha_max; ++alpha) {
    const OperatorMatrix D = delta(K, alpha);
    for (long d = -report.options.band_limit; d <= report.options.band_limit; ++d) {
      PlotSeries ps;
      ps.alpha = alpha;
      ps.band = d;
      detail::band_samples(D, d, 0, report.floor, ps.x, ps.y);
      if (ps.x.empty()) continue;
      if (auto f = fit_line(ps.x, ps.y)) ps.slope = f->slope;
      out.push_back(std::move(ps));
    }
  }
  return out;
}

inline std::string plot_series_csv(const std::vector<PlotSeries>& series, double floor) {
  std::string s = "alpha,band,log_index,log_abs\n";
  for (const auto& ps : series)
    for (std::size_t i = 0; i < ps.x.size(); ++i)
      s += std::to_string(ps.alpha) + "," + std::to_string(ps.band) + "," + num(ps.x[i]) + "," + num(ps.y[i]) + "\n";
  if (series.empty()) s += "# no entries above floor " + num(floor) + "\n";
  return s;
}

inline std::string counterexample_csv(const CounterexampleRecord& rec) {
  std::string s = "n1,value,two_step_form,exact_form\n";
  for (const auto& b : rec.band)
    s += std::to_string(b.n1) + "," + num(b.value) + "," + num(b.two_step_form) + "," + num(b.exact_form) + "\n";
  return s;
}

inline std::string box_csv(const CounterexampleRecord& rec) {
  std::string s = "alpha1,alpha2,beta1,beta2,constant\n";
  for (const auto& c : rec.box_cells)
    s += std::to_string(c.alpha[0]) + "," + std::to_string(c.alpha[1]) + "," + std::to_string(c.beta[0]) + "," +
         std::to_string(c.beta[1]) + "," + num(c.constant) + "\n";
  return s;
}

}  // namespace shubin::io

#endif  // SHUBIN_IO_HPP
