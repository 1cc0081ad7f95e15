#ifndef SHUBIN_CLI_HPP
#define SHUBIN_CLI_HPP

#include <chrono>
#include <ctime>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "shubin/box.hpp"
#include "shubin/expression.hpp"
#include "shubin/io.hpp"
#include "shubin/matrix_calculus.hpp"
#include "shubin/operator_algebra.hpp"
#include "shubin/quantizer.hpp"

// Batch jobs. A job config is one JSON document; see docs/config.md.

namespace shubin::cli {

using nlohmann::json;

enum class Command { quantize, classify, beals, roundtrip, demo2d, report };

inline Command command_from_string(const std::string& s) {
  if (s == "quantize") return Command::quantize;
  if (s == "classify") return Command::classify;
  if (s == "beals") return Command::beals;
  if (s == "roundtrip") return Command::roundtrip;
  if (s == "demo2d") return Command::demo2d;
  if (s == "report") return Command::report;
  throw std::invalid_argument("unknown command '" + s + "'");
}

// Failure with the stage that produced it. Exit codes are per stage.
class JobError : public std::runtime_error {
 public:
  JobError(std::string stage, int code, const std::string& what)
      : std::runtime_error(what), stage_(std::move(stage)), code_(code) {}
  const std::string& stage() const { return stage_; }
  int code() const { return code_; }

 private:
  std::string stage_;
  int code_;
};

inline constexpr int kExitConfig = 2;
inline constexpr int kExitExpression = 3;
inline constexpr int kExitQuadrature = 4;
inline constexpr int kExitPad = 5;
inline constexpr int kExitIo = 6;
inline constexpr int kExitCompute = 7;

struct OperatorSpec {
  std::string name;
  double parameter = 0.0;
};

struct JobConfig {
  Command command = Command::classify;
  std::optional<std::string> symbol;         // expression
  std::optional<OperatorSpec> op;            // named operator
  std::optional<std::string> matrix_file;    // matrix in the JSON format
  int M = 47;
  int N = 47;
  std::size_t pad = 3;
  QuantizationConfig quantization;
  double max_non_converged_fraction = 0.0;
  // classifier
  std::optional<double> classify_order;      // defaults to beals order / 2
  int classify_alpha_max = 2;
  int decay_max = 4;
  double floor = 1e-13;
  ClassifierOptions classifier;
  // beals
  std::optional<double> beals_order;
  int beals_alpha_max = 2;
  int beta_max = 2;
  std::vector<double> s_list = default_s_list();
  BealsOptions beals;
  // roundtrip
  double extent = 3.0;
  int grid_points = 25;
  // demo2d
  int cutoff = 24;
  std::string prefix;                        // output file name prefix
};

namespace detail {

template <class T>
T get_or(const json& j, const char* key, T fallback) {
  if (!j.contains(key) || j.at(key).is_null()) return fallback;
  return j.at(key).get<T>();
}

}  // namespace detail

inline JobConfig parse_config(const json& j) {
  JobConfig c;
  try {
    if (!j.is_object()) throw std::invalid_argument("config must be a JSON object");
    if (!j.contains("command")) throw std::invalid_argument("config needs a 'command'");
    c.command = command_from_string(j.at("command").get<std::string>());
    if (j.contains("symbol")) c.symbol = j.at("symbol").get<std::string>();
    if (j.contains("operator")) {
      const json& o = j.at("operator");
      if (o.is_string()) {
        c.op = OperatorSpec{o.get<std::string>(), 0.0};
      } else {
        c.op = OperatorSpec{o.at("name").get<std::string>(), detail::get_or(o, "parameter", 0.0)};
      }
    }
    if (j.contains("matrix_file")) c.matrix_file = j.at("matrix_file").get<std::string>();
    const int sources = (c.symbol ? 1 : 0) + (c.op ? 1 : 0) + (c.matrix_file ? 1 : 0);
    if (sources > 1) throw std::invalid_argument("give only one of 'symbol', 'operator', 'matrix_file'");
    if (c.command != Command::demo2d && sources == 0)
      throw std::invalid_argument("config needs one of 'symbol', 'operator', 'matrix_file'");
    if ((c.command == Command::quantize || c.command == Command::roundtrip) && !c.symbol)
      throw std::invalid_argument("'" + j.at("command").get<std::string>() + "' needs a 'symbol'");

    if (j.contains("truncation")) {
      const json& t = j.at("truncation");
      if (t.is_number_integer()) {
        c.M = c.N = t.get<int>() - 1;
      } else if (t.is_object()) {
        c.M = detail::get_or(t, "M", c.M);
        c.N = detail::get_or(t, "N", c.M);
        c.pad = detail::get_or(t, "pad", c.pad);
      } else {
        throw std::invalid_argument("'truncation' must be an integer or {M, N, pad}");
      }
    }
    if (c.M < 0 || c.N < 0) throw std::invalid_argument("truncation must be positive");
    if (j.contains("quantization")) {
      const json& q = j.at("quantization");
      c.quantization.window = detail::get_or(q, "window", c.quantization.window);
      c.quantization.panel_width = detail::get_or(q, "panel_width", c.quantization.panel_width);
      c.quantization.panels = detail::get_or(q, "panels", c.quantization.panels);
      c.quantization.order_per_panel = detail::get_or(q, "order_per_panel", c.quantization.order_per_panel);
      c.quantization.tolerance = detail::get_or(q, "tolerance", c.quantization.tolerance);
      c.max_non_converged_fraction = detail::get_or(q, "max_non_converged_fraction", c.max_non_converged_fraction);
    }
    if (j.contains("classifier")) {
      const json& k = j.at("classifier");
      if (k.contains("r")) c.classify_order = k.at("r").get<double>();
      c.classify_alpha_max = detail::get_or(k, "alpha_max", c.classify_alpha_max);
      c.decay_max = detail::get_or(k, "N_max", c.decay_max);
      c.floor = detail::get_or(k, "floor", c.floor);
      c.classifier.slope_slack = detail::get_or(k, "slope_slack", c.classifier.slope_slack);
      c.classifier.stabilization_slack = detail::get_or(k, "stabilization_slack", c.classifier.stabilization_slack);
      c.classifier.band_limit = detail::get_or(k, "band_limit", c.classifier.band_limit);
    }
    if (j.contains("beals")) {
      const json& b = j.at("beals");
      if (b.contains("r")) c.beals_order = b.at("r").get<double>();
      c.beals_alpha_max = detail::get_or(b, "alpha_max", c.beals_alpha_max);
      c.beta_max = detail::get_or(b, "beta_max", c.beta_max);
      if (b.contains("s_list")) c.s_list = b.at("s_list").get<std::vector<double>>();
      c.beals.stabilization_slack = detail::get_or(b, "stabilization_slack", c.beals.stabilization_slack);
    }
    if (j.contains("roundtrip")) {
      const json& r = j.at("roundtrip");
      c.extent = detail::get_or(r, "extent", c.extent);
      c.grid_points = detail::get_or(r, "points", c.grid_points);
      if (!(c.extent > 0.0) || c.grid_points < 2) throw std::invalid_argument("roundtrip grid must be non-empty");
    }
    if (j.contains("demo2d")) c.cutoff = detail::get_or(j.at("demo2d"), "cutoff", c.cutoff);
    if (j.contains("output")) c.prefix = detail::get_or(j.at("output"), "prefix", c.prefix);
  } catch (const json::exception& ex) {
    throw JobError("config", kExitConfig, ex.what());
  } catch (const std::invalid_argument& ex) {
    throw JobError("config", kExitConfig, ex.what());
  }
  return c;
}

inline JobConfig load_config(const std::string& path) {
  std::string text;
  try {
    text = io::read_text(path);
  } catch (const io::IoError& ex) {
    throw JobError("config", kExitConfig, ex.what());
  }
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& ex) {
    throw JobError("config", kExitConfig, ex.what());
  }
  return parse_config(j);
}

struct RunOptions {
  std::filesystem::path out_dir = ".";
  bool metadata = true;
};

struct RunResult {
  int exit_code = 0;
  json summary;
};

namespace detail {

class Job {
 public:
  Job(const JobConfig& cfg, const RunOptions& opt) : cfg_(cfg), opt_(opt) {}

  json run() {
    std::error_code ec;
    std::filesystem::create_directories(opt_.out_dir, ec);
    if (ec) throw JobError("output", kExitIo, "cannot create '" + opt_.out_dir.string() + "': " + ec.message());
    switch (cfg_.command) {
      case Command::quantize: quantize_job(); break;
      case Command::classify: classify_job(source()); break;
      case Command::beals: beals_job(source()); break;
      case Command::roundtrip: roundtrip_job(); break;
      case Command::demo2d: demo2d_job(); break;
      case Command::report: {
        const OperatorMatrix K = source();
        write_matrix("matrix.json", K);
        classify_job(K);
        beals_job(K);
        break;
      }
    }
    summary_["status"] = "ok";
    summary_["files"] = files_;
    return summary_;
  }

 private:
  std::string name(const std::string& base) const { return cfg_.prefix.empty() ? base : cfg_.prefix + "_" + base; }

  void write(const std::string& base, const std::string& text) {
    const std::string file = name(base);
    try {
      io::write_text((opt_.out_dir / file).string(), text);
    } catch (const io::IoError& ex) {
      throw JobError("output", kExitIo, ex.what());
    }
    files_.push_back(file);
  }

  void write_matrix(const std::string& base, const OperatorMatrix& K) {
    json j = io::to_json(K);
    if (opt_.metadata) j["metadata"] = metadata();
    write(base, j.dump(1) + "\n");
  }

  json metadata() const {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
    return {{"generator", "shubin"}, {"created", buf}};
  }

  Symbol symbol() const {
    try {
      return parse_symbol(*cfg_.symbol);
    } catch (const ExpressionError& ex) {
      throw JobError("expression", kExitExpression, ex.what());
    }
  }

  QuantizedMatrix quantized(const Symbol& sym, int M, int N, std::size_t pad) const {
    QuantizedMatrix q;
    try {
      q = quantize(sym, M, N, cfg_.quantization, pad);
    } catch (const std::invalid_argument& ex) {
      throw JobError("quadrature", kExitQuadrature, ex.what());
    }
    if (!q.matrix.all_finite()) throw JobError("quadrature", kExitQuadrature, "non-finite matrix entries");
    if (q.non_converged_fraction() > cfg_.max_non_converged_fraction)
      throw JobError("quadrature", kExitQuadrature,
                     std::to_string(q.non_converged) + " entries differ by more than " +
                         io::num(cfg_.quantization.tolerance) + " under node doubling (max " + io::num(q.max_error) +
                         ")");
    return q;
  }

  double beals_order() const {
    if (cfg_.beals_order) return *cfg_.beals_order;
    if (cfg_.classify_order) return 2.0 * *cfg_.classify_order;
    if (cfg_.op)
      if (auto r = NamedOperator::from_name(cfg_.op->name, cfg_.op->parameter).order()) return *r;
    if (cfg_.symbol) return symbol().declared_order();
    throw JobError("config", kExitConfig, "set beals.r or classifier.r for a matrix file");
  }

  double classify_order() const { return cfg_.classify_order ? *cfg_.classify_order : beals_order() / 2.0; }

  OperatorMatrix source() {
    if (cfg_.symbol) {
      const QuantizedMatrix q = quantized(symbol(), cfg_.M, cfg_.N, cfg_.pad);
      summary_["quadrature_max_delta"] = q.max_error;
      return q.matrix;
    }
    if (cfg_.op) {
      try {
        return matrix_of(NamedOperator::from_name(cfg_.op->name, cfg_.op->parameter), cfg_.M, cfg_.N, cfg_.pad);
      } catch (const std::invalid_argument& ex) {
        throw JobError("config", kExitConfig, ex.what());
      }
    }
    try {
      return io::read_matrix(*cfg_.matrix_file);
    } catch (const std::exception& ex) {
      throw JobError("input", kExitIo, ex.what());
    }
  }

  void quantize_job() {
    const QuantizedMatrix q = quantized(symbol(), cfg_.M, cfg_.N, cfg_.pad);
    write_matrix("matrix.json", q.matrix);
    write("convergence.csv", io::convergence_csv(q));
    summary_["quadrature_max_delta"] = q.max_error;
    summary_["non_converged"] = q.non_converged;
    summary_["nodes_per_axis"] = q.rule.size();
  }

  void classify_job(const OperatorMatrix& K) {
    ClassifierReport rep;
    const OperatorMatrix block = K.reported();
    try {
      rep = classify(block, classify_order(), cfg_.classify_alpha_max, cfg_.decay_max, cfg_.floor, cfg_.classifier);
    } catch (const std::invalid_argument& ex) {
      throw JobError("classify", kExitCompute, ex.what());
    }
    write("classifier.csv", io::classifier_csv(rep));
    write("constants.csv", io::constants_csv(rep));
    write("series.csv", io::plot_series_csv(io::plot_series(block, rep), rep.floor));
    json fits = json::object();
    for (int a = 0; a <= rep.alpha_max; ++a)
      if (const BandFit* f = rep.fit(a, 0); f && f->slope) fits[std::to_string(a)] = *f->slope;
    summary_["classify"] = {{"r", rep.order},
                            {"pass", rep.pass},
                            {"diagonal_slopes", fits},
                            {"slope_slack", rep.options.slope_slack},
                            {"stabilization_slack", rep.options.stabilization_slack}};
  }

  void beals_job(const OperatorMatrix& K) {
    BealsReport rep;
    try {
      rep = beals_test(K, beals_order(), cfg_.beals_alpha_max, cfg_.beta_max, cfg_.s_list, cfg_.beals);
    } catch (const std::invalid_argument& ex) {
      throw JobError("beals", kExitCompute, ex.what());
    }
    write("beals.csv", io::beals_csv(rep));
    if (rep.pad_exhausted_cells() > 0)
      throw JobError("beals", kExitPad,
                     "pad exhausted in " + std::to_string(rep.pad_exhausted_cells()) + " cells; matrix pad is " +
                         std::to_string(K.pad()) + ", beta_max is " + std::to_string(cfg_.beta_max));
    summary_["beals"] = {{"r", rep.order},
                         {"pass", rep.pass},
                         {"s_list", rep.s_list},
                         {"stabilization_slack", rep.options.stabilization_slack}};
  }

  void roundtrip_job() {
    const Symbol sym = symbol();
    std::vector<double> grid;
    for (int i = 0; i < cfg_.grid_points; ++i)
      grid.push_back(-cfg_.extent + 2.0 * cfg_.extent * i / (cfg_.grid_points - 1));
    std::string csv = "truncation,x,xi,exact_re,exact_im,recovered_re,recovered_im,relative_error\n";
    json errors = json::array();
    for (int scale = 1; scale <= 2; ++scale) {
      const int T = scale * (cfg_.M + 1);
      const QuantizedMatrix q = quantized(sym, T - 1, T - 1, 0);
      const Grid2d a = dequantize_symbol(q.matrix, grid, grid, default_quadrature(T));
      double worst = 0.0;
      for (std::size_t i = 0; i < grid.size(); ++i)
        for (std::size_t j = 0; j < grid.size(); ++j) {
          const Complex exact = sym(grid[i], grid[j]), got = a.at(i, j);
          const double rel = std::abs(got - exact) / std::max(std::abs(exact), 1e-300);
          worst = std::max(worst, rel);
          csv += std::to_string(T) + "," + io::num(grid[i]) + "," + io::num(grid[j]) + "," + io::num(exact.real()) +
                 "," + io::num(exact.imag()) + "," + io::num(got.real()) + "," + io::num(got.imag()) + "," +
                 io::num(rel) + "\n";
        }
      errors.push_back({{"truncation", T}, {"max_relative_error", worst}});
    }
    write("roundtrip.csv", csv);
    summary_["roundtrip"] = errors;
  }

  void demo2d_job() {
    CounterexampleRecord rec;
    try {
      rec = counterexample_2d(cfg_.cutoff);
    } catch (const std::invalid_argument& ex) {
      throw JobError("demo2d", kExitCompute, ex.what());
    }
    write("counterexample.csv", io::counterexample_csv(rec));
    write("box.csv", io::box_csv(rec));
    summary_["demo2d"] = {{"cutoff", rec.cutoff},
                          {"slope_n2", rec.slope_n2},
                          {"slope_n1", rec.slope_n1},
                          {"box_constant", rec.box_constant},
                          {"two_step_residual", rec.two_step_residual},
                          {"exact_form_residual", rec.exact_form_residual},
                          {"identity_residual", rec.identity_residual}};
  }

  const JobConfig& cfg_;
  const RunOptions& opt_;
  json summary_ = json::object();
  std::vector<std::string> files_;
};

}  // namespace detail

inline const char* command_name(Command c) {
  switch (c) {
    case Command::quantize: return "quantize";
    case Command::classify: return "classify";
    case Command::beals: return "beals";
    case Command::roundtrip: return "roundtrip";
    case Command::demo2d: return "demo2d";
    case Command::report: return "report";
  }
  return "?";
}

// Runs one job; failures become a nonzero exit code and a summary naming the
// stage.
inline RunResult run(const JobConfig& cfg, const RunOptions& opt = {}) {
  RunResult r;
  try {
    r.summary = detail::Job(cfg, opt).run();
  } catch (const JobError& ex) {
    r.exit_code = ex.code();
    r.summary = {{"status", "error"}, {"stage", ex.stage()}, {"message", ex.what()}};
  } catch (const std::exception& ex) {
    r.exit_code = kExitCompute;
    r.summary = {{"status", "error"}, {"stage", "compute"}, {"message", ex.what()}};
  }
  r.summary["command"] = command_name(cfg.command);
  return r;
}

}  // namespace shubin::cli

#endif  // SHUBIN_CLI_HPP
