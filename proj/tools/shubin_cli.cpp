// Batch front end: shubin --config job.json --out results/
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "shubin/cli.hpp"
#include "shubin/parallel.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Isotropic calculus in the Hermite basis: batch jobs"};
  std::string config;
  std::string out = ".";
  int threads = 1;
  bool no_metadata = false;
  app.add_option("--config", config, "job config (JSON)")->required();
  app.add_option("--out", out, "output directory");
  app.add_option("--threads", threads, "worker threads; 0 uses every core");
  app.add_flag("--no-metadata", no_metadata, "omit timestamps from written files");
  CLI11_PARSE(app, argc, argv);

  shubin::set_thread_count(threads);
  shubin::cli::RunOptions opt;
  opt.out_dir = out;
  opt.metadata = !no_metadata;

  shubin::cli::RunResult result;
  try {
    result = shubin::cli::run(shubin::cli::load_config(config), opt);
  } catch (const shubin::cli::JobError& ex) {
    result.exit_code = ex.code();
    result.summary = {{"status", "error"}, {"stage", ex.stage()}, {"message", ex.what()}};
  }
  if (result.exit_code != 0) {
    std::cerr << "shubin: " << result.summary.value("stage", "?") << ": " << result.summary.value("message", "")
              << "\n";
  } else {
    nlohmann::json file = result.summary;
    if (opt.metadata) file["metadata"] = {{"threads", shubin::thread_count()}};
    try {
      shubin::io::write_text((opt.out_dir / "summary.json").string(), file.dump(1) + "\n");
    } catch (const shubin::io::IoError& ex) {
      std::cerr << "shubin: output: " << ex.what() << "\n";
      result.summary = {{"status", "error"}, {"stage", "output"}, {"message", ex.what()}};
      result.exit_code = shubin::cli::kExitIo;
    }
  }
  std::cout << result.summary.dump() << "\n";
  return result.exit_code;
}
