// Command-line front end: check-kernel, verify and sweep over a JSON run config.

#include "fracop/cli.hpp"
#include "fracop/error.hpp"

#include <CLI11.hpp>

#include <iostream>

#ifdef _OPENMP
#include <omp.h>
#endif

int main(int argc, char** argv) {
  CLI::App app{"fracop: fractional operator toolkit and weighted-inequality harness"};
  app.require_subcommand(1);

  std::string config, out, axis;
  int threads = 0;
  app.add_option("--threads", threads, "OpenMP worker count (0 = runtime default)");

  auto* check = app.add_subcommand("check-kernel", "size / Hörmander / (H) certificates");
  check->add_option("--config", config, "run config (JSON)")->required();
  check->add_option("--out", out, "output directory");

  auto* verify = app.add_subcommand("verify", "run the inequality scenarios");
  verify->add_option("--config", config, "run config (JSON)")->required();
  verify->add_option("--out", out, "output directory");

  auto* sweep = app.add_subcommand("sweep", "sup ratios along one parameter axis");
  sweep->add_option("--config", config, "run config (JSON)")->required();
  sweep->add_option("--axis", axis, "grid | p | alpha | lambda")->required();
  sweep->add_option("--out", out, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : fracop::kExitConfig;
  }

#ifdef _OPENMP
  if (threads > 0) omp_set_num_threads(threads);
#endif

  try {
    const auto cfg = fracop::RunConfig::load(config);
    const auto dir = fracop::resolve_output_dir(cfg, out);
    if (check->parsed()) return fracop::cmd_check_kernel(cfg, dir, std::cout);
    if (verify->parsed()) return fracop::cmd_verify(cfg, dir, std::cout);
    return fracop::cmd_sweep(cfg, axis, dir, std::cout, std::cerr);
  } catch (const fracop::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return fracop::kExitConfig;
  } catch (const fracop::IoError& e) {
    std::cerr << "output error: " << e.what() << '\n';
    return fracop::kExitFail;
  }
}
