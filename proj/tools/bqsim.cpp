// bqsim: simulation runs, resumption and verification suites.
//
//   bqsim run -c run.cfg [--set key=value ...]
//   bqsim resume CHECKPOINT [-c run.cfg] [--set key=value ...]
//   bqsim kernel-verify --beta 0.5 --n 256 [--rule exclude|polar] [--refine] [--out DIR]
//   bqsim inequality-suite -c run.cfg [--set key=value ...]
//   bqsim besov CHECKPOINT --s 0.5 [--p 2] [--r 2] [--kind sharp|smooth] [--out DIR]
//
// BQSIM_OUT_DIR overrides the output directory of every subcommand.

#include "bq/commands.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>
#include <map>

namespace {

bq::RunConfig config_from(const std::string& path, const std::vector<std::string>& overrides) {
  bq::RunConfig cfg = path.empty() ? bq::RunConfig{} : bq::load_config(path);
  bq::apply_overrides(cfg, overrides);
  return cfg;
}

std::string out_dir_or_env(const std::string& dir) {
  if (const char* env = std::getenv("BQSIM_OUT_DIR"); env && *env) return env;
  return dir;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spectral simulator and verification suites for the fractional Boussinesq system"};
  app.require_subcommand(1);

  std::string config_path;
  std::vector<std::string> overrides;
  auto* run = app.add_subcommand("run", "Run a simulation from a config file");
  run->add_option("-c,--config", config_path, "Config file (key = value lines)")->required();
  run->add_option("--set", overrides, "Override a config key: key=value");

  std::string checkpoint;
  auto* resume = app.add_subcommand("resume", "Continue a run from a checkpoint");
  resume->add_option("checkpoint", checkpoint, "Checkpoint file")->required();
  resume->add_option("-c,--config", config_path, "Config file; grid and flow keys must match the header");
  resume->add_option("--set", overrides, "Override a config key: key=value");

  double kbeta = 0.5;
  int kn = 256;
  std::string krule = "exclude";
  bool krefine = false;
  std::string out_dir = "out";
  auto* kernel = app.add_subcommand("kernel-verify", "Calibrate and verify the kernel quadrature");
  kernel->add_option("--beta", kbeta, "Kernel exponent in (0, 1)");
  kernel->add_option("--n", kn, "Grid resolution");
  kernel->add_option("--rule", krule, "Self-cell rule")->check(CLI::IsMember({"exclude", "polar"}));
  kernel->add_flag("--refine", krefine, "Also measure the error reduction n -> 2n");
  kernel->add_option("--out", out_dir, "Output directory");

  auto* ineq = app.add_subcommand("inequality-suite", "Check the pointwise inequalities and a priori bounds");
  ineq->add_option("-c,--config", config_path, "Config file")->required();
  ineq->add_option("--set", overrides, "Override a config key: key=value");

  double bs = 0.0, bp = 2.0, br = 2.0;
  std::string bkind = "sharp";
  auto* besov = app.add_subcommand("besov", "Besov band table of a checkpoint");
  besov->add_option("checkpoint", checkpoint, "Checkpoint file")->required();
  besov->add_option("--s", bs, "Smoothness index");
  besov->add_option("--p", bp, "Integrability index (inf allowed)");
  besov->add_option("--r", br, "Summability index (inf allowed)");
  besov->add_option("--kind", bkind, "Block kind")->check(CLI::IsMember({"sharp", "smooth"}));
  besov->add_option("--out", out_dir, "Output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : bq::exit_config;
  }

  try {
    if (*run) return bq::cmd_run(config_from(config_path, overrides), std::cout, std::cerr);
    if (*resume)
      return bq::cmd_resume(checkpoint, config_path.empty() ? std::nullopt : std::optional(config_path), overrides,
                            std::cout, std::cerr);
    if (*kernel)
      return bq::cmd_kernel_verify(kbeta, kn, krule == "polar" ? bq::SelfCellRule::polar : bq::SelfCellRule::exclude,
                                   krefine, out_dir_or_env(out_dir), std::cout, std::cerr);
    if (*ineq) return bq::cmd_inequality_suite(config_from(config_path, overrides), std::cout, std::cerr);
    if (*besov)
      return bq::cmd_besov(checkpoint, bs, bp, br, bkind == "smooth" ? bq::BlockKind::smooth : bq::BlockKind::sharp,
                           out_dir_or_env(out_dir), std::cout, std::cerr);
  } catch (const bq::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return bq::exit_config;
  }
  return bq::exit_config;
}
