#include <iostream>

#include "CLI11.hpp"
#include "fklab/pipeline.hpp"

int main(int argc, char** argv) {
  CLI::App app{"fk-chain-lab: Feynman-Kac heat kernels, ground states and intrinsic ultracontractivity on truncated chains"};
  fklab::RunOptions opt;
  app.add_option("subcommand", opt.subcommand, "audit | spectral | heatkernel | iuc | ergodic | mc-validate | table1 | full")
      ->required()
      ->check(CLI::IsMember({"audit", "spectral", "heatkernel", "iuc", "ergodic", "mc-validate", "table1", "full"}));
  app.add_option("--config", opt.configPath, "configuration file (key = value or JSON)");
  app.add_option("--out", opt.outDir, "output directory");
  app.add_option("--trunc", opt.trunc, "truncation radius N")->check(CLI::PositiveNumber);
  app.add_option("--nmax", opt.nmax, "largest heat-kernel step")->check(CLI::PositiveNumber);
  uint64_t seed = 0;
  auto* seedOpt = app.add_option("--seed", seed, "Monte Carlo seed");
  app.add_flag("--allow-unaudited", opt.allowUnaudited, "continue after a failed assumption audit");
  app.add_option("--cell", opt.cell, "kernel/potential profile cell, e.g. poly-log, exp-log, exp-poly");
  app.add_option("--n", opt.n, "largest n for table1")->check(CLI::PositiveNumber);
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : fklab::kMissingKeys;
  }
  if (*seedOpt) opt.seed = seed;
  return fklab::run(opt, std::cout, std::cerr);
}
