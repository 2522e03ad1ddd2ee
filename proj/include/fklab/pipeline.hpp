#pragma once
#include <iosfwd>
#include <optional>
#include <string>

#include "fklab/config.hpp"
#include "fklab/iuc.hpp"
#include "fklab/kernel.hpp"
#include "fklab/potential.hpp"

namespace fklab {

struct Model {
  SpacePtr space;
  KernelPtr kernel;
  PotentialPtr potential;
  double beta = 0.0, kappa = 0.0;  // metric kernels only
  std::optional<Table1Cell> cell;
};

KernelPtr build_kernel(const Config& cfg, const std::string& prefix, SpacePtr space);
SpacePtr build_space(const Config& cfg, const std::string& prefix);
Model build_model(const Config& cfg);

// "3", "-2", "(1;2)" or "1;2"
State parse_state(const std::string& s, int dim);

enum ExitCode { kOk = 0, kMissingKeys = 1, kAuditFailed = 2, kTruncation = 3, kError = 4 };

struct RunOptions {
  std::string subcommand;
  std::string configPath;
  std::string outDir;
  int trunc = -1, nmax = -1, n = -1;
  std::optional<uint64_t> seed;
  bool allowUnaudited = false;
  std::string cell;
};

int run(const RunOptions& opt, std::ostream& out, std::ostream& err);

}  // namespace fklab
