#pragma once
#include <cstdint>
#include <string>
#include <vector>

#include "fklab/kernel.hpp"
#include "fklab/potential.hpp"

namespace fklab {

struct McEstimate {
  std::string target;  // "y=<state>" or "mass"
  double estimate = 0.0;
  double stdError = 0.0;
  double lumpBias = 0.0;  // truncated jump mass times the largest weight
  int64_t paths = 0;
  uint64_t seed = 0;
};

struct McOptions {
  int64_t paths = 1'000'000;
  uint64_t seed = 1;
  double tailTol = 1e-10;
  int threads = 0;         // 0: hardware concurrency
  int window = -1;         // start state must lie in B_window when >= 0
  int64_t batch = 1 << 16;
};

// E^x[prod_{k<n} 1/V(Y_k) f(Y_n)] for f = 1_{y} per target, plus f = 1 when withMass
std::vector<McEstimate> simulate_fk(const DualKernelPair& kernel, const Potential& v, const State& x, int n,
                                    const std::vector<State>& targets, bool withMass, const McOptions& opt);

// E^x[prod_{k=1..n} 1/V(Yhat_k) f(Yhat_n)] along the dual chain
std::vector<McEstimate> simulate_dual_fk(const DualKernelPair& kernel, const Potential& v, const State& x, int n,
                                         const std::vector<State>& targets, bool withMass, const McOptions& opt);

}  // namespace fklab
