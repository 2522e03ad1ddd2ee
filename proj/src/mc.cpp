#include "fklab/mc.hpp"

#include <cmath>
#include <thread>

#include "fklab/error.hpp"

namespace fklab {

namespace {

struct Partial {
  std::vector<double> sum, sumSq;
};

std::vector<McEstimate> run(const DualKernelPair& kernel, const Potential& v, const State& x, int n,
                            const std::vector<State>& targets, bool withMass, const McOptions& opt, bool dual) {
  if (opt.paths < 1000) throw PreconditionError("Monte Carlo needs at least 1000 paths");
  if (n < 0) throw PreconditionError("negative step count");
  const auto& sp = kernel.space();
  if (x.dim != sp.dimension()) throw ConfigError("start state " + x.str() + " has the wrong dimension");
  if (opt.window >= 0 && !sp.inBall(x, opt.window))
    throw ConfigError("start state " + x.str() + " outside B_" + std::to_string(opt.window));
  const size_t nt = targets.size() + (withMass ? 1 : 0);
  if (nt == 0) throw PreconditionError("no Monte Carlo targets");

  const auto sampler = kernel.sampler(dual, opt.tailTol);
  const int64_t nb = (opt.paths + opt.batch - 1) / opt.batch;
  std::vector<Partial> parts(nb);

  auto batch = [&](int64_t b) {
    std::seed_seq seq{uint32_t(opt.seed), uint32_t(opt.seed >> 32), uint32_t(b), uint32_t(b >> 32), uint32_t(dual)};
    Rng rng(seq);
    Partial& p = parts[b];
    p.sum.assign(nt, 0.0);
    p.sumSq.assign(nt, 0.0);
    const int64_t count = std::min(opt.batch, opt.paths - b * opt.batch);
    for (int64_t k = 0; k < count; ++k) {
      State y = x;
      double w = 1.0;
      bool alive = true;
      for (int s = 0; s < n && alive; ++s) {
        if (!dual) w /= v.V(y);
        alive = sampler->step(y, rng);
        if (dual && alive) w /= v.V(y);
      }
      if (!alive) continue;
      for (size_t t = 0; t < targets.size(); ++t)
        if (y == targets[t]) {
          p.sum[t] += w;
          p.sumSq[t] += w * w;
        }
      if (withMass) {
        p.sum[nt - 1] += w;
        p.sumSq[nt - 1] += w * w;
      }
    }
  };

  int threads = opt.threads > 0 ? opt.threads : int(std::max(1u, std::thread::hardware_concurrency()));
  threads = int(std::min<int64_t>(threads, nb));
  if (threads <= 1) {
    for (int64_t b = 0; b < nb; ++b) batch(b);
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t)
      pool.emplace_back([&, t] {
        for (int64_t b = t; b < nb; b += threads) batch(b);
      });
    for (auto& th : pool) th.join();
  }

  std::vector<double> sum(nt, 0.0), sumSq(nt, 0.0);
  for (const auto& p : parts)
    for (size_t t = 0; t < nt; ++t) {
      sum[t] += p.sum[t];
      sumSq[t] += p.sumSq[t];
    }
  const double N = double(opt.paths);
  const double maxWeight = std::pow(v.lowerBound(), -double(n));
  std::vector<McEstimate> out(nt);
  for (size_t t = 0; t < nt; ++t) {
    McEstimate& e = out[t];
    e.target = t < targets.size() ? "y=" + targets[t].str() : "mass";
    e.estimate = sum[t] / N;
    const double var = std::max(0.0, (sumSq[t] - N * e.estimate * e.estimate) / (N - 1.0));
    e.stdError = std::sqrt(var / N);
    e.lumpBias = std::min(1.0, n * sampler->lump) * maxWeight;
    e.paths = opt.paths;
    e.seed = opt.seed;
  }
  return out;
}

}  // namespace

std::vector<McEstimate> simulate_fk(const DualKernelPair& kernel, const Potential& v, const State& x, int n,
                                    const std::vector<State>& targets, bool withMass, const McOptions& opt) {
  return run(kernel, v, x, n, targets, withMass, opt, false);
}

std::vector<McEstimate> simulate_dual_fk(const DualKernelPair& kernel, const Potential& v, const State& x, int n,
                                         const std::vector<State>& targets, bool withMass, const McOptions& opt) {
  return run(kernel, v, x, n, targets, withMass, opt, true);
}

}  // namespace fklab
