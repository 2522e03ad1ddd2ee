#pragma once
#include <Eigen/Dense>
#include <functional>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "fklab/space.hpp"

namespace fklab {

using Rng = std::mt19937_64;

// Walker alias table.
class AliasTable {
 public:
  AliasTable() = default;
  explicit AliasTable(const std::vector<double>& weights);
  size_t sample(Rng& rng) const;
  size_t size() const { return prob_.size(); }

 private:
  std::vector<double> prob_;
  std::vector<size_t> alias_;
};

class JumpSampler {
 public:
  virtual ~JumpSampler() = default;
  // Moves x one step; returns false when the step is killed.
  virtual bool step(State& x, Rng& rng) const = 0;
  double lump = 0.0;  // mass per step routed to the kill event by truncation
};

struct TwoStepBlock {
  Eigen::MatrixXd sum;   // sum over z in B_{2N} of P(x,z)P(z,y), x,y in B_N
  Eigen::MatrixXd tail;  // bound on the remaining sum over z outside B_{2N}
};

// Sum_{r>=0} shell(r) J(r) K(r) with J(r)=(1+r)^-beta, K(r)=exp(-kappa r),
// partial sums plus an integral tail estimate; suffix sums kept for tails.
class ProfileSeries {
 public:
  ProfileSeries(std::function<double(int)> shell, int growth, double beta, double kappa,
                int minRadius = 10'000);
  double total() const { return total_; }
  double suffix(int r) const;  // sum over s >= r
  double term(int r) const;
  double tailEstimate() const { return tailEst_; }
  int radius() const { return R_; }

 private:
  std::function<double(int)> shell_;
  double beta_, kappa_;
  int R_ = 0;
  double total_ = 0.0, tailEst_ = 0.0;
  std::vector<double> suffix_;
};

class DualKernelPair {
 public:
  virtual ~DualKernelPair() = default;
  virtual std::string kind() const = 0;
  const StateSpace& space() const { return *space_; }
  SpacePtr spacePtr() const { return space_; }

  virtual double P(const State& x, const State& y) const = 0;
  virtual double Phat(const State& x, const State& y) const = 0;
  virtual double mu(const State& x) const = 0;
  double p(const State& x, const State& y) const { return P(x, y) / mu(y); }
  double phat(const State& x, const State& y) const { return Phat(x, y) / mu(y); }

  virtual bool conservative() const { return true; }
  virtual double kill(const State&) const { return 0.0; }
  virtual bool reversible() const = 0;
  virtual bool claimsPositive() const { return true; }
  virtual bool analyticTails() const { return true; }

  // sup_x P(x, {y : delta(x,y) >= r}), same bound for the dual
  virtual double jumpTail(int r) const = 0;
  // sup over delta(x,y) >= r of max(P(x,y), Phat(x,y))
  virtual double jumpMax(int r) const = 0;
  virtual double supDensity() const;

  virtual std::unique_ptr<JumpSampler> sampler(bool dual, double tailTol) const = 0;
  virtual TwoStepBlock twoStep(int N) const;

  Eigen::MatrixXd matrixP(const std::vector<State>& rows, const std::vector<State>& cols) const;
  Eigen::MatrixXd matrixPhat(const std::vector<State>& rows, const std::vector<State>& cols) const;

 protected:
  SpacePtr space_;
};

using KernelPtr = std::shared_ptr<const DualKernelPair>;

struct StepLaw {
  enum class Kind { Power, Point } kind = Kind::Power;
  double s = 0.5;  // P(tau=n) ~ n^{-1-s}
  int point = 1;
  static StepLaw power(double s) { return {Kind::Power, s, 1}; }
  static StepLaw pointMass(int n) { return {Kind::Point, 0.0, n}; }
};

KernelPtr build_metric_kernel(SpacePtr space, double beta, double kappa);
enum class NonrevVariant { Weighted, Shifted };
KernelPtr build_nonreversible_kernel(SpacePtr space, NonrevVariant variant, double beta, double eta, int shift = 0);
KernelPtr build_nn_kernel(SpacePtr space, double a0);
KernelPtr build_subordinate_kernel(KernelPtr nn, StepLaw law, int ncut, bool allowBoundedSupport = false);
KernelPtr build_product_kernel(KernelPtr k1, KernelPtr k2);

struct Verdict {
  std::string status;  // pass, fail, empirical-only
  std::string detail;
};

struct AssumptionAudit {
  int N = 0;
  double Cstar = 0.0;           // with analytic tail bound
  double CstarEmpirical = 0.0;  // window sum only
  double Cminus = 0.0;
  double supDensity = 0.0;
  bool positive = true;
  bool tailCertified = false;
  Verdict A1, A2, A3;
  std::optional<std::pair<State, State>> witness;
  bool passed() const { return A1.status != "fail" && A2.status != "fail" && A3.status != "fail"; }
};

AssumptionAudit audit(const DualKernelPair& kernel, int N);

// max over B_N^2 of |mu(x)P(x,y) - mu(y)Phat(y,x)|
double duality_residual(const DualKernelPair& kernel, int N);

// sup over the window of sum_z l(|z-x|) l(|y-z|) / l(|y-x|) for l(r) = (1+r)^-beta
double l_convolution_constant(double beta, int N);

}  // namespace fklab
