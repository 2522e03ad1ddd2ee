#pragma once
#include <Eigen/Dense>
#include <limits>
#include <memory>
#include <vector>

#include "fklab/kernel.hpp"
#include "fklab/potential.hpp"

namespace fklab {

using PotentialPtr = std::shared_ptr<const Potential>;

struct TruncatedOperator {
  KernelPtr kernel;
  PotentialPtr potential;
  int N = 0;
  std::vector<State> states;  // B_N in enumeration order
  Eigen::VectorXd V, logV, mu;
  Eigen::MatrixXd P, Phat;
  Eigen::MatrixXd U;     // P(x,z)/V(x)
  Eigen::MatrixXd Uhat;  // Phat(x,z)/V(z)
  Eigen::VectorXd killMass;  // 1 - sum over the window of P(x,.)

  Eigen::Index size() const { return Eigen::Index(states.size()); }
  Eigen::Index ballCount(int r) const;  // |B_r| as a prefix length
};

TruncatedOperator assemble(KernelPtr kernel, PotentialPtr potential, int N,
                           double maxBytes = 8e9);

struct HeatOptions {
  int nMax = 10;
  int M = -1;          // inner radius, default N/2
  bool dual = true;
  int doubling = -1;   // -1 auto (small windows only), 0 off, 1 on
  double tolerance = std::numeric_limits<double>::infinity();  // relative certificate width
  double maxBytes = 8e9;
};

// u_n = exp(logScale[n]) * T[n] * diag(1/mu), T[n] the scaled U-power on the full window.
struct HeatKernelSlab {
  int N = 0, M = 0, nMax = 0;
  Eigen::Index inner = 0;  // |B_M|
  std::vector<Eigen::MatrixXd> T, That;
  std::vector<double> logScale, logScaleHat;
  Eigen::VectorXd mu;
  std::vector<double> epsAnalytic;        // per n, over B_M x B_M
  std::vector<Eigen::MatrixXd> gap;       // doubling gap on B_M x B_M, an estimate only (empty if not computed)
  bool hasDual() const { return !That.empty(); }

  double u(int n, Eigen::Index i, Eigen::Index j) const;
  double uhat(int n, Eigen::Index i, Eigen::Index j) const;
  double logu(int n, Eigen::Index i, Eigen::Index j) const;
  double eps(int n, Eigen::Index i, Eigen::Index j) const;
  double lower(int n, Eigen::Index i, Eigen::Index j) const { return u(n, i, j); }
  double upper(int n, Eigen::Index i, Eigen::Index j) const { return u(n, i, j) + eps(n, i, j); }
  // U_n 1(x) = sum over the window of u_n(x,y) mu(y)
  double mass(int n, Eigen::Index i) const;
};

HeatKernelSlab heat_kernels(const TruncatedOperator& op, const HeatOptions& opt);

// F_n(x,y), z over B^c intersected with B_{min(alpha(x),alpha(y))}; inB marks B on the window
double correction_term(const TruncatedOperator& op, const std::vector<char>& inB, int n, Eigen::Index i,
                       Eigen::Index j);

struct SandwichReport {
  int nFrom = 2, nTo = 2;
  double c1 = 0.0, c2 = 0.0;
  double minLowerSlack = std::numeric_limits<double>::infinity();  // u_upper / (c1^{n-2} S_lower) >= 1
  double maxUpperRatio = 0.0;                                       // u_lower / (c2^{n-2} S_upper) <= 1
  int violations = 0;
  bool assumptionsMet = true;
};

// S_n uses z over B_{zRadius} (default 4N) plus a tail bound.
SandwichReport check_sandwich(const HeatKernelSlab& slab, const TruncatedOperator& op, const AssumptionAudit& audit,
                              int nFrom, int nTo, int M, int zRadius = -1);

}  // namespace fklab
