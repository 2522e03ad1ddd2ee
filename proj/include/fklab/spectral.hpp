#pragma once
#include <Eigen/Dense>
#include <limits>

#include "fklab/semigroup.hpp"

namespace fklab {

// Eigenvectors are kept as logarithms: far states of fast-decaying ground
// states fall below the double range.
struct GroundState {
  double lambda0 = 0.0, lambdaHat0 = 0.0;
  Eigen::VectorXd logPhi0, logPhiHat0;
  double residual = 0.0, residualHat = 0.0;  // relative, in l2(mu)
  int iterations = 0, iterationsHat = 0;
  double gapRatio = std::numeric_limits<double>::quiet_NaN();

  double phi0(Eigen::Index i) const;
  double phiHat0(Eigen::Index i) const;
  Eigen::Index size() const { return logPhi0.size(); }
};

struct EigOptions {
  double tol = 1e-12;
  int maxIter = 2'000'000;
};

GroundState principal_eigs(const TruncatedOperator& op, const EigOptions& opt = {});

// log-scale similarity making every entry of S^{-1} A S at most max(A)
Eigen::VectorXd balance_scaling(const Eigen::MatrixXd& A);

struct ComparabilityReport {
  double r1 = 0.0, r2 = 0.0;   // max/min of phi0 V / p(.,x0) and phihat0 / phat(.,x0)
  double cUpper = 0.0;         // max V phi0 / P(.,x0) times max phihat0 / Phat(.,x0)
  bool kernelVanishes = false;
};

ComparabilityReport ground_state_bounds(const TruncatedOperator& op, const GroundState& gs, int M);

struct GapOptions {
  double tol = 1e-12;
  int maxIter = 200'000;
};

// |lambda_1| / lambda_0 by power iteration on the deflated operator
double spectral_gap(const TruncatedOperator& op, GroundState& gs, const GapOptions& opt = {});

}  // namespace fklab
