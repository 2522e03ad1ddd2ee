#pragma once
#include <Eigen/Dense>
#include <vector>

#include "fklab/semigroup.hpp"
#include "fklab/spectral.hpp"

namespace fklab {

struct MeasureSet {
  Eigen::VectorXd nu, nuBar, m, mHat;  // on the window
  double normNu = 0.0;
  double l1Phi0 = 0.0, l1PhiHat0 = 0.0;  // ||phi0||_{l1(mu)}, ||phihat0||_{l1(mu)} on the window
  double l1TailPhi0 = 0.0, l1TailPhiHat0 = 0.0;  // heuristic tail beyond the window
};

MeasureSet measures(const TruncatedOperator& op, const GroundState& gs);

struct IntrinsicKernel {
  int nMax = 0;
  Eigen::Index inner = 0;
  std::vector<Eigen::MatrixXd> q, qhat;  // q[n](i,j), n in [1, nMax]; qhat empty without a dual slab
  std::vector<double> K, KInner;        // sup over window / over B_M x B_M
};

IntrinsicKernel intrinsic_kernels(const HeatKernelSlab& slab, const GroundState& gs);

}  // namespace fklab
