#include "fklab/intrinsic.hpp"

#include <cmath>

#include "fklab/error.hpp"

namespace fklab {

MeasureSet measures(const TruncatedOperator& op, const GroundState& gs) {
  MeasureSet ms;
  const Eigen::Index n = op.size();
  ms.nu.resize(n);
  Eigen::VectorXd a(n), b(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    ms.nu(i) = std::exp(gs.logPhi0(i) + gs.logPhiHat0(i)) * op.mu(i);
    a(i) = gs.phi0(i) * op.mu(i);
    b(i) = gs.phiHat0(i) * op.mu(i);
  }
  ms.normNu = ms.nu.sum();
  ms.nuBar = ms.nu / ms.normNu;
  ms.l1Phi0 = a.sum();
  ms.l1PhiHat0 = b.sum();
  ms.m = b / ms.l1PhiHat0;
  ms.mHat = a / ms.l1Phi0;
  // tails beyond B_N: phi0 ~ c p(.,x0)/V and phihat0 ~ c phat(.,x0), c fitted on the outer shell
  const auto& k = *op.kernel;
  const int N = op.N;
  const Eigen::Index shellStart = op.ballCount(N - 1);
  double c1 = 0.0, c2 = 0.0;
  for (Eigen::Index i = shellStart; i < n; ++i) {
    const double Px = op.P(i, 0), Ph = op.Phat(i, 0);
    if (Px > 0) c1 = std::max(c1, gs.phi0(i) * op.V(i) / Px);
    if (Ph > 0) c2 = std::max(c2, gs.phiHat0(i) / Ph);
  }
  const double tail = k.jumpTail(N + 1);
  ms.l1TailPhi0 = c1 * tail / op.potential->W(N + 1) * op.mu(0);
  ms.l1TailPhiHat0 = c2 * tail * op.mu(0);
  return ms;
}

IntrinsicKernel intrinsic_kernels(const HeatKernelSlab& slab, const GroundState& gs) {
  IntrinsicKernel ik;
  ik.nMax = slab.nMax;
  ik.inner = slab.inner;
  const Eigen::Index s = slab.T[1].rows();
  if (gs.size() != s) throw PreconditionError("slab and ground state come from different windows");
  const double ll = std::log(gs.lambda0);
  const Eigen::VectorXd lmu = slab.mu.array().log().matrix();
  ik.q.assign(slab.nMax + 1, Eigen::MatrixXd());
  ik.K.assign(slab.nMax + 1, 0.0);
  ik.KInner.assign(slab.nMax + 1, 0.0);
  if (slab.hasDual()) ik.qhat.assign(slab.nMax + 1, Eigen::MatrixXd());
  for (int n = 1; n <= slab.nMax; ++n) {
    Eigen::MatrixXd& q = ik.q[n];
    q.resize(s, s);
    for (Eigen::Index j = 0; j < s; ++j)
      for (Eigen::Index i = 0; i < s; ++i) {
        const double t = slab.T[n](i, j);
        if (t <= 0.0) {
          q(i, j) = 0.0;
          continue;
        }
        const double lq = slab.logScale[n] + std::log(t) - lmu(j) - n * ll - gs.logPhi0(i) - gs.logPhiHat0(j);
        if (lq > 700.0) throw NumericalError("intrinsic kernel overflow at n = " + std::to_string(n));
        q(i, j) = std::exp(lq);
      }
    ik.K[n] = q.maxCoeff();
    ik.KInner[n] = q.topLeftCorner(slab.inner, slab.inner).maxCoeff();
    if (slab.hasDual()) {
      Eigen::MatrixXd& qh = ik.qhat[n];
      qh.resize(s, s);
      for (Eigen::Index j = 0; j < s; ++j)
        for (Eigen::Index i = 0; i < s; ++i) {
          const double t = slab.That[n](i, j);
          qh(i, j) = t <= 0.0 ? 0.0
                              : std::exp(slab.logScaleHat[n] + std::log(t) - lmu(j) - n * ll - gs.logPhiHat0(i) -
                                         gs.logPhi0(j));
        }
    }
  }
  return ik;
}

}  // namespace fklab
