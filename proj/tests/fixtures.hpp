#pragma once
#include <Eigen/Dense>
#include <cmath>
#include <memory>

#include "fklab/intrinsic.hpp"
#include "fklab/kernel.hpp"
#include "fklab/potential.hpp"
#include "fklab/semigroup.hpp"
#include "fklab/spectral.hpp"

namespace fx {

using namespace fklab;

// 2 zeta(3) - 1
inline constexpr double kMuRef = 1.4041138063191885;

inline PotentialPtr pot(SpacePtr s, ProfileKind k, double rho) {
  return std::make_shared<const Potential>(build_potential(s, k, rho));
}

struct Ref {
  SpacePtr sp = StateSpace::line();
  KernelPtr k = build_metric_kernel(sp, 3.0, 0.0);
  PotentialPtr v = pot(sp, ProfileKind::Poly, 1.0);
};

// dense U = diag(1/V) P on the window, rebuilt from kernel calls
inline Eigen::MatrixXd dense_U(const DualKernelPair& k, const Potential& v, const std::vector<State>& s) {
  const Eigen::Index n = Eigen::Index(s.size());
  Eigen::MatrixXd U(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) U(i, j) = k.P(s[i], s[j]) / v.V(s[i]);
  return U;
}

}  // namespace fx
