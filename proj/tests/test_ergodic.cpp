#include <cmath>

#include "doctest.h"
#include "fixtures.hpp"
#include "fklab/ergodic.hpp"

using namespace fklab;

TEST_CASE("least squares recovers a line") {
  std::vector<double> x, y;
  for (int i = 0; i < 10; ++i) {
    x.push_back(i);
    y.push_back(2.5 - 0.3 * i);
  }
  const auto f = least_squares(x, y, 0, 9);
  CHECK(f.slope == doctest::Approx(-0.3));
  CHECK(f.intercept == doctest::Approx(2.5));
  CHECK(f.r2 == doctest::Approx(1.0));
  y[0] = 100;
  const auto s = suffix_fit(x, y, 0, 9, 0.99, 8);
  REQUIRE(s);
  CHECK(s->from == 1);
  CHECK_FALSE(suffix_fit(x, y, 0, 9, 0.99, 10));
}

TEST_CASE("kappa equivalence drops untrusted points") {
  std::vector<double> e1 = {0, 0.5, 0.2, 0.1, 1e-13}, qe = {0, 2.0, 0.1, 0.2, 1e-13};
  const auto k = kappa_equivalence(e1, qe, 1, 4);
  CHECK(k.from == 2);
  CHECK(k.to == 3);
  CHECK(k.c == doctest::Approx(2.0));
  CHECK(k.dropped == std::vector<int>{1, 4});
}

TEST_CASE("uniform ergodicity on a small dense model") {
  // B_2 on the line: five states
  fx::Ref r;
  const auto op = assemble(r.k, r.v, 2);
  auto gs = principal_eigs(op);
  spectral_gap(op, gs);
  HeatOptions ho;
  ho.nMax = 30;
  const auto slab = heat_kernels(op, ho);
  const auto ms = measures(op, gs);
  const auto ik = intrinsic_kernels(slab, gs);
  const auto tr = uniform_ergodicity(ik, ms, 30);
  // oracle: Doob transform Q = diag(1/phi0) U diag(phi0) / lambda, stationary law nu-bar
  const Eigen::MatrixXd U = fx::dense_U(*r.k, *r.v, op.states);
  Eigen::VectorXd phi(5);
  for (int i = 0; i < 5; ++i) phi(i) = gs.phi0(i);
  Eigen::MatrixXd Q(5, 5);
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 5; ++j) Q(i, j) = U(i, j) * phi(j) / (phi(i) * gs.lambda0);
  Eigen::MatrixXd Qn = Eigen::MatrixXd::Identity(5, 5);
  for (int n = 1; n <= 12; ++n) {
    Qn = Qn * Q;
    double tv = 0.0;
    for (int i = 0; i < 5; ++i) tv = std::max(tv, 0.5 * (Qn.row(i).transpose() - ms.nuBar).cwiseAbs().sum());
    CHECK(tr.eInf[n] == doctest::Approx(tv).epsilon(1e-8));
    CHECK(tr.eInfDual[n] == doctest::Approx(tv).epsilon(1e-8));
  }
  CHECK(tr.doeblinViolations == 0);
  CHECK(tr.geometric());
  CHECK(tr.kappaFit() == doctest::Approx(gs.gapRatio).epsilon(0.05));
}
