#include <cmath>
#include <tuple>

#include "doctest.h"
#include "fixtures.hpp"
#include "fklab/error.hpp"
#include "fklab/iuc.hpp"

using namespace fklab;

TEST_CASE("root of a log a") {
  CHECK(solve_a(1.0) == doctest::Approx(1.7632228343518968).epsilon(1e-10));
  CHECK(solve_a(std::exp(1.0)) == doctest::Approx(std::exp(1.0)).epsilon(1e-10));
  const double a = solve_a(0.3);
  CHECK(a * std::log(a) == doctest::Approx(0.3).epsilon(1e-10));
}

TEST_CASE("closed-form exhaustion radii") {
  Table1Params p;  // beta 3, kappa 1/2, rho 1, Ctilde 1, epsilon 1/2
  for (auto c : {Table1Cell::PolyLog, Table1Cell::ExpLog, Table1Cell::ExpPoly}) CHECK(table1_exhaustion(c, p, 1) == 1);
  CHECK(table1_exhaustion(Table1Cell::PolyLog, p, 5) == 2);
  CHECK(table1_exhaustion(Table1Cell::PolyLog, p, 9) == 14);  // 2^{-1/6} 8^{4/3} = 14.25
  // omega constant: log a for a log a = 1
  for (int n = 2; n <= 30; ++n)
    CHECK(table1_exhaustion(Table1Cell::ExpLog, p, n) ==
          std::max<int64_t>(1, int64_t(std::floor((n - 1) * 0.5671432904097838 / 1.5))));
  CHECK(table1_exhaustion(Table1Cell::ExpPoly, p, 11) == int64_t(std::floor(10 * std::log(10.0) / 1.5)));
  CHECK_THROWS_AS(table1_exhaustion(Table1Cell::PolyPoly, p, 4), PreconditionError);
  CHECK(parse_cell("exp-log") == Table1Cell::ExpLog);
  CHECK(to_string(Table1Cell::PolyExp) == "poly-exp");
  CHECK(is_aiuc_cell(Table1Cell::ExpExp));
  CHECK_FALSE(is_aiuc_cell(Table1Cell::PolyLog));
}

TEST_CASE("trend verdicts") {
  CHECK(classify_trend({0.0, -0.1, -0.2}) == Trend::Consistent);
  CHECK(classify_trend({0.0, -1.0, -2.0}) == Trend::Refuted);
  CHECK(classify_trend({0.0, -0.2, -1.5}) == Trend::Inconclusive);
}

TEST_CASE("aIUC scan against the direct minimum") {
  auto sp = StateSpace::line();
  auto k = build_metric_kernel(sp, 3.0, 0.0);
  auto v = fx::pot(sp, ProfileKind::Poly, 1.0);
  const auto r = aiuc_test(*k, *v, 4, 80);
  REQUIRE(r.trend.windows.size() == 3);
  for (size_t w = 0; w < 3; ++w) {
    double best = INFINITY;
    for (const auto& x : sp->window(r.trend.windows[w]))
      best = std::min(best, 3 * v->logV(x) + std::log(k->P(x, State(0))) + std::log(k->P(State(0), x)));
    CHECK(r.trend.logValue[w] == doctest::Approx(best).epsilon(1e-12));
  }
  const auto cpp = classify(*k, *v, 200);
  CHECK(cpp.label == "aIUC-consistent");
  CHECK(cpp.n0 == 7);
  CHECK(classify(*k, *fx::pot(sp, ProfileKind::Log, 1.0), 200).label == "aIUC-refuted");
  CHECK(classify(*k, *fx::pot(sp, ProfileKind::Exp, 0.5), 200).label == "aIUC-consistent");
}

TEST_CASE("exhaustion plan base set") {
  fx::Ref r;
  const auto op = assemble(r.k, r.v, 60);
  const auto gs = principal_eigs(op);
  const auto au = audit(*r.k, 60);
  const auto plan = piuc_exhaustion(op, gs, au, 12);
  CHECK(plan.C == doctest::Approx(std::max(3 * au.Cstar, 1 / au.Cminus)));
  int rad = 0;
  for (int n = 1; n <= 60; ++n)
    if (gs.lambda0 * n <= plan.C) rad = n;
  CHECK(plan.dRadius == rad);
  CHECK(plan.l[1] == 1);
  for (int n = 2; n <= 12; ++n) CHECK(plan.l[n] >= plan.l[n - 1]);
}

TEST_CASE("base set filling the window is a model error") {
  auto sp = StateSpace::line();
  auto op = assemble(build_metric_kernel(sp, 3.0, 0.0), fx::pot(sp, ProfileKind::Log, 1.0), 40);
  const auto gs = principal_eigs(op);
  CHECK_THROWS_AS(piuc_exhaustion(op, gs, audit(*op.kernel, 40), 5), ModelError);
}

TEST_CASE("IHC functional against the direct minimum") {
  fx::Ref r;
  const auto op = assemble(r.k, r.v, 40);
  const auto gs = principal_eigs(op);
  const double p = 4.0;
  const int n = 2;
  double best = INFINITY;
  for (Eigen::Index i = 0; i < op.ballCount(20); ++i)
    best = std::min(best, (2 * p * n / (p - 2)) * op.logV(i) + gs.logPhi0(i) + gs.logPhiHat0(i) + std::log(op.mu(i)));
  CHECK(ihc_functional(op, gs, p, n, 20) == doctest::Approx(best).epsilon(1e-12));
}

TEST_CASE("closed-form radii sit inside the theorem's exhaustion") {
  auto sp = StateSpace::line();
  for (auto [kappa, pk, cell] : {std::tuple{0.0, ProfileKind::Log, Table1Cell::PolyLog},
                                 std::tuple{0.5, ProfileKind::Log, Table1Cell::ExpLog},
                                 std::tuple{0.5, ProfileKind::Poly, Table1Cell::ExpPoly}}) {
    auto k = build_metric_kernel(sp, 3.0, kappa);
    const auto op = assemble(k, fx::pot(sp, pk, 1.0), 200);
    const auto gs = principal_eigs(op);
    const auto plan = piuc_exhaustion(op, gs, audit(*k, 200), 20);
    const auto ap = analysis_profile(op, cell, 3.0, kappa, plan.C, gs.lambda0);
    const Table1Params tp{3.0, kappa, 1.0, ap.Ctilde, 0.5};
    for (int n = 1; n <= 20; ++n) CHECK(table1_exhaustion(cell, tp, n) <= plan.l[n]);
  }
}
