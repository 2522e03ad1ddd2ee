#include <cmath>

#include "doctest.h"
#include "fklab/potential.hpp"

using namespace fklab;

TEST_CASE("profiles") {
  auto sp = StateSpace::line();
  const auto lg = build_potential(sp, ProfileKind::Log, 2.0);
  const auto pl = build_potential(sp, ProfileKind::Poly, 1.5);
  const auto ex = build_potential(sp, ProfileKind::Exp, 0.5);
  for (int n : {1, 2, 7, 40}) {
    CHECK(lg.W(n) == doctest::Approx(std::pow(std::log(1.0 + n), 2.0)));
    CHECK(pl.W(n) == doctest::Approx(std::pow(n, 1.5)));
    CHECK(ex.W(n) == doctest::Approx(std::exp(0.5 * n)));
    CHECK(ex.logW(n) == doctest::Approx(0.5 * n));
  }
  CHECK(pl.V(State(0)) == pl.W(1));
  CHECK(pl.V(State(-5)) == pl.W(5));
  CHECK(parse_profile_kind("log") == ProfileKind::Log);
}

TEST_CASE("confinement level set") {
  auto sp = StateSpace::line();
  const auto pl = build_potential(sp, ProfileKind::Poly, 1.0);
  const auto s = confinement_level_set(pl, 4.5);
  CHECK(s.size() == 9);  // alpha <= 4
  for (const auto& x : s) CHECK(pl.V(x) < 4.5);
}
