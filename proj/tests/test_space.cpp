#include "doctest.h"
#include "fklab/space.hpp"

using namespace fklab;

TEST_CASE("line enumeration spirals out from the origin") {
  auto sp = StateSpace::line();
  const int want[] = {0, 1, -1, 2, -2, 3, -3};
  for (int i = 0; i < 7; ++i) {
    CHECK(sp->state(i)[0] == want[i]);
    CHECK(sp->index(State(want[i])) == i);
  }
  CHECK(sp->alpha(State(0)) == 1);
  CHECK(sp->alpha(State(-4)) == 4);
  CHECK(sp->ballSize(10) == 21);
}

TEST_CASE("lattice and product ball sizes") {
  auto z2 = StateSpace::lattice(2);
  for (int r = 0; r <= 6; ++r) CHECK(z2->ballSize(r) == 2 * r * r + 2 * r + 1);
  auto pr = StateSpace::product(StateSpace::line(), StateSpace::line());
  for (int r = 0; r <= 6; ++r) CHECK(pr->ballSize(r) == (2 * r + 1) * (2 * r + 1));
  CHECK(z2->distance(State{1, -2}, State{-1, 1}) == 5);
  CHECK(pr->distance(State{1, -2}, State{-1, 1}) == 3);
}

TEST_CASE("window is sorted by distance and indices round-trip") {
  for (auto sp : {StateSpace::line(), StateSpace::lattice(2), StateSpace::lattice(3),
                  StateSpace::product(StateSpace::line(), StateSpace::lattice(2))}) {
    const auto w = sp->window(4);
    CHECK(int64_t(w.size()) == sp->ballSize(4));
    for (size_t i = 0; i < w.size(); ++i) {
      CHECK(sp->index(w[i]) == int64_t(i));
      CHECK(sp->state(int64_t(i)) == w[i]);
      if (i) CHECK(sp->norm(w[i - 1]) <= sp->norm(w[i]));
    }
  }
}

TEST_CASE("sphere sampling stays on the sphere") {
  auto sp = StateSpace::lattice(2);
  std::mt19937_64 rng(7);
  for (int t = 0; t < 200; ++t) CHECK(sp->norm(sp->sampleSphere(5, rng)) == 5);
}
