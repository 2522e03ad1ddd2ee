#pragma once
#include <array>
#include <cstdint>
#include <memory>
#include <random>
#include <string>
#include <vector>

namespace fklab {

constexpr int kMaxDim = 4;

struct State {
  std::array<int, kMaxDim> c{};
  int dim = 1;

  State() = default;
  explicit State(int x) : dim(1) { c[0] = x; }
  State(std::initializer_list<int> xs);

  int operator[](int i) const { return c[i]; }
  bool operator==(const State& o) const;
  bool operator!=(const State& o) const { return !(*this == o); }
  std::string str() const;
};

enum class SpaceKind { Line, Lattice, Product };

// Radial exhaustion B_n = {x : delta(x0,x) <= n} around the origin x0.
// Enumeration: increasing delta(x0,.), ties by spiral keys of coordinates
// (0, 1, -1, 2, -2, ...) compared lexicographically.
class StateSpace {
 public:
  static std::shared_ptr<const StateSpace> line();
  static std::shared_ptr<const StateSpace> lattice(int d);
  static std::shared_ptr<const StateSpace> product(std::shared_ptr<const StateSpace> a,
                                                   std::shared_ptr<const StateSpace> b);

  SpaceKind kind() const { return kind_; }
  int dimension() const { return dim_; }
  std::string name() const;
  const StateSpace& factor(int i) const { return i == 0 ? *a_ : *b_; }
  std::shared_ptr<const StateSpace> factorPtr(int i) const { return i == 0 ? a_ : b_; }

  State origin() const;
  int distance(const State& x, const State& y) const;
  int norm(const State& x) const;  // delta(x0, x)
  int alpha(const State& x) const;  // first appearance: min{n >= 1 : x in B_n}
  bool inBall(const State& x, int n) const { return norm(x) <= n; }

  int64_t shellSize(int r) const;
  int64_t ballSize(int r) const;
  std::vector<State> shell(int r) const;  // sorted
  std::vector<State> window(int N, int64_t maxStates = 4'000'000) const;

  int64_t index(const State& x) const;
  State state(int64_t i) const;

  bool before(const State& x, const State& y) const;  // enumeration order

  // split a product state into its factor states
  State part(const State& x, int i) const;
  State join(const State& x1, const State& x2) const;

  // uniform sample on the sphere {delta(x0,.) = r}
  State sampleSphere(int r, std::mt19937_64& rng) const;
  State sampleBall(int r, std::mt19937_64& rng) const;

 private:
  StateSpace() = default;
  SpaceKind kind_ = SpaceKind::Line;
  int dim_ = 1;
  std::shared_ptr<const StateSpace> a_, b_;
};

using SpacePtr = std::shared_ptr<const StateSpace>;

int spiralKey(int c);

}  // namespace fklab
