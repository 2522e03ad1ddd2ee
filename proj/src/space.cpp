#include "fklab/space.hpp"

#include <algorithm>
#include <cstdlib>
#include <functional>
#include <sstream>

#include "fklab/error.hpp"

namespace fklab {

State::State(std::initializer_list<int> xs) : dim(static_cast<int>(xs.size())) {
  if (dim < 1 || dim > kMaxDim) throw ConfigError("state dimension out of range");
  int i = 0;
  for (int v : xs) c[i++] = v;
}

bool State::operator==(const State& o) const {
  if (dim != o.dim) return false;
  for (int i = 0; i < dim; ++i)
    if (c[i] != o.c[i]) return false;
  return true;
}

std::string State::str() const {
  if (dim == 1) return std::to_string(c[0]);
  std::ostringstream os;
  os << '(';
  for (int i = 0; i < dim; ++i) os << (i ? ";" : "") << c[i];
  os << ')';
  return os.str();
}

int spiralKey(int c) { return c > 0 ? 2 * c - 1 : -2 * c; }

namespace {

int64_t binom(int64_t n, int64_t k) {
  if (k < 0 || k > n) return 0;
  k = std::min(k, n - k);
  int64_t r = 1;
  for (int64_t i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

// points of Z^d with l1 norm exactly r
int64_t l1Sphere(int d, int r) {
  if (r == 0) return 1;
  int64_t s = 0;
  for (int k = 1; k <= std::min(d, r); ++k) s += (int64_t(1) << k) * binom(d, k) * binom(r - 1, k - 1);
  return s;
}

void l1Enumerate(int d, int r, int pos, State& cur, std::vector<State>& out) {
  if (pos == d - 1) {
    cur.c[pos] = r;
    out.push_back(cur);
    if (r != 0) {
      cur.c[pos] = -r;
      out.push_back(cur);
    }
    return;
  }
  for (int v = -r; v <= r; ++v) {
    cur.c[pos] = v;
    l1Enumerate(d, r - std::abs(v), pos + 1, cur, out);
  }
}

}  // namespace

SpacePtr StateSpace::line() {
  auto s = std::shared_ptr<StateSpace>(new StateSpace());
  s->kind_ = SpaceKind::Line;
  s->dim_ = 1;
  return s;
}

SpacePtr StateSpace::lattice(int d) {
  if (d < 1 || d > kMaxDim) throw ConfigError("lattice dimension must be in [1," + std::to_string(kMaxDim) + "]");
  auto s = std::shared_ptr<StateSpace>(new StateSpace());
  s->kind_ = SpaceKind::Lattice;
  s->dim_ = d;
  return s;
}

SpacePtr StateSpace::product(SpacePtr a, SpacePtr b) {
  if (!a || !b) throw ConfigError("product space needs two factors");
  if (a->dimension() + b->dimension() > kMaxDim) throw ConfigError("product dimension too large");
  auto s = std::shared_ptr<StateSpace>(new StateSpace());
  s->kind_ = SpaceKind::Product;
  s->dim_ = a->dimension() + b->dimension();
  s->a_ = std::move(a);
  s->b_ = std::move(b);
  return s;
}

std::string StateSpace::name() const {
  switch (kind_) {
    case SpaceKind::Line: return "line";
    case SpaceKind::Lattice: return "lattice-" + std::to_string(dim_);
    case SpaceKind::Product: return "product(" + a_->name() + "," + b_->name() + ")";
  }
  return "?";
}

State StateSpace::origin() const {
  State s;
  s.dim = dim_;
  return s;
}

State StateSpace::part(const State& x, int i) const {
  State s;
  const int da = a_->dimension();
  if (i == 0) {
    s.dim = da;
    for (int k = 0; k < da; ++k) s.c[k] = x.c[k];
  } else {
    s.dim = b_->dimension();
    for (int k = 0; k < s.dim; ++k) s.c[k] = x.c[da + k];
  }
  return s;
}

State StateSpace::join(const State& x1, const State& x2) const {
  State s;
  s.dim = x1.dim + x2.dim;
  for (int k = 0; k < x1.dim; ++k) s.c[k] = x1.c[k];
  for (int k = 0; k < x2.dim; ++k) s.c[x1.dim + k] = x2.c[k];
  return s;
}

int StateSpace::distance(const State& x, const State& y) const {
  switch (kind_) {
    case SpaceKind::Line: return std::abs(x.c[0] - y.c[0]);
    case SpaceKind::Lattice: {
      int s = 0;
      for (int i = 0; i < dim_; ++i) s += std::abs(x.c[i] - y.c[i]);
      return s;
    }
    case SpaceKind::Product:
      return std::max(a_->distance(part(x, 0), part(y, 0)), b_->distance(part(x, 1), part(y, 1)));
  }
  return 0;
}

int StateSpace::norm(const State& x) const { return distance(origin(), x); }

int StateSpace::alpha(const State& x) const { return std::max(norm(x), 1); }

int64_t StateSpace::shellSize(int r) const {
  if (r < 0) return 0;
  switch (kind_) {
    case SpaceKind::Line: return r == 0 ? 1 : 2;
    case SpaceKind::Lattice: return l1Sphere(dim_, r);
    case SpaceKind::Product: return ballSize(r) - ballSize(r - 1);
  }
  return 0;
}

int64_t StateSpace::ballSize(int r) const {
  if (r < 0) return 0;
  switch (kind_) {
    case SpaceKind::Line: return 2 * int64_t(r) + 1;
    case SpaceKind::Lattice: {
      int64_t s = 0;
      for (int k = 0; k <= r; ++k) s += l1Sphere(dim_, k);
      return s;
    }
    case SpaceKind::Product: return a_->ballSize(r) * b_->ballSize(r);
  }
  return 0;
}

bool StateSpace::before(const State& x, const State& y) const {
  const int nx = norm(x), ny = norm(y);
  if (nx != ny) return nx < ny;
  for (int i = 0; i < dim_; ++i) {
    const int kx = spiralKey(x.c[i]), ky = spiralKey(y.c[i]);
    if (kx != ky) return kx < ky;
  }
  return false;
}

std::vector<State> StateSpace::shell(int r) const {
  std::vector<State> out;
  if (r < 0) return out;
  switch (kind_) {
    case SpaceKind::Line:
      out.emplace_back(r);
      if (r) out.emplace_back(-r);
      break;
    case SpaceKind::Lattice: {
      State cur;
      cur.dim = dim_;
      l1Enumerate(dim_, r, 0, cur, out);
      break;
    }
    case SpaceKind::Product: {
      std::vector<State> ballA, sphA = a_->shell(r), ballB, sphB = b_->shell(r);
      for (int k = 0; k <= r; ++k) {
        auto s = a_->shell(k);
        ballA.insert(ballA.end(), s.begin(), s.end());
      }
      for (int k = 0; k < r; ++k) {
        auto s = b_->shell(k);
        ballB.insert(ballB.end(), s.begin(), s.end());
      }
      for (const auto& xa : ballA)
        for (const auto& xb : sphB) out.push_back(join(xa, xb));
      for (const auto& xa : sphA)
        for (const auto& xb : ballB) out.push_back(join(xa, xb));
      break;
    }
  }
  std::sort(out.begin(), out.end(), [this](const State& x, const State& y) { return before(x, y); });
  return out;
}

std::vector<State> StateSpace::window(int N, int64_t maxStates) const {
  if (N < 0) throw PreconditionError("window radius must be nonnegative");
  const int64_t size = ballSize(N);
  if (size > maxStates)
    throw ResourceError("window B_" + std::to_string(N) + " has " + std::to_string(size) +
                        " states, budget is " + std::to_string(maxStates));
  std::vector<State> out;
  out.reserve(static_cast<size_t>(size));
  for (int r = 0; r <= N; ++r) {
    auto s = shell(r);
    out.insert(out.end(), s.begin(), s.end());
  }
  return out;
}

int64_t StateSpace::index(const State& x) const {
  const int r = norm(x);
  auto s = shell(r);
  auto it = std::lower_bound(s.begin(), s.end(), x, [this](const State& a, const State& b) { return before(a, b); });
  if (it == s.end() || *it != x) throw ConfigError("state not enumerable: " + x.str());
  return ballSize(r - 1) + (it - s.begin());
}

State StateSpace::state(int64_t i) const {
  if (i < 0) throw ConfigError("negative enumeration index");
  int r = 0;
  while (ballSize(r) <= i) ++r;
  auto s = shell(r);
  return s[static_cast<size_t>(i - ballSize(r - 1))];
}

State StateSpace::sampleSphere(int r, std::mt19937_64& rng) const {
  if (r == 0) return origin();
  switch (kind_) {
    case SpaceKind::Line:
      return State(std::bernoulli_distribution(0.5)(rng) ? r : -r);
    case SpaceKind::Lattice: {
      State s;
      s.dim = dim_;
      int rem = r;
      for (int pos = 0; pos < dim_ - 1 && rem > 0; ++pos) {
        const int left = dim_ - 1 - pos;
        double total = 0.0;
        for (int v = -rem; v <= rem; ++v) total += double(l1Sphere(left, rem - std::abs(v)));
        double u = std::uniform_real_distribution<double>(0.0, total)(rng);
        int pick = rem;
        for (int v = -rem; v <= rem; ++v) {
          u -= double(l1Sphere(left, rem - std::abs(v)));
          if (u < 0) {
            pick = v;
            break;
          }
        }
        s.c[pos] = pick;
        rem -= std::abs(pick);
      }
      if (rem > 0) s.c[dim_ - 1] = std::bernoulli_distribution(0.5)(rng) ? rem : -rem;
      return s;
    }
    case SpaceKind::Product: {
      const double w1 = double(a_->ballSize(r)) * double(b_->shellSize(r));
      const double w2 = double(a_->shellSize(r)) * double(b_->ballSize(r - 1));
      if (std::uniform_real_distribution<double>(0.0, w1 + w2)(rng) < w1)
        return join(a_->sampleBall(r, rng), b_->sampleSphere(r, rng));
      return join(a_->sampleSphere(r, rng), b_->sampleBall(r - 1, rng));
    }
  }
  return origin();
}

State StateSpace::sampleBall(int r, std::mt19937_64& rng) const {
  if (kind_ == SpaceKind::Line) return State(std::uniform_int_distribution<int>(-r, r)(rng));
  if (kind_ == SpaceKind::Product) return join(a_->sampleBall(r, rng), b_->sampleBall(r, rng));
  double u = std::uniform_real_distribution<double>(0.0, double(ballSize(r)))(rng);
  for (int k = 0; k <= r; ++k) {
    u -= double(shellSize(k));
    if (u < 0) return sampleSphere(k, rng);
  }
  return sampleSphere(r, rng);
}

}  // namespace fklab
