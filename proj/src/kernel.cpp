#include "fklab/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "fklab/error.hpp"

namespace fklab {

// ---------------------------------------------------------------- alias

AliasTable::AliasTable(const std::vector<double>& w) {
  const size_t n = w.size();
  if (n == 0) throw ModelError("alias table needs weights");
  const double total = std::accumulate(w.begin(), w.end(), 0.0);
  prob_.assign(n, 0.0);
  alias_.assign(n, 0);
  std::vector<double> scaled(n);
  std::vector<size_t> small, large;
  for (size_t i = 0; i < n; ++i) {
    scaled[i] = w[i] * double(n) / total;
    (scaled[i] < 1.0 ? small : large).push_back(i);
  }
  while (!small.empty() && !large.empty()) {
    const size_t s = small.back(), l = large.back();
    small.pop_back();
    prob_[s] = scaled[s];
    alias_[s] = l;
    scaled[l] = scaled[l] + scaled[s] - 1.0;
    if (scaled[l] < 1.0) {
      large.pop_back();
      small.push_back(l);
    }
  }
  for (size_t i : large) prob_[i] = 1.0;
  for (size_t i : small) prob_[i] = 1.0;
}

size_t AliasTable::sample(Rng& rng) const {
  const size_t i = std::uniform_int_distribution<size_t>(0, prob_.size() - 1)(rng);
  return std::uniform_real_distribution<double>(0.0, 1.0)(rng) < prob_[i] ? i : alias_[i];
}

// ---------------------------------------------------------------- series

ProfileSeries::ProfileSeries(std::function<double(int)> shell, int growth, double beta, double kappa,
                             int minRadius)
    : shell_(std::move(shell)), beta_(beta), kappa_(kappa) {
  if (kappa_ < 0) throw ModelError("kappa must be nonnegative");
  if (kappa_ == 0.0 && beta_ <= growth + 1)
    throw ModelError("divergent normalizer: beta must exceed the space dimension when kappa = 0");
  std::vector<double> terms;
  double acc = 0.0;
  for (int r = 0;; ++r) {
    const double t = term(r);
    terms.push_back(t);
    acc += t;
    if (kappa_ > 0.0 && r > 10 && t < 1e-22 * acc) break;
    if (kappa_ == 0.0 && r >= minRadius) break;
    if (r > 20'000'000) throw ModelError("normalizer series did not settle");
  }
  R_ = int(terms.size()) - 1;
  if (kappa_ > 0.0) {
    const double q = std::exp(-kappa_);
    tailEst_ = terms.back() * q / (1.0 - q);
  } else {
    const double g = growth;
    const double lead = shell_(R_) / std::pow(R_ + 1.0, g);
    tailEst_ = lead * std::pow(R_ + 1.5, g - beta_ + 1.0) / (beta_ - g - 1.0);
  }
  suffix_.assign(terms.size() + 1, 0.0);
  suffix_[terms.size()] = tailEst_;
  for (int r = R_; r >= 0; --r) suffix_[r] = suffix_[r + 1] + terms[r];
  total_ = suffix_[0];
}

double ProfileSeries::term(int r) const {
  return shell_(r) * std::pow(1.0 + r, -beta_) * std::exp(-kappa_ * r);
}

double ProfileSeries::suffix(int r) const {
  if (r <= 0) return total_;
  if (r <= R_ + 1) return suffix_[r];
  // beyond the summed range: scale the tail estimate
  const double ratio = term(r) / std::max(term(R_ + 1), 1e-300);
  return tailEst_ * std::min(1.0, ratio * 2.0);
}

// ---------------------------------------------------------------- base

double DualKernelPair::supDensity() const {
  const State o = space_->origin();
  return std::max(P(o, o), jumpMax(0)) / mu(o);
}

Eigen::MatrixXd DualKernelPair::matrixP(const std::vector<State>& rows, const std::vector<State>& cols) const {
  Eigen::MatrixXd m(rows.size(), cols.size());
  for (size_t i = 0; i < rows.size(); ++i)
    for (size_t j = 0; j < cols.size(); ++j) m(i, j) = P(rows[i], cols[j]);
  return m;
}

Eigen::MatrixXd DualKernelPair::matrixPhat(const std::vector<State>& rows, const std::vector<State>& cols) const {
  Eigen::MatrixXd m(rows.size(), cols.size());
  for (size_t i = 0; i < rows.size(); ++i)
    for (size_t j = 0; j < cols.size(); ++j) m(i, j) = Phat(rows[i], cols[j]);
  return m;
}

TwoStepBlock DualKernelPair::twoStep(int N) const {
  const auto inner = space_->window(N);
  const auto outer = space_->window(2 * N);
  const Eigen::MatrixXd a = matrixP(inner, outer);
  const Eigen::MatrixXd b = matrixP(outer, inner);
  TwoStepBlock out;
  out.sum = a * b;
  out.tail = Eigen::MatrixXd::Constant(inner.size(), inner.size(), jumpTail(N + 1) * jumpMax(N + 1));
  return out;
}

namespace {

State shifted(const State& x, const State& d) {
  State y = x;
  for (int i = 0; i < x.dim; ++i) y.c[i] += d.c[i];
  return y;
}

State diff(const State& y, const State& x) {
  State d = y;
  for (int i = 0; i < y.dim; ++i) d.c[i] -= x.c[i];
  return d;
}

std::function<double(int)> shellOf(SpacePtr s) {
  return [s](int r) { return double(s->shellSize(r)); };
}

int shellGrowth(const StateSpace& s) { return s.dimension() - 1; }

// ---------------------------------------------------------------- metric

class MetricKernel final : public DualKernelPair {
 public:
  MetricKernel(SpacePtr s, double beta, double kappa)
      : beta_(beta), kappa_(kappa), series_(shellOf(s), shellGrowth(*s), beta, kappa) {
    space_ = std::move(s);
    mu_ = series_.total();
  }
  std::string kind() const override { return "metric"; }
  double profile(int r) const { return std::pow(1.0 + r, -beta_) * std::exp(-kappa_ * r); }
  double P(const State& x, const State& y) const override { return profile(space_->distance(x, y)) / mu_; }
  double Phat(const State& x, const State& y) const override { return P(y, x); }
  double mu(const State&) const override { return mu_; }
  bool reversible() const override { return true; }
  double jumpTail(int r) const override { return series_.suffix(r) / mu_; }
  double jumpMax(int r) const override { return profile(std::max(r, 0)) / mu_; }

  std::unique_ptr<JumpSampler> sampler(bool, double tailTol) const override {
    struct S : JumpSampler {
      AliasTable radial;
      SpacePtr space;
      bool step(State& x, Rng& rng) const override {
        const size_t r = radial.sample(rng);
        if (r + 1 == radial.size()) return false;
        x = shifted(x, space->sampleSphere(int(r), rng));
        return true;
      }
    };
    auto s = std::make_unique<S>();
    int R = 0;
    while (jumpTail(R + 1) >= tailTol) ++R;
    std::vector<double> w;
    for (int r = 0; r <= R; ++r) w.push_back(series_.term(r) / mu_);
    s->lump = jumpTail(R + 1);
    w.push_back(s->lump);
    s->radial = AliasTable(w);
    s->space = space_;
    return s;
  }

 private:
  double beta_, kappa_;
  ProfileSeries series_;
  double mu_ = 1.0;
};

// ---------------------------------------------------------------- non-reversible on Z

class NonrevKernel final : public DualKernelPair {
 public:
  NonrevKernel(SpacePtr s, NonrevVariant v, double beta, double eta, int shift)
      : variant_(v), eta_(eta), shift_(shift),
        series_([](int) { return 1.0; }, 0, beta, 0.0) {
    space_ = std::move(s);
    zeta_ = series_.total();
    norm_ = v == NonrevVariant::Weighted ? 1.0 : 2.0 - ell(0);
  }
  std::string kind() const override { return "nonreversible"; }
  double ell(int r) const { return series_.term(r) / zeta_; }
  double k(int j) const {
    if (variant_ == NonrevVariant::Shifted) return ell(std::abs(j + shift_));
    const double w = j < 0 ? eta_ : (j == 0 ? 1.0 : 1.0 - eta_);
    return w * ell(std::abs(j));
  }
  double P(const State& x, const State& y) const override { return k(y.c[0] - x.c[0]) / norm_; }
  double Phat(const State& x, const State& y) const override { return k(x.c[0] - y.c[0]) / norm_; }
  double mu(const State&) const override { return 1.0; }
  bool reversible() const override { return false; }
  double jumpTail(int r) const override {
    if (r <= 0) return 1.0;
    if (variant_ == NonrevVariant::Weighted) return series_.suffix(r) / zeta_;
    return std::min(1.0, 2.0 * series_.suffix(std::max(r - std::abs(shift_), 0)) / zeta_ / norm_);
  }
  double jumpMax(int r) const override {
    r = std::max(r, 0);
    if (variant_ == NonrevVariant::Weighted)
      return r == 0 ? ell(0) : std::max(eta_, 1.0 - eta_) * ell(r);
    return ell(std::max(r - std::abs(shift_), 0)) / norm_;
  }
  double supDensity() const override { return jumpMax(0); }

  std::unique_ptr<JumpSampler> sampler(bool dual, double tailTol) const override {
    struct S : JumpSampler {
      AliasTable table;
      int R = 0;
      bool step(State& x, Rng& rng) const override {
        const size_t i = table.sample(rng);
        if (i + 1 == table.size()) return false;
        x.c[0] += int(i) - R;
        return true;
      }
    };
    auto s = std::make_unique<S>();
    int R = 1;
    while (jumpTail(R + 1) >= tailTol) ++R;
    std::vector<double> w;
    double kept = 0.0;
    for (int j = -R; j <= R; ++j) {
      const double v = k(dual ? -j : j) / norm_;
      w.push_back(v);
      kept += v;
    }
    s->lump = std::max(0.0, 1.0 - kept);
    w.push_back(s->lump);
    s->R = R;
    s->table = AliasTable(w);
    return s;
  }

 private:
  NonrevVariant variant_;
  double eta_;
  int shift_;
  ProfileSeries series_;
  double zeta_ = 1.0, norm_ = 1.0;
};

// ---------------------------------------------------------------- nearest neighbour

class NNKernel final : public DualKernelPair {
 public:
  NNKernel(SpacePtr s, double a0) : a0_(a0) {
    space_ = std::move(s);
    d_ = space_->dimension();
  }
  std::string kind() const override { return "nn"; }
  double a0() const { return a0_; }
  double P(const State& x, const State& y) const override {
    const int r = space_->distance(x, y);
    return r == 0 ? a0_ : (r == 1 ? (1.0 - a0_) / (2.0 * d_) : 0.0);
  }
  double Phat(const State& x, const State& y) const override { return P(y, x); }
  double mu(const State&) const override { return 1.0; }
  bool reversible() const override { return true; }
  bool claimsPositive() const override { return false; }
  double jumpTail(int r) const override { return r <= 0 ? 1.0 : (r == 1 ? 1.0 - a0_ : 0.0); }
  double jumpMax(int r) const override {
    return r <= 0 ? std::max(a0_, (1.0 - a0_) / (2.0 * d_)) : (r == 1 ? (1.0 - a0_) / (2.0 * d_) : 0.0);
  }
  std::unique_ptr<JumpSampler> sampler(bool, double) const override {
    struct S : JumpSampler {
      double a0;
      int d;
      bool step(State& x, Rng& rng) const override {
        if (std::uniform_real_distribution<double>(0.0, 1.0)(rng) < a0) return true;
        const int k = std::uniform_int_distribution<int>(0, 2 * d - 1)(rng);
        x.c[k / 2] += (k % 2) ? -1 : 1;
        return true;
      }
    };
    auto s = std::make_unique<S>();
    s->a0 = a0_;
    s->d = d_;
    return s;
  }

 private:
  double a0_;
  int d_ = 1;
};

// ---------------------------------------------------------------- subordinate

class SubordinateKernel final : public DualKernelPair {
 public:
  SubordinateKernel(SpacePtr s, double a0, StepLaw law, int ncut) : ncut_(ncut) {
    space_ = std::move(s);
    d_ = space_->dimension();
    if (d_ > 2) throw ModelError("subordinate kernel supports dimension <= 2");
    if (ncut_ < 1) throw ModelError("ncut must be positive");
    std::vector<double> pmf(ncut_ + 1, 0.0);
    double kept = 0.0;
    if (law.kind == StepLaw::Kind::Power) {
      if (!(law.s > 0.0 && law.s < 1.0)) throw ModelError("step law exponent s must lie in (0,1)");
      // P(tau = n) = n^{-1-s} / zeta(1+s), n >= 1
      ProfileSeries z([](int) { return 1.0; }, 0, 1.0 + law.s, 0.0, 200'000);
      for (int n = 1; n <= ncut_; ++n) {
        pmf[n] = std::pow(double(n), -1.0 - law.s) / z.total();
        kept += pmf[n];
      }
    } else {
      if (law.point >= 1 && law.point <= ncut_) pmf[law.point] = 1.0;
      kept = law.point <= ncut_ ? 1.0 : 0.0;
    }
    kill_ = std::max(0.0, 1.0 - kept);
    w_ = 2 * ncut_ + 1;
    const size_t cells = d_ == 1 ? size_t(w_) : size_t(w_) * size_t(w_);
    jump_.assign(cells, 0.0);
    std::vector<double> cur(cells, 0.0), nxt(cells, 0.0);
    cur[cellIndex(0, 0)] = 1.0;
    const double side = (1.0 - a0) / (2.0 * d_);
    for (int n = 1; n <= ncut_; ++n) {
      std::fill(nxt.begin(), nxt.end(), 0.0);
      for (int i = -std::min(n - 1, ncut_); i <= std::min(n - 1, ncut_); ++i) {
        const int rest = n - 1 - std::abs(i);
        const int jr = d_ == 1 ? 0 : rest;
        for (int j = -jr; j <= jr; ++j) {
          const double v = cur[cellIndex(i, j)];
          if (v == 0.0) continue;
          nxt[cellIndex(i, j)] += a0 * v;
          nxt[cellIndex(i + 1, j)] += side * v;
          nxt[cellIndex(i - 1, j)] += side * v;
          if (d_ == 2) {
            nxt[cellIndex(i, j + 1)] += side * v;
            nxt[cellIndex(i, j - 1)] += side * v;
          }
        }
      }
      std::swap(cur, nxt);
      if (pmf[n] != 0.0)
        for (size_t c = 0; c < cells; ++c) jump_[c] += pmf[n] * cur[c];
    }
    // radial tails and maxima over the l1 distance
    tail_.assign(ncut_ + 2, 0.0);
    max_.assign(ncut_ + 2, 0.0);
    for (int i = -ncut_; i <= ncut_; ++i) {
      const int jr = d_ == 1 ? 0 : ncut_ - std::abs(i);
      for (int j = -jr; j <= jr; ++j) {
        const int r = std::abs(i) + std::abs(j);
        const double v = jump_[cellIndex(i, j)];
        tail_[r] += v;
        max_[r] = std::max(max_[r], v);
      }
    }
    for (int r = ncut_; r >= 0; --r) {
      tail_[r] += tail_[r + 1];
      max_[r] = std::max(max_[r], max_[r + 1]);
    }
  }
  std::string kind() const override { return "subordinate"; }
  size_t cellIndex(int i, int j) const {
    return d_ == 1 ? size_t(i + ncut_) : size_t(i + ncut_) * size_t(w_) + size_t(j + ncut_);
  }
  double jumpAt(const State& d) const {
    const int j = d_ == 2 ? d.c[1] : 0;
    if (std::abs(d.c[0]) + std::abs(j) > ncut_) return 0.0;
    return jump_[cellIndex(d.c[0], j)];
  }
  double P(const State& x, const State& y) const override { return jumpAt(diff(y, x)); }
  double Phat(const State& x, const State& y) const override { return P(y, x); }
  double mu(const State&) const override { return 1.0; }
  bool conservative() const override { return kill_ == 0.0; }
  double kill(const State&) const override { return kill_; }
  bool reversible() const override { return true; }
  double jumpTail(int r) const override { return r > ncut_ ? 0.0 : tail_[std::max(r, 0)]; }
  double jumpMax(int r) const override { return r > ncut_ ? 0.0 : max_[std::max(r, 0)]; }
  int ncut() const { return ncut_; }

  std::unique_ptr<JumpSampler> sampler(bool, double) const override {
    struct S : JumpSampler {
      AliasTable table;
      std::vector<State> moves;
      bool step(State& x, Rng& rng) const override {
        const size_t i = table.sample(rng);
        if (i == moves.size()) return false;
        x = shifted(x, moves[i]);
        return true;
      }
    };
    auto s = std::make_unique<S>();
    std::vector<double> w;
    for (int i = -ncut_; i <= ncut_; ++i) {
      const int jr = d_ == 1 ? 0 : ncut_ - std::abs(i);
      for (int j = -jr; j <= jr; ++j) {
        const double v = jump_[cellIndex(i, j)];
        if (v <= 0.0) continue;
        w.push_back(v);
        s->moves.push_back(d_ == 1 ? State(i) : State({i, j}));
      }
    }
    s->lump = kill_;
    w.push_back(std::max(kill_, 0.0));
    s->table = AliasTable(w);
    return s;
  }

 private:
  int ncut_;
  int d_ = 1;
  int w_ = 1;
  double kill_ = 0.0;
  std::vector<double> jump_, tail_, max_;
};

// ---------------------------------------------------------------- product

class ProductKernel final : public DualKernelPair {
 public:
  ProductKernel(KernelPtr a, KernelPtr b) : a_(std::move(a)), b_(std::move(b)) {
    space_ = StateSpace::product(a_->spacePtr(), b_->spacePtr());
  }
  std::string kind() const override { return "product"; }
  double P(const State& x, const State& y) const override {
    return a_->P(space_->part(x, 0), space_->part(y, 0)) * b_->P(space_->part(x, 1), space_->part(y, 1));
  }
  double Phat(const State& x, const State& y) const override {
    return a_->Phat(space_->part(x, 0), space_->part(y, 0)) * b_->Phat(space_->part(x, 1), space_->part(y, 1));
  }
  double mu(const State& x) const override { return a_->mu(space_->part(x, 0)) * b_->mu(space_->part(x, 1)); }
  bool conservative() const override { return a_->conservative() && b_->conservative(); }
  double kill(const State& x) const override {
    return 1.0 - (1.0 - a_->kill(space_->part(x, 0))) * (1.0 - b_->kill(space_->part(x, 1)));
  }
  bool reversible() const override { return a_->reversible() && b_->reversible(); }
  bool claimsPositive() const override { return a_->claimsPositive() && b_->claimsPositive(); }
  double jumpTail(int r) const override { return std::min(1.0, a_->jumpTail(r) + b_->jumpTail(r)); }
  double jumpMax(int r) const override {
    return std::max(a_->jumpMax(r) * b_->jumpMax(0), a_->jumpMax(0) * b_->jumpMax(r));
  }
  double supDensity() const override { return a_->supDensity() * b_->supDensity(); }

  std::unique_ptr<JumpSampler> sampler(bool dual, double tailTol) const override {
    struct S : JumpSampler {
      std::unique_ptr<JumpSampler> sa, sb;
      SpacePtr space;
      bool step(State& x, Rng& rng) const override {
        State x1 = space->part(x, 0), x2 = space->part(x, 1);
        if (!sa->step(x1, rng)) return false;
        if (!sb->step(x2, rng)) return false;
        x = space->join(x1, x2);
        return true;
      }
    };
    auto s = std::make_unique<S>();
    s->sa = a_->sampler(dual, tailTol / 2);
    s->sb = b_->sampler(dual, tailTol / 2);
    s->lump = s->sa->lump + s->sb->lump;
    s->space = space_;
    return s;
  }

  // Factorized two-step sums: the truncated z-box is a product of factor boxes.
  TwoStepBlock twoStep(int N) const override {
    const TwoStepBlock ta = a_->twoStep(N), tb = b_->twoStep(N);
    const auto inner = space_->window(N);
    const auto& sa = a_->space();
    const auto& sb = b_->space();
    std::vector<int64_t> ia(inner.size()), ib(inner.size());
    for (size_t i = 0; i < inner.size(); ++i) {
      ia[i] = sa.index(space_->part(inner[i], 0));
      ib[i] = sb.index(space_->part(inner[i], 1));
    }
    TwoStepBlock out;
    out.sum.resize(inner.size(), inner.size());
    out.tail.resize(inner.size(), inner.size());
    for (size_t i = 0; i < inner.size(); ++i)
      for (size_t j = 0; j < inner.size(); ++j) {
        const double s1 = ta.sum(ia[i], ia[j]), t1 = ta.tail(ia[i], ia[j]);
        const double s2 = tb.sum(ib[i], ib[j]), t2 = tb.tail(ib[i], ib[j]);
        out.sum(i, j) = s1 * s2;
        out.tail(i, j) = t1 * (s2 + t2) + s1 * t2;
      }
    return out;
  }

 private:
  KernelPtr a_, b_;
};

}  // namespace

// ---------------------------------------------------------------- builders

KernelPtr build_metric_kernel(SpacePtr space, double beta, double kappa) {
  if (!(beta > 0)) throw ModelError("beta must be positive");
  return std::make_shared<MetricKernel>(std::move(space), beta, kappa);
}

KernelPtr build_nonreversible_kernel(SpacePtr space, NonrevVariant variant, double beta, double eta, int shift) {
  if (space->kind() != SpaceKind::Line) throw ModelError("non-reversible kernels live on the line");
  if (!(beta > 1)) throw ModelError("ell must be summable: beta > 1");
  if (variant == NonrevVariant::Weighted) {
    if (!(eta > 0.0 && eta < 1.0) || eta == 0.5)
      throw ModelError("eta must lie in (0,1) and differ from 1/2");
  } else if (shift == 0) {
    throw ModelError("shifted variant needs a nonzero shift");
  }
  return std::make_shared<NonrevKernel>(std::move(space), variant, beta, eta, shift);
}

KernelPtr build_nn_kernel(SpacePtr space, double a0) {
  if (space->kind() == SpaceKind::Product) throw ModelError("nearest-neighbour kernel needs the line or a lattice");
  if (!(a0 > 0.0 && a0 < 1.0)) throw ModelError("lazy weight a0 must lie in (0,1)");
  return std::make_shared<NNKernel>(std::move(space), a0);
}

KernelPtr build_subordinate_kernel(KernelPtr nn, StepLaw law, int ncut, bool allowBoundedSupport) {
  auto base = std::dynamic_pointer_cast<const NNKernel>(nn);
  if (!base) throw ModelError("subordination needs a nearest-neighbour kernel");
  if (law.kind == StepLaw::Kind::Point && !allowBoundedSupport)
    throw ModelError("step law with bounded support breaks positivity");
  return std::make_shared<SubordinateKernel>(nn->spacePtr(), base->a0(), law, ncut);
}

KernelPtr build_product_kernel(KernelPtr k1, KernelPtr k2) {
  return std::make_shared<ProductKernel>(std::move(k1), std::move(k2));
}

// ---------------------------------------------------------------- audit

AssumptionAudit audit(const DualKernelPair& kernel, int N) {
  if (N < 2) throw PreconditionError("audit window needs N >= 2");
  AssumptionAudit a;
  a.N = N;
  const auto inner = kernel.space().window(N);
  const Eigen::MatrixXd Pm = kernel.matrixP(inner, inner);
  const TwoStepBlock ts = kernel.twoStep(N);
  a.tailCertified = kernel.analyticTails();
  a.Cstar = 1.0;
  a.CstarEmpirical = 1.0;
  for (Eigen::Index i = 0; i < Pm.rows(); ++i)
    for (Eigen::Index j = 0; j < Pm.cols(); ++j) {
      const double pv = Pm(i, j);
      if (pv <= 0.0) {
        if (a.positive && ts.sum(i, j) > 0.0) a.witness = std::make_pair(inner[i], inner[j]);
        a.positive = false;
        continue;
      }
      a.CstarEmpirical = std::max(a.CstarEmpirical, ts.sum(i, j) / pv);
      a.Cstar = std::max(a.Cstar, (ts.sum(i, j) + ts.tail(i, j)) / pv);
    }
  a.Cminus = Pm.diagonal().minCoeff();
  a.supDensity = 0.0;
  for (size_t j = 0; j < inner.size(); ++j) {
    const double m = kernel.mu(inner[j]);
    a.supDensity = std::max(a.supDensity, Pm.col(j).maxCoeff() / m);
  }
  if (!a.positive) {
    a.A1 = {"fail", a.witness ? "P vanishes at " + a.witness->first.str() + "," + a.witness->second.str() +
                                    " while P_2 > 0"
                              : "P vanishes on the window"};
  } else {
    a.A1 = {a.tailCertified ? "pass" : "empirical-only", "C_* = " + std::to_string(a.Cstar)};
  }
  a.A2 = a.Cminus > 0.0 ? Verdict{"pass", "C_- = " + std::to_string(a.Cminus)} : Verdict{"fail", "P(x,x) = 0"};
  a.A3 = std::isfinite(a.supDensity) ? Verdict{a.tailCertified ? "pass" : "empirical-only",
                                               "sup p = " + std::to_string(a.supDensity)}
                                     : Verdict{"fail", "density unbounded"};
  return a;
}

double duality_residual(const DualKernelPair& kernel, int N) {
  const auto w = kernel.space().window(N);
  double r = 0.0;
  for (const auto& x : w)
    for (const auto& y : w) r = std::max(r, std::abs(kernel.mu(x) * kernel.P(x, y) - kernel.mu(y) * kernel.Phat(y, x)));
  return r;
}

double l_convolution_constant(double beta, int N) {
  auto l = [beta](int r) { return std::pow(1.0 + std::abs(r), -beta); };
  const int Z = 4 * N;
  double c = 0.0;
  for (int x = -N; x <= N; ++x)
    for (int y = -N; y <= N; ++y) {
      double s = 0.0;
      for (int z = -Z; z <= Z; ++z) s += l(z - x) * l(y - z);
      c = std::max(c, s / l(y - x));
    }
  return c;
}

}  // namespace fklab
