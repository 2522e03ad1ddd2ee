#include "fklab/semigroup.hpp"

#include <algorithm>
#include <cmath>

#include "fklab/error.hpp"

namespace fklab {

Eigen::Index TruncatedOperator::ballCount(int r) const {
  return Eigen::Index(std::min<int64_t>(kernel->space().ballSize(r), int64_t(states.size())));
}

TruncatedOperator assemble(KernelPtr kernel, PotentialPtr potential, int N, double maxBytes) {
  TruncatedOperator op;
  op.kernel = kernel;
  op.potential = potential;
  op.N = N;
  const int64_t n = kernel->space().ballSize(N);
  if (double(n) * double(n) * 8.0 * 4.0 > maxBytes)
    throw ResourceError("operator on B_" + std::to_string(N) + " (" + std::to_string(n) + " states) exceeds memory budget");
  op.states = kernel->space().window(N);
  const Eigen::Index s = op.size();
  op.V.resize(s);
  op.logV.resize(s);
  op.mu.resize(s);
  for (Eigen::Index i = 0; i < s; ++i) {
    op.V(i) = potential->V(op.states[i]);
    op.logV(i) = potential->logV(op.states[i]);
    op.mu(i) = kernel->mu(op.states[i]);
  }
  op.P = kernel->matrixP(op.states, op.states);
  op.Phat = kernel->matrixPhat(op.states, op.states);
  op.U = op.V.cwiseInverse().asDiagonal() * op.P;
  op.Uhat = op.Phat * op.V.cwiseInverse().asDiagonal();
  op.killMass = (Eigen::VectorXd::Ones(s) - op.P.rowwise().sum()).cwiseMax(0.0);
  return op;
}

// ---------------------------------------------------------------- slab

double HeatKernelSlab::u(int n, Eigen::Index i, Eigen::Index j) const {
  if (n == 0) return i == j ? 1.0 : 0.0;
  return std::exp(logScale[n]) * T[n](i, j) / mu(j);
}

double HeatKernelSlab::uhat(int n, Eigen::Index i, Eigen::Index j) const {
  if (n == 0) return i == j ? 1.0 : 0.0;
  return std::exp(logScaleHat[n]) * That[n](i, j) / mu(j);
}

double HeatKernelSlab::logu(int n, Eigen::Index i, Eigen::Index j) const {
  if (n == 0) return i == j ? 0.0 : -std::numeric_limits<double>::infinity();
  const double t = T[n](i, j);
  if (t <= 0.0) return -std::numeric_limits<double>::infinity();
  return logScale[n] + std::log(t) - std::log(mu(j));
}

double HeatKernelSlab::eps(int n, Eigen::Index i, Eigen::Index j) const {
  (void)i;
  (void)j;
  return epsAnalytic[n];
}

double HeatKernelSlab::mass(int n, Eigen::Index i) const {
  if (n == 0) return 1.0;
  return std::exp(logScale[n]) * T[n].row(i).sum();
}

namespace {

void powers(const Eigen::MatrixXd& A, int nMax, std::vector<Eigen::MatrixXd>& T, std::vector<double>& logScale) {
  T.assign(nMax + 1, Eigen::MatrixXd());
  logScale.assign(nMax + 1, 0.0);
  T[0] = Eigen::MatrixXd::Identity(A.rows(), A.cols());
  for (int n = 1; n <= nMax; ++n) {
    Eigen::MatrixXd next;
    next.noalias() = T[n - 1] * A;
    const double m = next.cwiseAbs().maxCoeff();
    if (!(m > 0.0) || !std::isfinite(m)) throw NumericalError("kernel power degenerated at n = " + std::to_string(n));
    T[n] = next / m;
    logScale[n] = logScale[n - 1] + std::log(m);
  }
}

}  // namespace

HeatKernelSlab heat_kernels(const TruncatedOperator& op, const HeatOptions& opt) {
  if (opt.nMax < 1) throw PreconditionError("n_max must be at least 1");
  HeatKernelSlab s;
  s.N = op.N;
  s.M = opt.M < 0 ? op.N / 2 : opt.M;
  if (s.M > op.N) throw PreconditionError("inner window exceeds truncation");
  s.nMax = opt.nMax;
  s.inner = op.ballCount(s.M);
  s.mu = op.mu;
  const double states = double(op.size());
  const double bytes = states * states * 8.0 * (opt.nMax + 1) * (opt.dual ? 2.0 : 1.0);
  if (bytes > opt.maxBytes) throw ResourceError("heat-kernel slab exceeds memory budget");
  powers(op.U, opt.nMax, s.T, s.logScale);
  if (opt.dual) powers(op.Uhat, opt.nMax, s.That, s.logScaleHat);

  // analytic certificate: exit from B_M to outside B_N within n steps
  const auto& k = *op.kernel;
  const auto& pot = *op.potential;
  const double vminus = pot.lowerBound();
  const double supp = k.supDensity();
  s.epsAnalytic.assign(opt.nMax + 1, 0.0);
  for (int n = 1; n <= opt.nMax; ++n) {
    const int r = (op.N + 1 - s.M + n - 1) / n;
    const double escape = std::min(1.0, n * k.jumpTail(std::max(r, 1)));
    s.epsAnalytic[n] = n == 1 ? 0.0 : std::pow(vminus, -(n - 1.0)) * supp * escape / pot.W(op.N + 1);
  }

  const bool doDoubling = opt.doubling == 1 || (opt.doubling < 0 && k.space().ballSize(2 * op.N) <= 700);
  if (doDoubling) {
    const TruncatedOperator big = assemble(op.kernel, op.potential, 2 * op.N, opt.maxBytes);
    std::vector<Eigen::MatrixXd> Tb;
    std::vector<double> lb;
    powers(big.U, opt.nMax, Tb, lb);
    s.gap.assign(opt.nMax + 1, Eigen::MatrixXd::Zero(s.inner, s.inner));
    for (int n = 1; n <= opt.nMax; ++n)
      for (Eigen::Index i = 0; i < s.inner; ++i)
        for (Eigen::Index j = 0; j < s.inner; ++j) {
          const double ub = std::exp(lb[n]) * Tb[n](i, j) / op.mu(j);
          s.gap[n](i, j) = std::max(0.0, ub - s.u(n, i, j));
        }
  }

  if (std::isfinite(opt.tolerance)) {
    for (int n = 1; n <= opt.nMax; ++n) {
      double umax = 0.0, emax = 0.0;
      for (Eigen::Index i = 0; i < s.inner; ++i)
        for (Eigen::Index j = 0; j < s.inner; ++j) {
          umax = std::max(umax, s.u(n, i, j));
          emax = std::max(emax, s.eps(n, i, j));
        }
      if (emax > opt.tolerance * umax)
        throw TruncationError("truncation certificate at n = " + std::to_string(n) + " is " + std::to_string(emax / umax) +
                                  " relative; tolerance " + std::to_string(opt.tolerance),
                              2 * op.N);
    }
  }
  return s;
}

double correction_term(const TruncatedOperator& op, const std::vector<char>& inB, int n, Eigen::Index i,
                       Eigen::Index j) {
  if (inB[i] || inB[j]) throw PreconditionError("correction term needs x, y outside B");
  const auto& sp = op.kernel->space();
  const int m = std::min(sp.alpha(op.states[i]), sp.alpha(op.states[j]));
  const Eigen::Index top = op.ballCount(m);
  double acc = 0.0;
  for (Eigen::Index z = 0; z < top; ++z) {
    if (inB[z]) continue;
    const double pxz = op.P(i, z) / op.mu(z);
    const double pzy = op.P(z, j) / op.mu(j);
    acc += pxz * pzy * op.mu(z) * std::exp(-(n - 1.0) * op.logV(z));
  }
  return acc / op.V(i);
}

SandwichReport check_sandwich(const HeatKernelSlab& slab, const TruncatedOperator& op, const AssumptionAudit& audit,
                              int nFrom, int nTo, int M, int zRadius) {
  if (nFrom < 2) throw PreconditionError("sandwich needs n >= 2");
  if (nTo > slab.nMax) throw PreconditionError("slab too short for sandwich range");
  SandwichReport rep;
  rep.nFrom = nFrom;
  rep.nTo = nTo;
  rep.c1 = audit.Cminus;
  rep.c2 = 2.0 * audit.Cstar;
  rep.assumptionsMet = audit.passed();
  const auto& k = *op.kernel;
  const auto& pot = *op.potential;
  const int Z = zRadius < 0 ? 4 * op.N : zRadius;
  const auto zs = k.space().window(Z);
  const Eigen::Index inner = op.ballCount(M);
  std::vector<State> xs(op.states.begin(), op.states.begin() + inner);
  const Eigen::MatrixXd Pxz = k.matrixP(xs, zs);
  const Eigen::MatrixXd Pzy = k.matrixP(zs, xs);
  Eigen::VectorXd logVz(zs.size());
  for (size_t z = 0; z < zs.size(); ++z) {
    logVz(z) = pot.logV(zs[z]);
  }
  const double supp = k.supDensity();
  for (int n = nFrom; n <= nTo; ++n) {
    // S_n = D_V^{-1} P_xz diag(V_z^{1-n}) P_zy D_mu^{-1}
    Eigen::VectorXd w(zs.size());
    for (size_t z = 0; z < zs.size(); ++z) w(z) = std::exp(-(n - 1.0) * logVz(z));
    const Eigen::MatrixXd S = Pxz * w.asDiagonal() * Pzy;
    const double tailS = supp * k.jumpTail(Z - M + 1) * std::pow(pot.W(Z + 1), -(n - 1.0));
    const double lo = std::pow(rep.c1, n - 2.0), hi = std::pow(rep.c2, n - 2.0);
    for (Eigen::Index i = 0; i < inner; ++i)
      for (Eigen::Index j = 0; j < inner; ++j) {
        const double sLo = S(i, j) / (op.V(i) * op.mu(j));
        const double sHi = sLo + tailS / op.V(i);
        const double uLo = slab.lower(n, i, j), uHi = slab.upper(n, i, j);
        const double a = uHi / (lo * sLo);
        const double b = uLo / (hi * sHi);
        rep.minLowerSlack = std::min(rep.minLowerSlack, a);
        rep.maxUpperRatio = std::max(rep.maxUpperRatio, b);
        if (a < 1.0 - 1e-12 || b > 1.0 + 1e-12) ++rep.violations;
      }
  }
  return rep;
}

}  // namespace fklab
