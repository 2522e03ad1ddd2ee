#include "fklab/ergodic.hpp"

#include <cmath>
#include <limits>

#include "fklab/error.hpp"

namespace fklab {

LinearFit least_squares(const std::vector<double>& x, const std::vector<double>& y, int from, int to) {
  if (to - from < 1) throw PreconditionError("fit needs at least two points");
  LinearFit f;
  f.from = from;
  f.to = to;
  const double m = to - from + 1;
  double sx = 0, sy = 0;
  for (int i = from; i <= to; ++i) {
    sx += x[i];
    sy += y[i];
  }
  const double mx = sx / m, my = sy / m;
  double sxx = 0, sxy = 0, syy = 0;
  for (int i = from; i <= to; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  f.r2 = syy > 0.0 ? sxy * sxy / (sxx * syy) : 1.0;
  return f;
}

std::optional<LinearFit> suffix_fit(const std::vector<double>& x, const std::vector<double>& y, int from, int to,
                                    double minR2, int minPoints) {
  for (int s = from; s + minPoints - 1 <= to; ++s) {
    const LinearFit f = least_squares(x, y, s, to);
    if (f.r2 >= minR2) return f;
  }
  return std::nullopt;
}

double ErgodicTrace::kappaFit() const {
  return fit ? std::exp(fit->slope) : std::numeric_limits<double>::quiet_NaN();
}

namespace {

Eigen::Index rows_of(const TruncatedOperator& op, const ExhaustionPlan* plan, int n) {
  if (!plan) return op.size();
  return op.ballCount(plan->radius(std::max(n, 1)));
}

std::vector<double> log_of(const std::vector<double>& v) {
  std::vector<double> r(v.size());
  for (size_t i = 0; i < v.size(); ++i) r[i] = v[i] > 0.0 ? std::log(v[i]) : -std::numeric_limits<double>::infinity();
  return r;
}

// last index (inclusive) before v drops under the floor or stops decreasing
int pre_floor(const std::vector<double>& v, int from, int to, double floor) {
  int last = from - 1;
  for (int n = from; n <= to; ++n) {
    if (!(v[n] >= floor)) break;
    if (n > from && v[n] > v[n - 1] * (1.0 + 1e-9)) break;
    last = n;
  }
  return last;
}

std::vector<double> index_axis(size_t n) {
  std::vector<double> x(n);
  for (size_t i = 0; i < n; ++i) x[i] = double(i);
  return x;
}

}  // namespace

ErgodicTrace uniform_ergodicity(const IntrinsicKernel& ik, const MeasureSet& ms, int nMax, double floor) {
  if (nMax > ik.nMax) throw PreconditionError("intrinsic kernels shorter than requested n_max");
  ErgodicTrace tr;
  tr.nMax = nMax;
  tr.eInf.assign(nMax + 1, 0.0);
  tr.eInfDual.assign(nMax + 1, 0.0);
  tr.eInf[0] = tr.eInfDual[0] = 1.0;
  const double c = 1.0 / ms.normNu;
  const Eigen::Index s = ms.nu.size();
  for (int n = 1; n <= nMax; ++n) {
    const Eigen::MatrixXd& q = ik.q[n];
    double h = 0.0, d = 0.0;
    for (Eigen::Index i = 0; i < s; ++i) {
      double l1 = 0.0, pos = 0.0;
      for (Eigen::Index j = 0; j < s; ++j) {
        const double g = (q(i, j) - c) * ms.nu(j);
        l1 += std::abs(g);
        if (g > 0.0) pos += g;
      }
      h = std::max(h, 0.5 * l1);
      d = std::max(d, pos);
    }
    tr.eInf[n] = h;
    tr.eInfDual[n] = d;
  }
  tr.minQ1 = ik.q[1].minCoeff();
  tr.doeblinFactor = 1.0 - tr.minQ1 * ms.normNu;
  const int last = pre_floor(tr.eInf, 1, nMax, floor);
  tr.floorFrom = last + 1;
  for (int n = 1; n < last; ++n)
    if (tr.eInf[n + 1] > tr.doeblinFactor * tr.eInf[n] * (1.0 + 1e-9)) ++tr.doeblinViolations;
  if (last >= 2) tr.fit = suffix_fit(index_axis(nMax + 1), log_of(tr.eInf), 1, last);
  return tr;
}

ProgressiveReport progressive_rates(const IntrinsicKernel& ik, const MeasureSet& ms, const TruncatedOperator& op,
                                    const ExhaustionPlan& plan, double gapRho, int nFrom, int nTo) {
  if (nTo > ik.nMax) throw PreconditionError("intrinsic kernels shorter than requested range");
  ProgressiveReport r;
  r.gapRho = gapRho;
  r.e1.assign(nTo + 1, std::numeric_limits<double>::quiet_NaN());
  r.envelope = r.ratio = r.e1;
  const double c = 1.0 / ms.normNu;
  const auto& pot = *op.potential;
  bool allCapped = true;
  for (int n = nFrom; n <= nTo; ++n) {
    const int l = SplitRule{}(n), j = l, k = n - 1 - 2 * l;
    const Eigen::Index a = rows_of(op, &plan, l);
    allCapped = allCapped && plan.capped[std::clamp(std::max(l, 1), 1, plan.nMax)];
    const Eigen::MatrixXd& q = ik.q[n];
    r.e1[n] = (q.topRows(a).array() - c).abs().maxCoeff();
    r.envelope[n] = 1.0 / pot.W(plan.radius(std::max(j, 1)) + 1) + std::pow(gapRho, k);
    r.ratio[n] = r.e1[n] / r.envelope[n];
    r.Cmin = std::max(r.Cmin, r.ratio[n]);
  }
  r.windowExhausted = allCapped;
  return r;
}

QuasiReport quasi_ergodicity(const HeatKernelSlab& slab, const GroundState& gs, const MeasureSet& ms,
                             const TruncatedOperator& op, const ExhaustionPlan& plan, int nFrom, int nTo) {
  if (nTo > slab.nMax) throw PreconditionError("slab shorter than requested range");
  QuasiReport r;
  r.qe.assign(nTo + 1, std::numeric_limits<double>::quiet_NaN());
  const Eigen::Index s = op.size();
  const double l1 = std::log(ms.l1PhiHat0);
  Eigen::VectorXd colShift(s);
  for (Eigen::Index j = 0; j < s; ++j) colShift(j) = l1 - std::log(op.mu(j)) - gs.logPhiHat0(j);
  for (int n = nFrom; n <= nTo; ++n) {
    const int l = SplitRule{}(n);
    const Eigen::Index a = rows_of(op, &plan, l);
    const Eigen::MatrixXd& T = slab.T[n];
    double worst = 0.0;
    for (Eigen::Index i = 0; i < a; ++i) {
      const double lrow = std::log(T.row(i).sum());
      for (Eigen::Index j = 0; j < s; ++j) {
        const double t = T(i, j);
        const double v = t > 0.0 ? std::exp(std::log(t) - lrow + colShift(j)) : 0.0;
        worst = std::max(worst, std::abs(v - 1.0));
      }
    }
    r.qe[n] = worst;
  }
  const int last = pre_floor(r.qe, nFrom, nTo, 1e-11);
  if (last >= nFrom + 1) r.fit = suffix_fit(index_axis(nTo + 1), log_of(r.qe), nFrom, last);
  return r;
}

KappaEquivalence kappa_equivalence(const std::vector<double>& e1, const std::vector<double>& qe, int nFrom, int nTo,
                                   double floor) {
  KappaEquivalence k;
  k.from = nFrom;
  k.to = nFrom - 1;
  k.c = 1.0;
  for (int n = nFrom; n <= nTo; ++n) {
    const bool ok = e1[n] > floor && qe[n] > floor && qe[n] < 1.0;
    if (!ok) {
      k.dropped.push_back(n);
      continue;
    }
    if (k.to < k.from) k.from = n;
    k.to = n;
    const double r = e1[n] / qe[n];
    k.c = std::max({k.c, r, 1.0 / r});
  }
  return k;
}

LpReport lp_rates(const IntrinsicKernel& ik, const MeasureSet& ms, const TruncatedOperator& op,
                  const ExhaustionPlan* plan, double p, int nFrom, int nTo, double floor) {
  if (!(p > 1.0)) throw PreconditionError("l^p rates need p > 1");
  if (nTo > ik.nMax) throw PreconditionError("intrinsic kernels shorter than requested range");
  LpReport r;
  r.p = p;
  const bool inf = std::isinf(p);
  const double pd = inf ? 1.0 : p / (p - 1.0);
  const double c = 1.0 / ms.normNu;
  const auto nan = std::numeric_limits<double>::quiet_NaN();
  r.lp.assign(nTo + 1, nan);
  r.l1side = r.linfside = r.lp;
  const Eigen::Index s = op.size();
  for (int n = nFrom; n <= nTo; ++n) {
    const Eigen::Index a = rows_of(op, plan, n - 1);
    const Eigen::MatrixXd& q = ik.q[n];
    double lp = 0.0, l1 = 0.0, li = 0.0;
    for (Eigen::Index i = 0; i < a; ++i) {
      double sp = 0.0, sup = 0.0, sum = 0.0;
      for (Eigen::Index j = 0; j < s; ++j) {
        const double g = std::abs(q(i, j) - c);
        sp += std::pow(g, pd) * ms.nu(j);
        sum += g * ms.nu(j);
        sup = std::max(sup, g);
      }
      const double rowLp = std::pow(sp, 1.0 / pd);
      if (!inf && rowLp > std::pow(sum, 1.0 - 1.0 / p) * std::pow(sup, 1.0 / p) * (1.0 + 1e-9) + 1e-300)
        ++r.interpolationViolations;
      lp = std::max(lp, rowLp);
      l1 = std::max(l1, sup);
      li = std::max(li, sum);
    }
    r.lp[n] = lp;
    r.l1side[n] = l1;
    r.linfside[n] = li;
  }
  const auto x = index_axis(nTo + 1);
  const int last = pre_floor(r.lp, nFrom, nTo, floor);
  if (last >= nFrom + 1) r.fit = suffix_fit(x, log_of(r.lp), nFrom, last);
  const int lastInf = pre_floor(r.linfside, nFrom, nTo, floor);
  if (lastInf >= nFrom + 1) r.fitInf = suffix_fit(x, log_of(r.linfside), nFrom, lastInf);
  return r;
}

}  // namespace fklab
