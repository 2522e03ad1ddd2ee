#include "fklab/iuc.hpp"

#include <quadmath.h>

#include <cmath>
#include <limits>

#include "fklab/error.hpp"

namespace fklab {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double logaddexp(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  const double m = std::max(a, b);
  return m + std::log1p(std::exp(-std::abs(a - b)));
}

double safe_log(double x) { return x > 0.0 ? std::log(x) : kNegInf; }

std::vector<int> sub_windows(int N) { return {std::max(N / 4, 1), std::max(N / 2, 1), N}; }

}  // namespace

std::string to_string(Trend t) {
  switch (t) {
    case Trend::Consistent: return "consistent";
    case Trend::Refuted: return "refuted";
    default: return "inconclusive";
  }
}

Trend classify_trend(const std::vector<double>& lv) {
  if (lv.size() < 3) throw PreconditionError("trend needs three windows");
  const double half = std::log(0.5);
  if (lv.back() == kNegInf) return lv.front() == kNegInf ? Trend::Inconclusive : Trend::Refuted;
  if (lv.back() - lv.front() >= half) return Trend::Consistent;
  bool drop = true;
  for (size_t i = 1; i < lv.size(); ++i) drop = drop && (lv[i] - lv[i - 1] <= half);
  return drop ? Trend::Refuted : Trend::Inconclusive;
}

AiucResult aiuc_test(const DualKernelPair& kernel, const Potential& v, int n0, int N) {
  if (n0 < 2) throw PreconditionError("aIUC test needs n0 >= 2");
  const auto& sp = kernel.space();
  const State x0 = sp.origin();
  AiucResult res;
  res.n0 = n0;
  res.trend.windows = sub_windows(N);
  const auto states = sp.window(N);
  double running = std::numeric_limits<double>::infinity();
  size_t idx = 0;
  for (int w : res.trend.windows) {
    const size_t top = size_t(std::min<int64_t>(sp.ballSize(w), int64_t(states.size())));
    for (; idx < top; ++idx) {
      const State& x = states[idx];
      const double t = (n0 - 1) * v.logV(x) + safe_log(kernel.P(x, x0)) + safe_log(kernel.P(x0, x));
      running = std::min(running, t);
    }
    res.trend.logValue.push_back(running);
  }
  res.trend.verdict = classify_trend(res.trend.logValue);
  return res;
}

Classification classify(const DualKernelPair& kernel, const Potential& v, int N, int n0Max) {
  Classification c;
  bool allRefuted = true;
  for (int n0 = 2; n0 <= n0Max; ++n0) {
    c.scan.push_back(aiuc_test(kernel, v, n0, N));
    const Trend t = c.scan.back().trend.verdict;
    if (t == Trend::Consistent && c.n0 == 0) c.n0 = n0;
    allRefuted = allRefuted && t == Trend::Refuted;
  }
  c.label = c.n0 > 0 ? "aIUC-consistent" : allRefuted ? "aIUC-refuted" : "inconclusive";
  return c;
}

// ---------------------------------------------------------------- exhaustion

ExhaustionPlan piuc_exhaustion(const TruncatedOperator& op, const GroundState& gs, const AssumptionAudit& audit,
                               int nMax) {
  if (nMax < 1) throw PreconditionError("exhaustion needs n_max >= 1");
  if (!(audit.Cstar > 0.0) || !(audit.Cminus > 0.0)) throw PreconditionError("audit constants unavailable");
  ExhaustionPlan plan;
  plan.C = std::max(3.0 * audit.Cstar, 1.0 / audit.Cminus);
  plan.lambda0 = gs.lambda0;
  plan.N = op.N;
  plan.nMax = nMax;
  const auto& sp = op.kernel->space();
  const Eigen::Index s = op.size();
  const double logC = std::log(plan.C), logL = std::log(gs.lambda0);
  const Eigen::Index b1 = op.ballCount(1);
  std::vector<char> inD(s, 0);
  std::vector<double> logPP(s);
  for (Eigen::Index i = 0; i < s; ++i) {
    inD[i] = i < b1 || logL + op.logV(i) <= logC;
    if (inD[i]) {
      ++plan.dSize;
      plan.dRadius = std::max(plan.dRadius, sp.alpha(op.states[i]));
    }
    logPP[i] = safe_log(op.P(i, 0)) + safe_log(op.P(0, i));
  }
  if (plan.dSize == s && s > b1)
    throw ModelError("base set D fills the window: lambda0 V <= C everywhere, potential not confining on B_" +
                     std::to_string(op.N));
  plan.l.assign(nMax + 1, 1);
  plan.capped.assign(nMax + 1, 0);
  plan.dnSize.assign(nMax + 1, plan.dSize);
  for (int n = 2; n <= nMax; ++n) {
    int l = op.N;
    bool cap = true;
    Eigen::Index count = 0;
    for (Eigen::Index i = 0; i < s; ++i) {
      const bool in = inD[i] || (logPP[i] > kNegInf && logL + op.logV(i) >= logC - logPP[i] / (n - 1.0));
      if (in) ++count;
      if (!in && cap) {
        l = std::max(sp.alpha(op.states[i]) - 1, 1);
        cap = false;
      }
    }
    plan.l[n] = l;
    plan.capped[n] = cap;
    plan.dnSize[n] = count;
  }
  return plan;
}

// ---------------------------------------------------------------- closed-form radii

Table1Cell parse_cell(const std::string& s) {
  if (s == "poly-log") return Table1Cell::PolyLog;
  if (s == "poly-poly") return Table1Cell::PolyPoly;
  if (s == "poly-exp") return Table1Cell::PolyExp;
  if (s == "exp-log") return Table1Cell::ExpLog;
  if (s == "exp-poly") return Table1Cell::ExpPoly;
  if (s == "exp-exp") return Table1Cell::ExpExp;
  throw ConfigError("unknown profile cell '" + s + "' (expected <poly|exp>-<log|poly|exp>)");
}

std::string to_string(Table1Cell c) {
  switch (c) {
    case Table1Cell::PolyLog: return "poly-log";
    case Table1Cell::PolyPoly: return "poly-poly";
    case Table1Cell::PolyExp: return "poly-exp";
    case Table1Cell::ExpLog: return "exp-log";
    case Table1Cell::ExpPoly: return "exp-poly";
    default: return "exp-exp";
  }
}

bool is_aiuc_cell(Table1Cell c) {
  return c == Table1Cell::PolyPoly || c == Table1Cell::PolyExp || c == Table1Cell::ExpExp;
}

double solve_a(double rhs) {
  if (!(rhs > 0.0)) throw PreconditionError("a log a = rhs needs rhs > 0");
  double lo = 1.0, hi = 1.0 + rhs + std::exp(1.0);
  for (int it = 0; it < 400 && hi - lo > 1e-12 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (mid * std::log(mid) < rhs ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

namespace {

using quad = __float128;
constexpr int64_t kSat = std::numeric_limits<int64_t>::max();

// largest integer k >= 0 with log k <= L (k = 0 when L < 0)
int64_t floor_exp(quad L) {
  if (L >= logq(quad(9.0e18))) return kSat;
  auto k = int64_t(floorq(expq(L)));
  while (logq(quad(k + 1)) <= L) ++k;
  while (k > 0 && logq(quad(k)) > L) --k;
  return k;
}

int64_t floor_q(quad x) { return x >= quad(9.0e18) ? kSat : int64_t(floorq(x)); }

// a log a = rhs by bisection on a >= 1
quad solve_a_q(quad rhs) {
  quad lo = 1, hi = 1 + rhs + expq(1);
  for (int it = 0; it < 400 && hi - lo > quad(1e-32) * hi; ++it) {
    const quad mid = (lo + hi) / 2;
    (mid * logq(mid) < rhs ? lo : hi) = mid;
  }
  return (lo + hi) / 2;
}

}  // namespace

int64_t table1_exhaustion(Table1Cell cell, const Table1Params& p, int n) {
  if (is_aiuc_cell(cell)) throw PreconditionError("trivial exhaustion: " + to_string(cell) + " is an aIUC cell");
  if (n < 1) throw PreconditionError("k(n) needs n >= 1");
  if (n == 1) return 1;
  const quad rho = p.rho, beta = p.beta;
  const quad m = quad(n - 1) * rho;
  const quad lct = logq(quad(p.Ctilde)) / rho;  // log Ctilde^{1/rho}
  int64_t k = 0;
  switch (cell) {
    case Table1Cell::PolyLog:
      k = floor_exp(-logq(2) / (2 * beta) + m / (2 * beta) * (logq(m) - lct));
      break;
    case Table1Cell::ExpLog:
    case Table1Cell::ExpPoly: {
      if (!(p.epsilon > 0.0)) throw PreconditionError("exponential cells need epsilon > 0");
      const quad den = 2 * quad(p.kappa) + quad(p.epsilon);
      const quad num = cell == Table1Cell::ExpLog ? logq(solve_a_q(expq(-lct))) : logq(m) - lct;
      k = floor_q(m * num / den);
      break;
    }
    default: break;
  }
  return std::max<int64_t>(k, 1);
}

double AnalysisProfile::minimizer(int n) const {
  const double g = gamma * (n - 1);
  return std::pow(g / std::pow(Ctilde, 1.0 / gamma), g);
}

double AnalysisProfile::aRoot() const { return solve_a(std::pow(Ctilde, -1.0 / gamma)); }

AnalysisProfile analysis_profile(const TruncatedOperator& op, Table1Cell cell, double beta, double kappa, double C,
                                 double lambda0) {
  if (cell == Table1Cell::PolyExp || cell == Table1Cell::ExpExp)
    throw PreconditionError("no profile analysis for exponential potentials");
  const bool expR = cell == Table1Cell::ExpLog || cell == Table1Cell::ExpPoly;
  const double rho = op.potential->rho();
  AnalysisProfile ap;
  ap.cell = cell;
  ap.gamma = cell == Table1Cell::PolyPoly ? rho / (2.0 * beta) : rho;
  const auto& sp = op.kernel->space();
  double devMax = 0.0, c1 = std::numeric_limits<double>::infinity(), c2 = 0.0;
  for (Eigen::Index i = 0; i < op.size(); ++i) {
    const int a = sp.alpha(op.states[i]);
    const double logR = -beta * std::log(double(a)) - (expR ? kappa * a : 0.0);
    const double logr = (cell == Table1Cell::ExpLog ? 2.0 : std::log(2.0)) - 2.0 * logR;
    const double pp = op.P(i, 0) * op.P(0, i);
    if (pp > 0.0) devMax = std::max(devMax, std::abs(-std::log(pp) - logr));
    double logh;
    if (cell == Table1Cell::PolyPoly) logh = ap.gamma * logr;
    else if (cell == Table1Cell::ExpLog) logh = rho * std::log(std::log(logr));
    else logh = rho * std::log(logr);
    const double ratio = std::exp(op.logV(i) - logh);
    c1 = std::min(c1, ratio);
    c2 = std::max(c2, ratio);
  }
  ap.C0 = std::exp(devMax);
  ap.C1 = c1;
  ap.C2 = c2;
  ap.Ctilde = ap.C0 * C / (ap.C1 * lambda0);
  return ap;
}

// ---------------------------------------------------------------- comparability

double ComparabilityTables::ratioSpread() const {
  double s = 0.0;
  for (int n = 1; n <= nMax; ++n) s = std::max({s, innerMax[n], 1.0 / innerMin[n]});
  return s;
}

ComparabilityTables heat_kernel_comparability(const HeatKernelSlab& slab, const TruncatedOperator& op,
                                              const GroundState& gs, const IntrinsicKernel& ik,
                                              const AssumptionAudit& audit, const ExhaustionPlan* plan, int bRadius,
                                              bool outer) {
  if (bRadius > slab.M) throw PreconditionError("B must lie inside the inner window");
  ComparabilityTables t;
  t.nMax = slab.nMax;
  t.assumptionsMet = audit.passed();
  t.Cupper = std::max(3.0 * audit.Cstar, 1.0 / audit.Cminus);
  t.Clower = std::min(1.0 / audit.Cstar, audit.Cminus);
  const Eigen::Index inner = slab.inner, b = op.ballCount(bRadius), s = op.size();
  std::vector<char> inB(s, 0);
  for (Eigen::Index i = 0; i < b; ++i) inB[i] = 1;
  const double ll = std::log(gs.lambda0);
  const auto nan = std::numeric_limits<double>::quiet_NaN();
  t.innerMin.assign(t.nMax + 1, nan);
  t.innerMax = t.outerLo = t.outerHi = t.piucSup = t.windowSup = t.innerMin;
  for (int n = 1; n <= t.nMax; ++n) {
    const Eigen::MatrixXd& q = ik.q[n];
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (Eigen::Index i = 0; i < inner; ++i)
      for (Eigen::Index j = 0; j < inner; ++j) {
        if (!inB[i] && !inB[j]) continue;
        lo = std::min(lo, q(i, j));
        hi = std::max(hi, q(i, j));
      }
    t.innerMin[n] = lo;
    t.innerMax[n] = hi;
    if (outer && b < inner) {
      double olo = std::numeric_limits<double>::infinity(), ohi = 0.0;
      const double lcu = n * std::log(t.Cupper), lcl = n * std::log(t.Clower);
      for (Eigen::Index i = b; i < inner; ++i)
        for (Eigen::Index j = b; j < inner; ++j) {
          const double lu = slab.logu(n, i, j);
          const double lbase = n * ll + gs.logPhi0(i) + gs.logPhiHat0(j);
          const double lF = safe_log(correction_term(op, inB, n, i, j));
          olo = std::min(olo, std::exp(lu - logaddexp(lbase, lcl + lF)));
          ohi = std::max(ohi, std::exp(lu - logaddexp(lbase, lcu + lF)));
        }
      t.outerLo[n] = olo;
      t.outerHi[n] = ohi;
    }
    if (plan) {
      const Eigen::Index a = op.ballCount(plan->radius(n));
      t.piucSup[n] = std::max(q.topRows(a).maxCoeff(), q.leftCols(a).maxCoeff());
    }
    t.windowSup[n] = ik.K[n];
  }
  return t;
}

AgsdReport agsd_check(const HeatKernelSlab& slab, const TruncatedOperator& op, const GroundState& gs,
                      const IntrinsicKernel& ik, int n0) {
  if (n0 < 1 || n0 > slab.nMax) throw PreconditionError("aGSD index outside the slab");
  if (!slab.hasDual()) throw PreconditionError("aGSD check needs the dual slab");
  AgsdReport r;
  r.n0 = n0;
  const Eigen::Index s = op.size();
  const double ll = std::log(gs.lambda0);
  double maxLogPhi = gs.logPhi0.maxCoeff();
  double rr = kNegInf, rh = kNegInf, ri = kNegInf, rhi = kNegInf, low = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < s; ++i) {
    const double lm = slab.logScale[n0] + std::log(slab.T[n0].row(i).sum());
    const double lmh = slab.logScaleHat[n0] + std::log(slab.That[n0].row(i).sum());
    const double a = lm - gs.logPhi0(i), b = lmh - gs.logPhiHat0(i);
    rr = std::max(rr, a);
    rh = std::max(rh, b);
    if (i < slab.inner) {
      ri = std::max(ri, a);
      rhi = std::max(rhi, b);
    }
    low = std::min(low, lm - (n0 * ll + gs.logPhi0(i) - maxLogPhi));
  }
  r.ratio = std::exp(rr);
  r.ratioHat = std::exp(rh);
  r.ratioInner = std::exp(ri);
  r.ratioHatInner = std::exp(rhi);
  r.minLowerRatio = std::exp(low);
  double l1hat = 0.0;
  for (Eigen::Index i = 0; i < s; ++i) l1hat += gs.phiHat0(i) * op.mu(i);
  r.boundFromK = ik.K[n0] * std::exp(n0 * ll) * l1hat;
  const int m = 2 * n0 + 1;
  if (m <= slab.nMax) {
    double u1 = 0.0;
    for (Eigen::Index i = 0; i < s; ++i)
      for (Eigen::Index j = 0; j < s; ++j) u1 = std::max(u1, slab.u(1, i, j));
    r.kNext = ik.K[m];
    r.kNextBound = u1 * r.ratio * r.ratioHat * std::exp(-m * ll);
  } else {
    r.kNext = r.kNextBound = std::numeric_limits<double>::quiet_NaN();
  }
  return r;
}

// ---------------------------------------------------------------- IHC, NN

double ihc_functional(const TruncatedOperator& op, const GroundState& gs, double p, int n, int r) {
  if (!(p > 2.0)) throw PreconditionError("IHC condition needs p > 2");
  if (n < 1) throw PreconditionError("IHC condition needs n >= 1");
  const double e = 2.0 * p * n / (p - 2.0);
  const Eigen::Index top = op.ballCount(r);
  double m = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < top; ++i)
    m = std::min(m, e * op.logV(i) + gs.logPhi0(i) + gs.logPhiHat0(i) + std::log(op.mu(i)));
  return m;
}

TrendData ihc_necessary(const TruncatedOperator& op, const GroundState& gs, double p, int n) {
  TrendData t;
  t.windows = sub_windows(op.N);
  for (int w : t.windows) t.logValue.push_back(ihc_functional(op, gs, p, n, w));
  t.verdict = classify_trend(t.logValue);
  return t;
}

NnDiagnostics nn_diagnostics(KernelPtr kernel, PotentialPtr potential, const std::vector<int>& windows, int n0,
                             double p, int nIhc, bool requireNN) {
  if (requireNN && kernel->kind() != "nn") throw PreconditionError("nearest-neighbour diagnostics need an nn kernel");
  NnDiagnostics d;
  d.n0 = n0;
  for (int N : windows) {
    const TruncatedOperator op = assemble(kernel, potential, N);
    const GroundState gs = principal_eigs(op);
    HeatOptions ho;
    ho.nMax = n0;
    ho.dual = false;
    ho.doubling = 0;
    const HeatKernelSlab slab = heat_kernels(op, ho);
    NnWindow w;
    w.N = N;
    w.lambda0 = gs.lambda0;
    w.logSupDiag = kNegInf;
    const double ll = std::log(gs.lambda0);
    for (Eigen::Index i = 0; i < slab.inner; ++i)
      w.logSupDiag = std::max(w.logSupDiag, slab.logu(n0, i, i) - n0 * ll - gs.logPhi0(i) - gs.logPhiHat0(i));
    w.logIhc = ihc_functional(op, gs, p, nIhc, N / 2);
    d.windows.push_back(w);
  }
  for (size_t i = 1; i < d.windows.size(); ++i) {
    d.growthDiag.push_back(std::exp(d.windows[i].logSupDiag - d.windows[i - 1].logSupDiag));
    d.growthIhc.push_back(std::exp(d.windows[i].logIhc - d.windows[i - 1].logIhc));
  }
  return d;
}

}  // namespace fklab
