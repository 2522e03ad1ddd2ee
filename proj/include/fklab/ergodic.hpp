#pragma once
#include <optional>
#include <vector>

#include "fklab/intrinsic.hpp"
#include "fklab/iuc.hpp"

namespace fklab {

struct LinearFit {
  double slope = 0.0, intercept = 0.0, r2 = 0.0;
  int from = 0, to = 0;  // inclusive index range used
  int points() const { return to - from + 1; }
};

LinearFit least_squares(const std::vector<double>& x, const std::vector<double>& y, int from, int to);

// Largest suffix of [from, to] with R^2 >= minR2 and at least minPoints points.
std::optional<LinearFit> suffix_fit(const std::vector<double>& x, const std::vector<double>& y, int from, int to,
                                    double minR2 = 0.99, int minPoints = 8);

struct ErgodicTrace {
  int nMax = 0;
  std::vector<double> eInf;        // sup_x TV(Q_n(x,.), nubar), half-l1 form
  std::vector<double> eInfDual;    // same via indicator test functions
  double minQ1 = 0.0;              // Doeblin floor over the window
  double doeblinFactor = 1.0;      // 1 - minQ1 ||nu||
  int doeblinViolations = 0;       // n with eInf(n+1) > factor * eInf(n)
  int floorFrom = 0;               // first n at the numerical floor (nMax+1 if none)
  std::optional<LinearFit> fit;    // log eInf(n) against n
  double kappaFit() const;         // exp(slope)
  bool geometric() const { return fit && fit->r2 >= 0.99 && fit->points() >= 8; }
};

ErgodicTrace uniform_ergodicity(const IntrinsicKernel& ik, const MeasureSet& ms, int nMax, double floor = 1e-11);

struct SplitRule {
  int operator()(int n) const { return std::max((n - 1) / 3, 0); }  // j = l; k = n - 1 - 2 l
};

struct ProgressiveReport {
  std::vector<double> e1, envelope, ratio;  // per n
  double gapRho = 0.0;
  double Cmin = 0.0;  // max over the tested n of e1/envelope
  bool windowExhausted = false;
};

ProgressiveReport progressive_rates(const IntrinsicKernel& ik, const MeasureSet& ms, const TruncatedOperator& op,
                                    const ExhaustionPlan& plan, double gapRho, int nFrom, int nTo);

struct QuasiReport {
  std::vector<double> qe;  // per n
  std::optional<LinearFit> fit;
};

QuasiReport quasi_ergodicity(const HeatKernelSlab& slab, const GroundState& gs, const MeasureSet& ms,
                             const TruncatedOperator& op, const ExhaustionPlan& plan, int nFrom, int nTo);

struct KappaEquivalence {
  int from = 0, to = -1;  // trusted range
  double c = 0.0;         // e1/qe in [1/c, c]
  std::vector<int> dropped;
};

KappaEquivalence kappa_equivalence(const std::vector<double>& e1, const std::vector<double>& qe, int nFrom, int nTo,
                                   double floor = 1e-11);

struct LpReport {
  double p = 2.0;
  std::vector<double> lp, l1side, linfside;  // sup over A_{n-1}: l^p, l^1 and l^inf unit families
  std::optional<LinearFit> fit, fitInf;
  int interpolationViolations = 0;  // lp > linf^{1-1/p} l1^{1/p}
};

// p = infinity allowed
LpReport lp_rates(const IntrinsicKernel& ik, const MeasureSet& ms, const TruncatedOperator& op,
                  const ExhaustionPlan* plan, double p, int nFrom, int nTo, double floor = 1e-11);

}  // namespace fklab
