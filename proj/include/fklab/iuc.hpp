#pragma once
#include <algorithm>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fklab/intrinsic.hpp"
#include "fklab/semigroup.hpp"
#include "fklab/spectral.hpp"

namespace fklab {

// Trend verdicts over sub-windows N/4, N/2, N (artifact policy):
// consistent if f(N)/f(N/4) >= 0.5, refuted if f drops by >= 2x per doubling.
enum class Trend { Consistent, Refuted, Inconclusive };
std::string to_string(Trend t);

struct TrendData {
  std::vector<int> windows;
  std::vector<double> logValue;
  Trend verdict = Trend::Inconclusive;
};

Trend classify_trend(const std::vector<double>& logValue);

// t(N) = min over B_N of V^{n0-1} P(x,x0) P(x0,x), x0 the origin
struct AiucResult {
  int n0 = 2;
  TrendData trend;
};
AiucResult aiuc_test(const DualKernelPair& kernel, const Potential& v, int n0, int N);

struct Classification {
  std::string label;  // aIUC-consistent, aIUC-refuted, inconclusive
  int n0 = 0;         // least consistent n0, 0 if none
  std::vector<AiucResult> scan;
};
Classification classify(const DualKernelPair& kernel, const Potential& v, int N, int n0Max = 10);

struct ExhaustionPlan {
  double C = 0.0, lambda0 = 0.0;
  int N = 0;
  int nMax = 0;
  Eigen::Index dSize = 0;     // |D| on the window
  int dRadius = 0;            // max alpha over D
  std::vector<int> l;         // l[n], n in [1, nMax]; l[1] = 1
  std::vector<char> capped;   // B_N inside D_n: l is the window radius
  std::vector<Eigen::Index> dnSize;
  int radius(int n) const { return l[std::clamp(n, 1, nMax)]; }
};

ExhaustionPlan piuc_exhaustion(const TruncatedOperator& op, const GroundState& gs, const AssumptionAudit& audit,
                               int nMax);

enum class RKind { Poly, Exp };
enum class Table1Cell { PolyLog, PolyPoly, PolyExp, ExpLog, ExpPoly, ExpExp };
Table1Cell parse_cell(const std::string& s);
std::string to_string(Table1Cell c);
bool is_aiuc_cell(Table1Cell c);

struct Table1Params {
  double beta = 3.0, kappa = 0.5, rho = 1.0, Ctilde = 1.0, epsilon = 0.5;
};

// k(n) as printed; throws PreconditionError("trivial exhaustion") on aIUC cells
int64_t table1_exhaustion(Table1Cell cell, const Table1Params& p, int n);

double solve_a(double rhs);

struct AnalysisProfile {
  Table1Cell cell = Table1Cell::PolyLog;
  double gamma = 0.0;
  double C0 = 0.0, C1 = 0.0, C2 = 0.0, Ctilde = 0.0;
  double minimizer(int n) const;  // u*_n
  double aRoot() const;           // a log a = Ctilde^{-1/gamma}
};

// r(x) = 2 R(alpha)^{-2} (e^2 R^{-2} for the iterated-log profile); C = max(3C_*, 1/C_-)
AnalysisProfile analysis_profile(const TruncatedOperator& op, Table1Cell cell, double beta, double kappa, double C,
                                 double lambda0);

struct ComparabilityTables {
  int nMax = 0;
  double Cupper = 0.0, Clower = 0.0;
  std::vector<double> innerMin, innerMax;   // (i) over x in B or y in B
  std::vector<double> outerLo, outerHi;     // (ii) lower/upper ratios over B^c x B^c
  std::vector<double> piucSup, windowSup;   // (iii) over A_n rows/cols, full window
  double ratioSpread() const;               // max over n of max(hi, 1/lo) for (i)
  bool assumptionsMet = true;
};

ComparabilityTables heat_kernel_comparability(const HeatKernelSlab& slab, const TruncatedOperator& op,
                                              const GroundState& gs, const IntrinsicKernel& ik,
                                              const AssumptionAudit& audit, const ExhaustionPlan* plan, int bRadius,
                                              bool outer = true);

struct AgsdReport {
  int n0 = 1;
  double ratio = 0.0, ratioHat = 0.0;            // sup over the window
  double ratioInner = 0.0, ratioHatInner = 0.0;  // sup over B_M
  double minLowerRatio = 0.0;                    // inf U1 / (lambda^n0 phi0 / max phi0)
  double boundFromK = 0.0;                       // K_{n0} lambda^{n0} ||phihat0||_1
  double kNext = 0.0, kNextBound = 0.0;          // K_{2n0+1} against sup u_1 r rhat / lambda^{2n0+1}
};
AgsdReport agsd_check(const HeatKernelSlab& slab, const TruncatedOperator& op, const GroundState& gs,
                      const IntrinsicKernel& ik, int n0);

// log inf over B_r of V^{2pn/(p-2)} phi0 phihat0 mu
double ihc_functional(const TruncatedOperator& op, const GroundState& gs, double p, int n, int r);
TrendData ihc_necessary(const TruncatedOperator& op, const GroundState& gs, double p, int n);

struct NnWindow {
  int N = 0;
  double logSupDiag = 0.0;  // log sup_x q_n0(x,x)
  double logIhc = 0.0;
  double lambda0 = 0.0;
};
struct NnDiagnostics {
  int n0 = 5;
  std::vector<NnWindow> windows;
  std::vector<double> growthDiag, growthIhc;  // consecutive ratios
};
NnDiagnostics nn_diagnostics(KernelPtr kernel, PotentialPtr potential, const std::vector<int>& windows, int n0,
                             double p = 4.0, int nIhc = 2, bool requireNN = true);

}  // namespace fklab
