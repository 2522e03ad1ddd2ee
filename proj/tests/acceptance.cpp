// Acceptance harness: one line per criterion. Exit status is 0 once every
// criterion has been evaluated; --strict turns any failure into status 1.
#include <Eigen/Eigenvalues>
#include <quadmath.h>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdarg>
#include <cstring>
#include <functional>
#include <limits>
#include <memory>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "fklab/ergodic.hpp"
#include "fklab/error.hpp"
#include "fklab/intrinsic.hpp"
#include "fklab/iuc.hpp"
#include "fklab/kernel.hpp"
#include "fklab/mc.hpp"
#include "fklab/potential.hpp"
#include "fklab/semigroup.hpp"
#include "fklab/spectral.hpp"

using namespace fklab;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, ...) __attribute__((format(printf, 1, 2)));
std::string fmt(const char* f, ...) {
  char buf[1024];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof buf, f, ap);
  va_end(ap);
  return buf;
}

PotentialPtr pot(SpacePtr s, ProfileKind k, double rho) {
  return std::make_shared<const Potential>(build_potential(s, k, rho));
}

struct Stack {
  TruncatedOperator op;
  GroundState gs;
  HeatKernelSlab slab;
  MeasureSet ms;
  IntrinsicKernel ik;
};

Stack stack(KernelPtr k, PotentialPtr v, int N, int nMax, bool dual = true) {
  Stack s{assemble(k, v, N), {}, {}, {}, {}};
  s.gs = principal_eigs(s.op);
  spectral_gap(s.op, s.gs);
  HeatOptions ho;
  ho.nMax = nMax;
  ho.dual = dual;
  ho.doubling = 0;
  s.slab = heat_kernels(s.op, ho);
  s.ms = measures(s.op, s.gs);
  s.ik = intrinsic_kernels(s.slab, s.gs);
  return s;
}

// ---------------------------------------------------------------- 1

Outcome c1() {
  auto sp = StateSpace::line();
  auto k = build_metric_kernel(sp, 3.0, 0.0);
  auto v = pot(sp, ProfileKind::Poly, 1.0);
  const int N = 99;  // 199 states
  const auto op = assemble(k, v, N);
  const auto gs = principal_eigs(op);
  // P symmetric, mu constant: V^{-1/2} P V^{-1/2} is a symmetric conjugate of U
  const Eigen::Index n = op.size();
  Eigen::MatrixXd S(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      S(i, j) = k->P(op.states[i], op.states[j]) / std::sqrt(v->V(op.states[i]) * v->V(op.states[j]));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S);
  const double lam = es.eigenvalues()(n - 1);
  Eigen::VectorXd ref = es.eigenvectors().col(n - 1);
  for (Eigen::Index i = 0; i < n; ++i) ref(i) /= std::sqrt(v->V(op.states[i]));
  Eigen::VectorXd got(n);
  for (Eigen::Index i = 0; i < n; ++i) got(i) = gs.phi0(i);
  ref.normalize();
  got.normalize();
  if (ref.dot(got) < 0) ref = -ref;
  const double dl = std::abs(gs.lambda0 - lam), err = (ref - got).norm();
  return {dl <= 1e-10 && err <= 1e-8,
          fmt("states=%ld lambda0=%.15f |dlambda|=%.2e l2(phi0)=%.2e", long(n), gs.lambda0, dl, err)};
}

// ---------------------------------------------------------------- 2

Outcome c2() {
  auto sp = StateSpace::line();
  std::vector<std::pair<std::string, KernelPtr>> ks = {
      {"metric", build_metric_kernel(sp, 3.0, 0.0)},
      {"weighted", build_nonreversible_kernel(sp, NonrevVariant::Weighted, 3.0, 0.3)},
      {"shifted", build_nonreversible_kernel(sp, NonrevVariant::Shifted, 3.0, 0.3, 1)}};
  bool ok = true;
  std::string d;
  for (const auto& [name, k] : ks) {
    const auto op = assemble(k, pot(sp, ProfileKind::Poly, 1.0), 50);
    HeatOptions ho;
    ho.nMax = 10;
    ho.doubling = 0;
    const auto slab = heat_kernels(op, ho);
    double worst = 0.0;
    for (int n = 1; n <= 10; ++n) {
      double mx = 0.0, dev = 0.0;
      for (Eigen::Index i = 0; i < op.size(); ++i)
        for (Eigen::Index j = 0; j < op.size(); ++j) {
          mx = std::max(mx, slab.u(n, i, j));
          dev = std::max(dev, std::abs(slab.uhat(n, i, j) - slab.u(n, j, i)));
        }
      worst = std::max(worst, dev / mx);
    }
    ok = ok && worst <= 1e-11;
    d += fmt("%s=%.1e ", name.c_str(), worst);
  }
  return {ok, "relative max|uhat_n(x,y)-u_n(y,x)| " + d};
}

// ---------------------------------------------------------------- 3

Outcome c3() {
  auto sp = StateSpace::line();
  auto k = build_metric_kernel(sp, 3.0, 0.0);
  const auto op = assemble(k, pot(sp, ProfileKind::Poly, 1.0), 50);
  HeatOptions ho;
  ho.nMax = 8;
  const auto slab = heat_kernels(op, ho);
  const auto au = audit(*k, 50);
  const auto r = check_sandwich(slab, op, au, 2, 8, 25);
  return {r.assumptionsMet && au.passed() && r.violations == 0,
          fmt("c1=C_-=%.6f c2=2C_*=%.6f violations=%d min lower slack=%.3f max upper ratio=%.3f", r.c1, r.c2,
              r.violations, r.minLowerSlack, r.maxUpperRatio)};
}

// ---------------------------------------------------------------- 4

Outcome c4() {
  auto sp = StateSpace::line();
  auto k = build_metric_kernel(sp, 3.0, 0.0);
  auto v = pot(sp, ProfileKind::Poly, 1.0);
  double ct[2];
  int idx = 0;
  bool inside = true;
  for (int N : {50, 100}) {
    auto s = stack(k, v, N, 12);
    const auto au = audit(*k, N);
    const auto t = heat_kernel_comparability(s.slab, s.op, s.gs, s.ik, au, nullptr, 3, false);
    ct[idx] = t.ratioSpread();
    for (int n = 1; n <= 12; ++n)
      inside = inside && t.innerMin[n] >= 1.0 / ct[idx] * (1 - 1e-12) && t.innerMax[n] <= ct[idx] * (1 + 1e-12);
    ++idx;
  }
  const double drift = std::abs(ct[1] / ct[0] - 1.0);
  return {inside && drift <= 0.3, fmt("Ctilde(N=50)=%.4f Ctilde(N=100)=%.4f drift=%.2e%%", ct[0], ct[1], 100 * drift)};
}

// ---------------------------------------------------------------- 5

Outcome c5() {
  auto sp = StateSpace::line();
  bool ok = true;
  std::string d;
  for (double kappa : {0.0, 0.5})
    for (auto pk : {ProfileKind::Poly, ProfileKind::Exp, ProfileKind::Log}) {
      const auto t0 = std::chrono::steady_clock::now();
      auto k = build_metric_kernel(sp, 3.0, kappa);
      auto v = pot(sp, pk, 1.0);
      const std::string cell = std::string(kappa > 0 ? "exp" : "poly") + "-" +
                               (pk == ProfileKind::Log ? "log" : pk == ProfileKind::Poly ? "poly" : "exp");
      const bool aiuc = is_aiuc_cell(parse_cell(cell));
      const int N = 200;
      const auto cl = classify(*k, *v, N);
      bool good = cl.label == (aiuc ? "aIUC-consistent" : "aIUC-refuted");
      std::string extra;
      if (!aiuc) {
        try {
          const auto op = assemble(k, v, N);
          const auto gs = principal_eigs(op);
          const auto plan = piuc_exhaustion(op, gs, audit(*k, N), 20);
          extra = fmt(",|D|=%ld", long(plan.dSize));
        } catch (const std::exception& e) {
          good = false;
          extra = std::string(",plan:") + e.what();
        }
      }
      const double sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      good = good && sec < 120.0;
      ok = ok && good;
      d += fmt("%s:%s%s%s(%.1fs) ", cell.c_str(), cl.label.c_str(), cl.n0 ? fmt(",n0=%d", cl.n0).c_str() : "",
               extra.c_str(), sec);
    }
  return {ok, d};
}

// ---------------------------------------------------------------- 6

using quad = __float128;

// w e^w = r by Newton, so log a = w for a log a = r
quad lambert_w(quad r) {
  quad w = r < 1 ? r : logq(r);
  for (int i = 0; i < 200; ++i) {
    const quad e = expq(w);
    const quad step = (w * e - r) / (e * (w + 1));
    w -= step;
    if (fabsq(step) < quad(1e-33) * (1 + fabsq(w))) break;
  }
  return w;
}

// printed closed forms, before the floor
quad table1_value(Table1Cell c, const Table1Params& p, int n) {
  const quad m = quad(n - 1) * quad(p.rho);
  const quad cr = powq(quad(p.Ctilde), 1 / quad(p.rho));
  const quad den = 2 * quad(p.kappa) + quad(p.epsilon);
  switch (c) {
    case Table1Cell::PolyLog:
      return powq(2, -1 / (2 * quad(p.beta))) * powq(m / cr, m / (2 * quad(p.beta)));
    case Table1Cell::ExpLog:
      return m * lambert_w(1 / cr) / den;
    case Table1Cell::ExpPoly:
      return m * logq(m / cr) / den;
    default:
      return -1;
  }
}

Outcome c6() {
  const Table1Cell cells[] = {Table1Cell::PolyLog, Table1Cell::ExpLog, Table1Cell::ExpPoly};
  std::vector<Table1Params> ps = {{3, 0.5, 1, 1, 0.5}, {3, 0.5, 1, 0.2, 0.5}, {2.5, 1.0, 2, 5, 0.25},
                                  {4, 0.3, 0.5, 40, 1.0}, {3, 0.5, 1, 600, 0.5}};
  int checked = 0, mismatch = 0, nearInt = 0;
  std::string first;
  for (auto c : cells)
    for (const auto& p : ps)
      for (int n = 2; n <= 50; ++n) {
        const quad x = table1_value(c, p, n);
        int64_t want;
        if (!(x < quad(9.0e18))) {
          want = std::numeric_limits<int64_t>::max();
        } else {
          want = std::max<int64_t>(1, int64_t(floorq(x)));
          const quad fr = x - floorq(x);
          if (x >= 1 && (fr < quad(1e-25) * x || 1 - fr < quad(1e-25) * x)) ++nearInt;
        }
        const int64_t got = table1_exhaustion(c, p, n);
        ++checked;
        if (got != want) {
          ++mismatch;
          if (first.empty())
            first = fmt(" first: %s n=%d got=%lld want=%lld", to_string(c).c_str(), n, (long long)got, (long long)want);
        }
      }
  const int64_t spot = table1_exhaustion(Table1Cell::PolyLog, Table1Params{3, 0.5, 1, 1, 0.5}, 5);
  bool trivial = true;
  for (auto c : {Table1Cell::PolyPoly, Table1Cell::PolyExp, Table1Cell::ExpExp}) {
    try {
      table1_exhaustion(c, Table1Params{}, 3);
      trivial = false;
    } catch (const PreconditionError&) {
    }
  }
  return {mismatch == 0 && spot == 2 && trivial,
          fmt("3 pIUC cells x 5 parameter sets x n in [2,50]: %d values, %d mismatches, %d near-integer; k(5)=%lld; "
              "aIUC cells report trivial exhaustion",
              checked, mismatch, nearInt, (long long)spot) +
              first};
}

// ---------------------------------------------------------------- 7

Outcome c7() {
  auto sp = StateSpace::line();
  auto k = build_metric_kernel(sp, 3.0, 0.0);
  auto v = pot(sp, ProfileKind::Log, 1.0);
  const int n0 = 2, nTop = 20;
  auto big = stack(k, v, 400, nTop, false);
  const auto plan = piuc_exhaustion(big.op, big.gs, audit(*k, 400), nTop);
  std::vector<double> supA(nTop + 1, 0.0);
  for (int n = n0; n <= nTop; ++n) supA[n] = big.ik.q[n].topRows(big.op.ballCount(plan.radius(n))).maxCoeff();
  double C = 0.0, lo = INFINITY;
  for (int n = n0; n <= nTop; ++n) {
    C = std::max(C, supA[n]);
    lo = std::min(lo, supA[n]);
  }
  // smallest start from which the restricted sup stays within a factor 2 (diagnostic only)
  int stableFrom = nTop;
  for (int s = nTop; s >= n0; --s) {
    double a = 0, b = INFINITY;
    for (int n = s; n <= nTop; ++n) {
      a = std::max(a, supA[n]);
      b = std::min(b, supA[n]);
    }
    if (a <= 2 * b) stableFrom = s;
    else break;
  }
  auto small = stack(k, v, 100, nTop, false);
  const double growTop = big.ik.K[nTop] / small.ik.K[nTop];
  int lastGrow = 0;
  for (int n = n0; n <= nTop; ++n)
    if (big.ik.K[n] >= 2 * small.ik.K[n]) lastGrow = n;
  const bool stable = C <= 2 * lo;
  const bool grows = growTop >= 2.0;
  return {stable && grows,
          fmt("n0=%d |D|=%ld A_n=B_%d..B_%d C=%.3g min sup=%.3g (stable x2 from n=%d); K_%d(400)/K_%d(100)=%.3f "
              "(>=2x up to n=%d)",
              n0, long(plan.dSize), plan.radius(n0), plan.radius(nTop), C, lo, stableFrom, nTop, nTop, growTop,
              lastGrow)};
}

// ---------------------------------------------------------------- 8

Outcome c8() {
  struct M {
    std::string name;
    KernelPtr k;
    PotentialPtr v;
    int N;
  };
  auto line = StateSpace::line();
  auto z2 = StateSpace::lattice(2);
  std::vector<M> ms = {
      {"ref", build_metric_kernel(line, 3.0, 0.0), pot(line, ProfileKind::Poly, 1.0), 50},
      {"poly-log", build_metric_kernel(line, 3.0, 0.0), pot(line, ProfileKind::Log, 1.0), 100},
      {"poly-exp", build_metric_kernel(line, 3.0, 0.0), pot(line, ProfileKind::Exp, 1.0), 50},
      {"exp-log", build_metric_kernel(line, 3.0, 0.5), pot(line, ProfileKind::Log, 1.0), 100},
      {"exp-poly", build_metric_kernel(line, 3.0, 0.5), pot(line, ProfileKind::Poly, 1.0), 50},
      {"exp-exp", build_metric_kernel(line, 3.0, 0.5), pot(line, ProfileKind::Exp, 1.0), 50},
      {"weighted", build_nonreversible_kernel(line, NonrevVariant::Weighted, 3.0, 0.3), pot(line, ProfileKind::Poly, 1.0), 50},
      {"shifted", build_nonreversible_kernel(line, NonrevVariant::Shifted, 3.0, 0.3, 1), pot(line, ProfileKind::Poly, 1.0), 50},
      {"z2", build_metric_kernel(z2, 4.0, 0.0), pot(z2, ProfileKind::Poly, 1.0), 10},
  };
  bool ok = true;
  std::string d;
  for (const auto& m : ms) {
    const auto au = audit(*m.k, m.N);
    if (!au.passed()) {
      d += m.name + ":unaudited ";
      continue;
    }
    auto s = stack(m.k, m.v, m.N, 40, false);
    const auto tr = uniform_ergodicity(s.ik, s.ms, 40);
    const bool good = tr.geometric() && tr.minQ1 > 0.0;
    ok = ok && good;
    d += fmt("%s:R2=%.4f/%dpts,minq1=%.3g ", m.name.c_str(), tr.fit ? tr.fit->r2 : 0.0, tr.fit ? tr.fit->points() : 0,
             tr.minQ1);
  }
  auto k = build_metric_kernel(line, 3.0, 0.0);
  auto v = pot(line, ProfileKind::Poly, 1.0);
  const auto op = assemble(k, v, 60);
  HeatOptions ho;
  ho.nMax = 5;
  const auto slab = heat_kernels(op, ho);
  McOptions mo;
  mo.paths = 1'000'000;
  mo.seed = 1;
  const auto e = simulate_fk(*k, *v, State(0), 5, {State(1)}, false, mo)[0];
  const double mat = slab.u(5, 0, 1) * op.mu(1);
  const bool mc = std::abs(e.estimate - mat) <= 3 * e.stdError;
  d += fmt("| MC u5(0,1)mu(1)=%.6f+-%.6f matrix=%.6f", e.estimate, e.stdError, mat);
  return {ok && mc, d};
}

// ---------------------------------------------------------------- 9 and 10 share the poly-log stack

Outcome c9() {
  auto sp = StateSpace::line();
  auto k = build_metric_kernel(sp, 3.0, 0.0);
  auto v = pot(sp, ProfileKind::Log, 1.0);
  auto s = stack(k, v, 400, 40, false);
  const auto plan = piuc_exhaustion(s.op, s.gs, audit(*k, 400), 40);
  const auto pr = progressive_rates(s.ik, s.ms, s.op, plan, s.gs.gapRatio, 8, 40);
  double Cfirst = 0.0, Csecond = 0.0;
  for (int m = 8; m <= 23; ++m) Cfirst = std::max(Cfirst, pr.ratio[m]);
  for (int m = 24; m <= 40; ++m) Csecond = std::max(Csecond, pr.ratio[m]);
  std::vector<double> x, y;
  for (int m = 8; m <= 40; ++m) {
    x.push_back(std::log(m * std::log(double(m))));
    y.push_back(std::log(pr.e1[m]));
  }
  const auto f = least_squares(x, y, 0, int(x.size()) - 1);
  const bool dominated = Csecond <= Cfirst;
  const bool slope = std::abs(f.slope + 1.0) <= 0.25;
  const bool loose = std::abs(f.slope + 1.0) <= 0.5;
  return {dominated && slope,
          fmt("C=%.3g (first half %.3g, second half %.3g) e1(8)=%.3g e1(40)=%.3g slope=%.3f R2=%.3f gap=%.4f%s", std::max(Cfirst, Csecond),
              Cfirst, Csecond, pr.e1[8], pr.e1[40], f.slope, f.r2, s.gs.gapRatio,
              slope ? "" : (loose ? " [diagnostic: within +-0.5]" : ""))};
}

Outcome c10() {
  auto sp = StateSpace::line();
  auto k = build_metric_kernel(sp, 3.0, 0.0);
  std::string d;
  bool ok = true;
  for (auto [name, pk, N] : {std::tuple{"ref", ProfileKind::Poly, 50}, std::tuple{"poly-log", ProfileKind::Log, 200}}) {
    auto v = pot(sp, pk, 1.0);
    auto s = stack(k, v, N, 40, false);
    const auto au = audit(*k, N);
    const auto plan = piuc_exhaustion(s.op, s.gs, au, 40);
    const auto cl = classify(*k, *v, 200);
    const auto pr = progressive_rates(s.ik, s.ms, s.op, plan, s.gs.gapRatio, 1, 40);
    const auto qe = quasi_ergodicity(s.slab, s.gs, s.ms, s.op, plan, 1, 40);
    const auto ke = kappa_equivalence(pr.e1, qe.qe, 5, 40);
    const bool good = ke.to >= ke.from && ke.c <= 10.0;
    ok = ok && good;
    d += fmt("%s(%s): trusted n=%d..%d c=%.3f dropped=%zu ", name, cl.label.c_str(), ke.from, ke.to, ke.c,
             ke.dropped.size());
  }
  return {ok, d};
}

// ---------------------------------------------------------------- 11

Outcome c11() {
  auto sp = StateSpace::line();
  const auto d = nn_diagnostics(build_nn_kernel(sp, 0.5), pot(sp, ProfileKind::Poly, 1.0), {100, 200, 400}, 5);
  const double l10 = std::log(10.0);
  const double diag = (d.windows[2].logSupDiag - d.windows[0].logSupDiag) / l10;
  bool ihc = true;
  std::string r;
  for (size_t i = 1; i < d.windows.size(); ++i) {
    const double drop = (d.windows[i].logIhc - d.windows[i - 1].logIhc) / l10;
    ihc = ihc && drop <= -std::log10(2.0);
    r += fmt(" %.1f", drop);
  }
  const bool finite = std::isfinite(d.windows[0].logSupDiag) && std::isfinite(d.windows[2].logSupDiag);
  return {finite && diag >= std::log10(2.0) && ihc,
          fmt("log10 sup q5(x,x): N=100 %.1f, N=400 %.1f (growth 10^%.1f); log10 IHC change per doubling:%s",
              d.windows[0].logSupDiag / l10, d.windows[2].logSupDiag / l10, diag, r.c_str())};
}

}  // namespace

int main(int argc, char** argv) {
  const bool strict = argc > 1 && std::strcmp(argv[1], "--strict") == 0;
  struct C {
    int id;
    const char* name;
    double budget;
    std::function<Outcome()> f;
  };
  const std::vector<C> cs = {
      {1, "eigenpair vs dense oracle", 5, c1},
      {2, "duality exactness", 30, c2},
      {3, "two-step sandwich", 60, c3},
      {4, "comparability near the origin", 120, c4},
      {5, "aIUC classification, six cells", 720, c5},
      {6, "closed-form exhaustion radii", 1, c6},
      {7, "pIUC uniformity", 300, c7},
      {8, "geometric ergodicity + MC", 300, c8},
      {9, "progressive rate envelope", 600, c9},
      {10, "kappa-equivalence", 120, c10},
      {11, "nearest-neighbour negatives", 180, c11},
  };
  int passed = 0;
  for (const auto& c : cs) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.f();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (sec > c.budget) {
      o.pass = false;
      o.detail += fmt(" [over budget %.0fs]", c.budget);
    }
    passed += o.pass;
    std::printf("%s criterion %2d %-34s %7.2fs  %s\n", o.pass ? "PASS" : "FAIL", c.id, c.name, sec, o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", passed, cs.size());
  return strict && passed != int(cs.size()) ? 1 : 0;
}
