#include "fklab/pipeline.hpp"

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "fklab/ergodic.hpp"
#include "fklab/intrinsic.hpp"
#include "fklab/mc.hpp"
#include "fklab/semigroup.hpp"
#include "fklab/spectral.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace fklab {

// ---------------------------------------------------------------- model

SpacePtr build_space(const Config& cfg, const std::string& prefix) {
  const std::string kind = cfg.str(prefix + "kind");
  if (kind == "line") return StateSpace::line();
  if (kind == "lattice") return StateSpace::lattice(cfg.integer(prefix + "dim", 1));
  if (kind == "product") {
    auto a = build_space(cfg, prefix + "factor1.");
    auto b = build_space(cfg, prefix + "factor2.");
    return StateSpace::product(a, b);
  }
  if (kind.empty()) return StateSpace::line();
  throw ConfigError("unknown space kind '" + kind + "'");
}

KernelPtr build_kernel(const Config& cfg, const std::string& prefix, SpacePtr space) {
  const std::string kind = cfg.str(prefix + "kind");
  if (kind == "metric") return build_metric_kernel(space, cfg.num(prefix + "beta"), cfg.num(prefix + "kappa", 0.0));
  if (kind == "nonreversible") {
    const std::string v = cfg.str(prefix + "variant", "weighted");
    if (v != "weighted" && v != "shifted") throw ConfigError("kernel variant must be weighted or shifted");
    return build_nonreversible_kernel(space, v == "weighted" ? NonrevVariant::Weighted : NonrevVariant::Shifted,
                                      cfg.num(prefix + "beta"), cfg.num(prefix + "eta", 0.3),
                                      cfg.integer(prefix + "shift", 0));
  }
  if (kind == "nn") return build_nn_kernel(space, cfg.num(prefix + "a0"));
  if (kind == "subordinate") {
    auto nn = build_nn_kernel(space, cfg.num(prefix + "a0", 0.5));
    const std::string law = cfg.str(prefix + "law", "power");
    StepLaw sl;
    if (law == "power") sl = StepLaw::power(cfg.num(prefix + "s"));
    else if (law == "point") sl = StepLaw::pointMass(cfg.integer(prefix + "point"));
    else throw ConfigError("step law must be power or point");
    return build_subordinate_kernel(nn, sl, cfg.integer(prefix + "ncut", 200), cfg.flag(prefix + "allow_bounded", false));
  }
  if (kind == "product") {
    if (space->kind() != SpaceKind::Product) throw ConfigError("product kernel needs a product space");
    auto a = build_kernel(cfg, prefix + "factor1.", space->factorPtr(0));
    auto b = build_kernel(cfg, prefix + "factor2.", space->factorPtr(1));
    return build_product_kernel(a, b);
  }
  if (kind.empty()) return nullptr;
  throw ConfigError("unknown kernel kind '" + kind + "'");
}

Model build_model(const Config& cfg) {
  Model m;
  m.space = build_space(cfg, "space.");
  m.kernel = build_kernel(cfg, "kernel.", m.space);
  const std::string prof = cfg.str("potential.profile");
  const double rho = cfg.num("potential.rho", 1.0);
  cfg.integer("truncation.N");
  cfg.check();
  const ProfileKind pk = parse_profile_kind(prof);
  m.potential = std::make_shared<const Potential>(
      pk == ProfileKind::Table ? load_table_potential(m.space, cfg.str("potential.table")) : build_potential(m.space, pk, rho));
  cfg.check();
  if (cfg.str("kernel.kind") == "metric" && m.space->kind() != SpaceKind::Product && pk != ProfileKind::Table) {
    m.beta = cfg.num("kernel.beta");
    m.kappa = cfg.num("kernel.kappa", 0.0);
    const std::string r = m.kappa > 0.0 ? "exp" : "poly";
    const std::string w = pk == ProfileKind::Log ? "log" : pk == ProfileKind::Poly ? "poly" : "exp";
    m.cell = parse_cell(r + "-" + w);
  }
  return m;
}

State parse_state(const std::string& s0, int dim) {
  std::string s = s0;
  s.erase(std::remove_if(s.begin(), s.end(), [](char c) { return c == '(' || c == ')' || c == ' '; }), s.end());
  std::vector<int> c;
  std::stringstream ss(s);
  std::string part;
  while (std::getline(ss, part, ';')) {
    try {
      c.push_back(std::stoi(part));
    } catch (const std::exception&) {
      throw ConfigError("cannot parse state '" + s0 + "'");
    }
  }
  if (int(c.size()) != dim) throw ConfigError("state '" + s0 + "' does not have dimension " + std::to_string(dim));
  State x;
  x.dim = dim;
  for (int i = 0; i < dim; ++i) x.c[i] = c[i];
  return x;
}

// ---------------------------------------------------------------- cache

namespace {

fs::path cache_dir() {
  if (const char* e = std::getenv("FKLAB_CACHE_DIR"); e && *e) return e;
  if (const char* h = std::getenv("HOME"); h && *h) return fs::path(h) / ".cache" / "fklab";
  return fs::temp_directory_path() / "fklab-cache";
}

constexpr uint64_t kMagic = 0x666b6c6162763031ULL;

struct Out {
  std::ofstream f;
  void i(int64_t v) { f.write(reinterpret_cast<const char*>(&v), sizeof v); }
  void d(double v) { f.write(reinterpret_cast<const char*>(&v), sizeof v); }
  void vec(const Eigen::VectorXd& v) {
    i(v.size());
    f.write(reinterpret_cast<const char*>(v.data()), std::streamsize(v.size() * sizeof(double)));
  }
  void mat(const Eigen::MatrixXd& m) {
    i(m.rows());
    i(m.cols());
    f.write(reinterpret_cast<const char*>(m.data()), std::streamsize(m.size() * sizeof(double)));
  }
  void dv(const std::vector<double>& v) {
    i(int64_t(v.size()));
    for (double x : v) d(x);
  }
  void mats(const std::vector<Eigen::MatrixXd>& v) {
    i(int64_t(v.size()));
    for (const auto& m : v) mat(m);
  }
};

struct In {
  std::ifstream f;
  int64_t i() {
    int64_t v = 0;
    if (!f.read(reinterpret_cast<char*>(&v), sizeof v)) throw std::runtime_error("truncated cache");
    return v;
  }
  double d() {
    double v = 0;
    if (!f.read(reinterpret_cast<char*>(&v), sizeof v)) throw std::runtime_error("truncated cache");
    return v;
  }
  Eigen::VectorXd vec() {
    Eigen::VectorXd v(i());
    if (!f.read(reinterpret_cast<char*>(v.data()), std::streamsize(v.size() * sizeof(double))))
      throw std::runtime_error("truncated cache");
    return v;
  }
  Eigen::MatrixXd mat() {
    const int64_t r = i(), c = i();
    Eigen::MatrixXd m(r, c);
    if (!f.read(reinterpret_cast<char*>(m.data()), std::streamsize(m.size() * sizeof(double))))
      throw std::runtime_error("truncated cache");
    return m;
  }
  std::vector<double> dv() {
    std::vector<double> v(static_cast<size_t>(i()));
    for (auto& x : v) x = d();
    return v;
  }
  std::vector<Eigen::MatrixXd> mats() {
    std::vector<Eigen::MatrixXd> v(static_cast<size_t>(i()));
    for (auto& m : v) m = mat();
    return v;
  }
};

void save_gs(const fs::path& p, const GroundState& g) {
  fs::create_directories(p.parent_path());
  const fs::path tmp = p.string() + ".tmp";
  {
    Out o{std::ofstream(tmp, std::ios::binary)};
    o.i(int64_t(kMagic));
    o.d(g.lambda0);
    o.d(g.lambdaHat0);
    o.vec(g.logPhi0);
    o.vec(g.logPhiHat0);
    o.d(g.residual);
    o.d(g.residualHat);
    o.i(g.iterations);
    o.i(g.iterationsHat);
    o.d(g.gapRatio);
  }
  fs::rename(tmp, p);
}

std::optional<GroundState> load_gs(const fs::path& p) {
  if (!fs::exists(p)) return std::nullopt;
  try {
    In in{std::ifstream(p, std::ios::binary)};
    if (uint64_t(in.i()) != kMagic) return std::nullopt;
    GroundState g;
    g.lambda0 = in.d();
    g.lambdaHat0 = in.d();
    g.logPhi0 = in.vec();
    g.logPhiHat0 = in.vec();
    g.residual = in.d();
    g.residualHat = in.d();
    g.iterations = int(in.i());
    g.iterationsHat = int(in.i());
    g.gapRatio = in.d();
    return g;
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

void save_slab(const fs::path& p, const HeatKernelSlab& s) {
  fs::create_directories(p.parent_path());
  const fs::path tmp = p.string() + ".tmp";
  {
    Out o{std::ofstream(tmp, std::ios::binary)};
    o.i(int64_t(kMagic));
    o.i(s.N);
    o.i(s.M);
    o.i(s.nMax);
    o.i(s.inner);
    o.mats(s.T);
    o.mats(s.That);
    o.dv(s.logScale);
    o.dv(s.logScaleHat);
    o.vec(s.mu);
    o.dv(s.epsAnalytic);
    o.mats(s.gap);
  }
  fs::rename(tmp, p);
}

std::optional<HeatKernelSlab> load_slab(const fs::path& p) {
  if (!fs::exists(p)) return std::nullopt;
  try {
    In in{std::ifstream(p, std::ios::binary)};
    if (uint64_t(in.i()) != kMagic) return std::nullopt;
    HeatKernelSlab s;
    s.N = int(in.i());
    s.M = int(in.i());
    s.nMax = int(in.i());
    s.inner = in.i();
    s.T = in.mats();
    s.That = in.mats();
    s.logScale = in.dv();
    s.logScaleHat = in.dv();
    s.mu = in.vec();
    s.epsAnalytic = in.dv();
    s.gap = in.mats();
    return s;
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

// ---------------------------------------------------------------- helpers

json finite(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json finite(const std::vector<double>& v, int from = 0) {
  json a = json::array();
  for (size_t i = size_t(from); i < v.size(); ++i) a.push_back(finite(v[i]));
  return a;
}

json verdict(const Verdict& v) { return {{"status", v.status}, {"detail", v.detail}}; }

json fit_json(const std::optional<LinearFit>& f) {
  if (!f) return nullptr;
  return {{"slope", f->slope}, {"intercept", f->intercept}, {"r2", f->r2}, {"from", f->from}, {"to", f->to},
          {"rate", std::exp(f->slope)}};
}

json trend_json(const TrendData& t) {
  return {{"windows", t.windows}, {"log_value", finite(t.logValue)}, {"verdict", to_string(t.verdict)}};
}

void write_json(const fs::path& p, const json& j) {
  std::ofstream f(p);
  f << j.dump(2) << "\n";
}

std::string num(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

struct Ctx {
  Config cfg;
  Model model;
  int N = 0, M = 0, nMax = 0;
  fs::path out;
  std::ofstream log;
  std::string key;
  bool allowUnaudited = false;
  json report;

  std::optional<AssumptionAudit> au;
  std::optional<TruncatedOperator> op;
  std::optional<GroundState> gs;
  std::optional<HeatKernelSlab> slab;
  std::optional<MeasureSet> ms;
  std::optional<IntrinsicKernel> ik;
  std::optional<ExhaustionPlan> plan;

  void note(const std::string& msg) {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    log << std::put_time(std::gmtime(&now), "%Y-%m-%dT%H:%M:%SZ") << " " << msg << "\n";
    log.flush();
  }
  template <class F>
  auto timed(const std::string& stage, F&& f) {
    const auto t0 = std::chrono::steady_clock::now();
    if constexpr (std::is_void_v<decltype(f())>) {
      f();
      note(stage + " " + num(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count()) + " s");
    } else {
      auto r = f();
      note(stage + " " + num(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count()) + " s");
      return r;
    }
  }

  TruncatedOperator& ensure_op() {
    if (!op) op = timed("assemble", [&] { return assemble(model.kernel, model.potential, N); });
    return *op;
  }
  GroundState& ensure_gs() {
    if (gs) return *gs;
    const fs::path p = cache_dir() / (key + ".gs");
    if (auto g = load_gs(p)) {
      note("ground state from cache " + p.string());
      gs = *g;
      return *gs;
    }
    ensure_op();
    gs = timed("spectral", [&] {
      EigOptions eo;
      eo.tol = cfg.num("tolerance.eig", 1e-12);
      GroundState g = principal_eigs(*op, eo);
      spectral_gap(*op, g);
      return g;
    });
    try {
      save_gs(p, *gs);
    } catch (const std::exception& e) {
      note(std::string("cache write failed: ") + e.what());
    }
    return *gs;
  }
  HeatKernelSlab& ensure_slab() {
    if (slab) return *slab;
    const fs::path p = cache_dir() / (key + ".slab");
    if (auto s = load_slab(p)) {
      note("heat kernels from cache " + p.string());
      slab = std::move(*s);
      return *slab;
    }
    ensure_op();
    slab = timed("heatkernel", [&] {
      HeatOptions ho;
      ho.nMax = nMax;
      ho.M = M;
      ho.tolerance = cfg.num("tolerance.certificate", std::numeric_limits<double>::infinity());
      return heat_kernels(*op, ho);
    });
    try {
      save_slab(p, *slab);
    } catch (const std::exception& e) {
      note(std::string("cache write failed: ") + e.what());
    }
    return *slab;
  }
  void ensure_intrinsic() {
    if (ik) return;
    ensure_op();
    ensure_gs();
    ensure_slab();
    ms = measures(*op, *gs);
    ik = timed("intrinsic", [&] { return intrinsic_kernels(*slab, *gs); });
  }
  std::string planError;
  const ExhaustionPlan* try_plan() {
    if (plan) return &*plan;
    if (!planError.empty()) return nullptr;
    try {
      plan = piuc_exhaustion(ensure_op(), ensure_gs(), *au, nMax);
      return &*plan;
    } catch (const ModelError& e) {
      planError = e.what();
      note(std::string("no exhaustion plan: ") + e.what());
      return nullptr;
    }
  }
};

// ---------------------------------------------------------------- stages

bool stage_audit(Ctx& c, std::ostream& err) {
  c.au = c.timed("audit", [&] { return audit(*c.model.kernel, c.N); });
  const auto& a = *c.au;
  json j = {{"N", a.N},
            {"C_star", finite(a.Cstar)},
            {"C_star_empirical", finite(a.CstarEmpirical)},
            {"C_minus", finite(a.Cminus)},
            {"sup_density", finite(a.supDensity)},
            {"positive", a.positive},
            {"tail_certified", a.tailCertified},
            {"A1", verdict(a.A1)},
            {"A2", verdict(a.A2)},
            {"A3", verdict(a.A3)},
            {"duality_residual", duality_residual(*c.model.kernel, std::min(c.N, 50))},
            {"passed", a.passed()}};
  j["witness"] = a.witness ? json::array({a.witness->first.str(), a.witness->second.str()}) : json(nullptr);
  c.report["audit"] = j;
  write_json(c.out / "audit.json", j);
  if (!a.passed()) {
    err << "assumption audit failed: A1 " << a.A1.status << ", A2 " << a.A2.status << ", A3 " << a.A3.status;
    if (a.witness) err << "; witness (" << a.witness->first.str() << "," << a.witness->second.str() << ")";
    err << "\n";
  }
  return a.passed();
}

void stage_spectral(Ctx& c) {
  auto& op = c.ensure_op();
  auto& gs = c.ensure_gs();
  const auto cmp = ground_state_bounds(op, gs, c.M);
  json j = {{"lambda0", gs.lambda0},
            {"lambda_hat0", gs.lambdaHat0},
            {"residual", gs.residual},
            {"residual_hat", gs.residualHat},
            {"iterations", gs.iterations},
            {"iterations_hat", gs.iterationsHat},
            {"gap_ratio", finite(gs.gapRatio)},
            {"states", op.size()},
            {"comparability", {{"r1", finite(cmp.r1)}, {"r2", finite(cmp.r2)}, {"c_upper", finite(cmp.cUpper)},
                               {"kernel_vanishes", cmp.kernelVanishes}}}};
  c.report["spectral"] = j;
  write_json(c.out / "spectral.json", j);
  std::ofstream f(c.out / "ground_state.csv");
  f << "x_index,state,phi0,phi0hat\n";
  for (Eigen::Index i = 0; i < op.size(); ++i)
    f << i << "," << op.states[i].str() << "," << num(gs.phi0(i)) << "," << num(gs.phiHat0(i)) << "\n";
}

void stage_heatkernel(Ctx& c) {
  auto& op = c.ensure_op();
  auto& s = c.ensure_slab();
  std::ofstream f(c.out / "heat_kernel.csv");
  f << "n,x,y,u_lower,u_upper\n";
  for (int n = 1; n <= s.nMax; ++n)
    for (Eigen::Index i = 0; i < s.inner; ++i)
      for (Eigen::Index j = 0; j < s.inner; ++j)
        f << n << "," << op.states[i].str() << "," << op.states[j].str() << "," << num(s.lower(n, i, j)) << ","
          << num(s.upper(n, i, j)) << "\n";
  const int nTo = std::min(s.nMax, c.cfg.integer("heat.sandwich_nmax", 8));
  json j = {{"N", s.N}, {"M", s.M}, {"n_max", s.nMax}, {"eps_analytic", finite(s.epsAnalytic, 1)}};
  if (nTo >= 2) {
    const auto sw = check_sandwich(s, op, *c.au, 2, nTo, s.M);
    j["sandwich"] = {{"n_from", 2},
                     {"n_to", nTo},
                     {"c1", sw.c1},
                     {"c2", sw.c2},
                     {"min_lower_slack", finite(sw.minLowerSlack)},
                     {"max_upper_ratio", finite(sw.maxUpperRatio)},
                     {"violations", sw.violations},
                     {"assumptions_met", sw.assumptionsMet}};
  }
  c.report["heatkernel"] = j;
  write_json(c.out / "heatkernel.json", j);
}

void stage_iuc(Ctx& c) {
  auto& op = c.ensure_op();
  auto& gs = c.ensure_gs();
  c.ensure_intrinsic();
  auto& slab = *c.slab;
  auto& ik = *c.ik;
  const auto& m = c.model;
  json j;
  const int n0Max = c.cfg.integer("iuc.n0_max", 10);
  const auto cl = c.timed("classify", [&] { return classify(*m.kernel, *m.potential, c.N, n0Max); });
  json scan = json::array();
  for (const auto& r : cl.scan) scan.push_back({{"n0", r.n0}, {"trend", trend_json(r.trend)}});
  j["classification"] = {{"label", cl.label}, {"n0", cl.n0}, {"scan", scan}};
  const double p = c.cfg.num("iuc.p", 4.0);
  const int ihcN = c.cfg.integer("iuc.ihc_n", 2);
  const auto ihc = ihc_necessary(op, gs, p, ihcN);
  j["ihc"] = {{"p", p}, {"n", ihcN}, {"trend", trend_json(ihc)}};
  const bool agree = (cl.label == "aIUC-consistent") == (ihc.verdict == Trend::Consistent) &&
                     (cl.label == "aIUC-refuted") == (ihc.verdict == Trend::Refuted);
  j["ihc_agrees"] = agree;

  const ExhaustionPlan* pp = c.try_plan();
  if (pp) {
    const auto& plan = *pp;
    json l = json::array(), capped = json::array(), dn = json::array();
    for (int n = 1; n <= plan.nMax; ++n) {
      l.push_back(plan.l[n]);
      capped.push_back(bool(plan.capped[n]));
      dn.push_back(plan.dnSize[n]);
    }
    j["plan"] = {{"C", plan.C}, {"lambda0", plan.lambda0}, {"D_size", plan.dSize}, {"D_radius", plan.dRadius},
                 {"l", l}, {"capped", capped}, {"D_n_size", dn}};
  } else {
    j["plan"] = {{"error", c.planError}};
  }
  if (m.cell && !is_aiuc_cell(*m.cell)) {
    const double C = std::max(3.0 * c.au->Cstar, 1.0 / c.au->Cminus);
    const auto ap = analysis_profile(op, *m.cell, m.beta, m.kappa, C, gs.lambda0);
    Table1Params tp{m.beta, m.kappa, m.potential->rho(), ap.Ctilde, c.cfg.num("iuc.epsilon", 0.5)};
    json k = json::array();
    for (int n = 1; n <= c.nMax; ++n) k.push_back(table1_exhaustion(*m.cell, tp, n));
    j["table1"] = {{"cell", to_string(*m.cell)}, {"C0", ap.C0}, {"C1", ap.C1}, {"C2", ap.C2},
                   {"C_tilde", ap.Ctilde}, {"gamma", ap.gamma}, {"k", k}};
  } else if (m.cell) {
    j["table1"] = {{"cell", to_string(*m.cell)}, {"exhaustion", "trivial"}};
  }

  const int bR = std::min(c.cfg.integer("iuc.B", 3), slab.M);
  const auto ct = c.timed("comparability", [&] {
    return heat_kernel_comparability(slab, op, gs, ik, *c.au, pp, bR, c.cfg.flag("iuc.outer", true));
  });
  j["comparability"] = {{"B_radius", bR},
                        {"C_upper", ct.Cupper},
                        {"C_lower", ct.Clower},
                        {"inner_min", finite(ct.innerMin, 1)},
                        {"inner_max", finite(ct.innerMax, 1)},
                        {"C_tilde", finite(ct.ratioSpread())},
                        {"outer_lo", finite(ct.outerLo, 1)},
                        {"outer_hi", finite(ct.outerHi, 1)},
                        {"piuc_sup", finite(ct.piucSup, 1)},
                        {"window_sup", finite(ct.windowSup, 1)},
                        {"assumptions_met", ct.assumptionsMet}};
  const int n0 = std::clamp(cl.n0 > 0 ? cl.n0 : c.cfg.integer("iuc.n0", 2), 1, slab.nMax);
  const auto ag = agsd_check(slab, op, gs, ik, n0);
  j["agsd"] = {{"n0", ag.n0},
               {"ratio", finite(ag.ratio)},
               {"ratio_hat", finite(ag.ratioHat)},
               {"ratio_inner", finite(ag.ratioInner)},
               {"ratio_hat_inner", finite(ag.ratioHatInner)},
               {"min_lower_ratio", finite(ag.minLowerRatio)},
               {"bound_from_K", finite(ag.boundFromK)},
               {"K_next", finite(ag.kNext)},
               {"K_next_bound", finite(ag.kNextBound)}};
  j["K"] = finite(ik.K, 1);
  j["K_inner"] = finite(ik.KInner, 1);
  j["nu_norm"] = c.ms->normNu;
  j["l1_phi0"] = c.ms->l1Phi0;
  j["l1_phihat0"] = c.ms->l1PhiHat0;
  j["l1_tail_phi0_heuristic"] = c.ms->l1TailPhi0;
  j["l1_tail_phihat0_heuristic"] = c.ms->l1TailPhiHat0;
  c.report["iuc"] = j;
  write_json(c.out / "iuc.json", j);

  std::ofstream f(c.out / "intrinsic.csv");
  f << "n,x,y,q_n\n";
  for (int n = 1; n <= slab.nMax; ++n)
    for (Eigen::Index a = 0; a < slab.inner; ++a)
      for (Eigen::Index b = 0; b < slab.inner; ++b)
        f << n << "," << op.states[a].str() << "," << op.states[b].str() << "," << num(ik.q[n](a, b)) << "\n";
  if (!pp) return;
  std::ofstream g(c.out / "iuc_plan.csv");
  g << "n,l,D_n_size,sup_q_A_n,sup_q_window\n";
  for (int n = 1; n <= pp->nMax; ++n)
    g << n << "," << pp->l[n] << "," << pp->dnSize[n] << "," << num(ct.piucSup[n]) << "," << num(ct.windowSup[n])
      << "\n";
}

void stage_ergodic(Ctx& c) {
  auto& op = c.ensure_op();
  auto& gs = c.ensure_gs();
  c.ensure_intrinsic();
  const ExhaustionPlan* plan = c.try_plan();
  const auto& ik = *c.ik;
  const auto& ms = *c.ms;
  const int nMax = c.nMax;
  const auto tr = uniform_ergodicity(ik, ms, nMax);
  const double gapRho = std::isfinite(gs.gapRatio) ? gs.gapRatio : tr.kappaFit();
  const int from = std::min(c.cfg.integer("ergodic.from", 5), nMax);
  ProgressiveReport pr;
  QuasiReport qe;
  KappaEquivalence ke;
  if (plan) {
    pr = progressive_rates(ik, ms, op, *plan, gapRho, 1, nMax);
    qe = quasi_ergodicity(*c.slab, gs, ms, op, *plan, 1, nMax);
    ke = kappa_equivalence(pr.e1, qe.qe, from, nMax);
  } else {
    pr.e1 = pr.envelope = qe.qe = std::vector<double>(nMax + 1, NAN);
  }
  json lp = json::array();
  for (double p : {2.0, 4.0}) {
    const auto r = lp_rates(ik, ms, op, plan, p, std::max(from, 2), nMax);
    lp.push_back({{"p", p}, {"fit", fit_json(r.fit)}, {"fit_inf", fit_json(r.fitInf)},
                  {"interpolation_violations", r.interpolationViolations}});
  }
  json j = {{"kappa_fit", finite(tr.kappaFit())},
            {"fit", fit_json(tr.fit)},
            {"geometric", tr.geometric()},
            {"min_q1", tr.minQ1},
            {"doeblin_factor", tr.doeblinFactor},
            {"doeblin_violations", tr.doeblinViolations},
            {"floor_from", tr.floorFrom},
            {"gap_rho", finite(gapRho)},
            {"progressive_C", finite(pr.Cmin)},
            {"window_exhausted", pr.windowExhausted},
            {"qe_fit", fit_json(qe.fit)},
            {"kappa_equivalence", {{"from", ke.from}, {"to", ke.to}, {"c", ke.c}, {"dropped", ke.dropped}}},
            {"lp", lp}};
  if (!plan) j["plan_error"] = c.planError;
  c.report["ergodic"] = j;
  write_json(c.out / "ergodic.json", j);
  std::ofstream f(c.out / "ergodic.csv");
  f << "n,e_inf,e_1,qe,envelope\n";
  for (int n = 1; n <= nMax; ++n)
    f << n << "," << num(tr.eInf[n]) << "," << num(pr.e1[n]) << "," << num(qe.qe[n]) << "," << num(pr.envelope[n])
      << "\n";
}

void stage_mc(Ctx& c) {
  auto& op = c.ensure_op();
  auto& slab = c.ensure_slab();
  const auto& sp = *c.model.space;
  const State x = parse_state(c.cfg.str("mc.x", "0"), sp.dimension());
  const State y = parse_state(c.cfg.str("mc.y", sp.dimension() == 1 ? "1" : "0"), sp.dimension());
  const int n = std::clamp(c.cfg.integer("mc.n", 5), 0, slab.nMax);
  McOptions mo;
  mo.paths = int64_t(c.cfg.num("mc.paths", 1e6));
  mo.seed = uint64_t(c.cfg.num("mc.seed", 1));
  mo.window = c.N;
  const int64_t ix = sp.index(x), iy = sp.index(y);
  if (ix >= op.size() || iy >= op.size()) throw ConfigError("mc.x and mc.y must lie in the truncation window");
  const auto fwd = c.timed("mc", [&] { return simulate_fk(*c.model.kernel, *c.model.potential, x, n, {y}, true, mo); });
  const auto dua = simulate_dual_fk(*c.model.kernel, *c.model.potential, x, n, {y}, false, mo);
  const double mat = slab.u(n, ix, iy) * op.mu(iy);
  const double matHat = slab.uhat(n, ix, iy) * op.mu(iy);
  double mass = 0.0;
  for (Eigen::Index j = 0; j < op.size(); ++j) mass += slab.u(n, ix, j) * op.mu(j);
  auto entry = [](const McEstimate& e, double m) {
    return json{{"target", e.target}, {"estimate", e.estimate}, {"std_error", e.stdError},
                {"lump_bias", e.lumpBias}, {"paths", e.paths}, {"seed", e.seed},
                {"matrix", m}, {"delta", e.estimate - m},
                {"within_3se", std::abs(e.estimate - m) <= 3.0 * e.stdError}};
  };
  json j = {{"x", x.str()}, {"y", y.str()}, {"n", n},
            {"forward", entry(fwd[0], mat)}, {"mass", entry(fwd[1], mass)}, {"dual", entry(dua[0], matHat)}};
  c.report["mc"] = j;
  write_json(c.out / "mc.json", j);
}

int run_table1(const RunOptions& opt, std::ostream& out) {
  Config cfg;
  if (!opt.configPath.empty()) cfg = Config::load(opt.configPath);
  const std::string cellName = !opt.cell.empty() ? opt.cell : cfg.str("iuc.cell", "");
  if (cellName.empty()) throw MissingKeys({"iuc.cell (or --cell)"});
  const Table1Cell cell = parse_cell(cellName);
  if (is_aiuc_cell(cell)) {
    out << "cell " << to_string(cell) << ": aIUC, trivial exhaustion\n";
    return kOk;
  }
  Table1Params p;
  p.beta = cfg.num("kernel.beta", p.beta);
  p.kappa = cfg.num("kernel.kappa", p.kappa);
  p.rho = cfg.num("potential.rho", p.rho);
  p.Ctilde = cfg.num("iuc.c_tilde", p.Ctilde);
  p.epsilon = cfg.num("iuc.epsilon", p.epsilon);
  const int n = opt.n > 0 ? opt.n : cfg.integer("iuc.n", 10);
  out << "n,k\n";
  for (int m = 1; m <= n; ++m) out << m << "," << table1_exhaustion(cell, p, m) << "\n";
  return kOk;
}

}  // namespace

int run(const RunOptions& opt, std::ostream& out, std::ostream& err) {
  static const std::vector<std::string> subs = {"audit", "spectral", "heatkernel", "iuc",
                                                "ergodic", "mc-validate", "table1", "full"};
  try {
    if (std::find(subs.begin(), subs.end(), opt.subcommand) == subs.end())
      throw ConfigError("unknown subcommand '" + opt.subcommand + "'");
    if (opt.subcommand == "table1") return run_table1(opt, out);
    if (opt.configPath.empty()) throw MissingKeys({"--config"});

    Ctx c;
    c.cfg = Config::load(opt.configPath);
    if (opt.trunc > 0) c.cfg.set("truncation.N", std::to_string(opt.trunc));
    if (opt.nmax > 0) c.cfg.set("heat.nmax", std::to_string(opt.nmax));
    if (opt.seed) c.cfg.set("mc.seed", std::to_string(*opt.seed));
    c.model = build_model(c.cfg);
    c.N = c.cfg.integer("truncation.N");
    c.M = c.cfg.integer("truncation.M", c.N / 2);
    c.nMax = c.cfg.integer("heat.nmax", 40);
    c.cfg.check();
    c.key = c.cfg.hash({"space.", "kernel.", "potential.", "truncation.", "heat.nmax", "tolerance."});
    c.out = !opt.outDir.empty() ? fs::path(opt.outDir) : fs::path(c.cfg.str("output.dir", "out"));
    fs::create_directories(c.out);
    c.log.open(c.out / "run.log", std::ios::app);
    c.note("run " + opt.subcommand + " config " + opt.configPath + " hash " + c.key);
    c.report["schema_version"] = 1;
    c.report["config_hash"] = c.key;
    c.report["subcommand"] = opt.subcommand;

    const bool ok = stage_audit(c, err);
    if (!ok && !opt.allowUnaudited) {
      write_json(c.out / "report.json", c.report);
      return kAuditFailed;
    }
    const std::string& s = opt.subcommand;
    const bool full = s == "full";
    if (s == "spectral" || full) stage_spectral(c);
    if (s == "heatkernel" || full) stage_heatkernel(c);
    if (s == "iuc" || full) stage_iuc(c);
    if (s == "ergodic" || full) stage_ergodic(c);
    if (s == "mc-validate" || full) stage_mc(c);
    write_json(c.out / "report.json", c.report);
    if (c.report.contains("iuc")) out << "classification: " << c.report["iuc"]["classification"]["label"].get<std::string>() << "\n";
    c.note("done");
    return kOk;
  } catch (const MissingKeys& e) {
    err << e.what() << "\n";
    return kMissingKeys;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kMissingKeys;
  } catch (const TruncationError& e) {
    err << "truncation failure: " << e.what() << "; try --trunc " << e.suggestedN << "\n";
    return kTruncation;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kError;
  }
}

}  // namespace fklab
