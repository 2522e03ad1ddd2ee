#include "fklab/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <queue>

#include "fklab/error.hpp"

namespace fklab {

double GroundState::phi0(Eigen::Index i) const { return std::exp(logPhi0(i)); }
double GroundState::phiHat0(Eigen::Index i) const { return std::exp(logPhiHat0(i)); }

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double logSumExp(const Eigen::VectorXd& v) {
  const double m = v.maxCoeff();
  if (!std::isfinite(m)) return m;
  return m + std::log((v.array() - m).exp().sum());
}

Eigen::MatrixXd scaled(const Eigen::MatrixXd& A, const Eigen::VectorXd& ls) {
  const Eigen::Index n = A.rows();
  Eigen::MatrixXd B(n, n);
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = 0; i < n; ++i) {
      const double a = A(i, j);
      B(i, j) = a > 0.0 ? std::exp(std::log(a) + ls(j) - ls(i)) : 0.0;
    }
  return B;
}

struct PowerResult {
  double lambda = 0.0;
  Eigen::VectorXd logv;
  int iterations = 0;
};

// Principal pair of a nonnegative matrix, vector returned in log form.
PowerResult powerPrincipal(const Eigen::MatrixXd& A, const Eigen::VectorXd& mu, double tol, int maxIter) {
  const Eigen::Index n = A.rows();
  Eigen::VectorXd ls = balance_scaling(A);
  PowerResult out;
  for (int round = 0; round < 6; ++round) {
    const Eigen::MatrixXd B = scaled(A, ls);
    Eigen::VectorXd v = Eigen::VectorXd::Ones(n) / std::sqrt(double(n));
    double lam = 0.0, prev = -1.0;
    bool done = false;
    for (int it = 0; it < maxIter; ++it) {
      Eigen::VectorXd w = B * v;
      lam = v.dot(w) / v.dot(v);
      const double res = (w - lam * v).norm() / v.norm();
      const double nw = w.norm();
      if (!(nw > 0.0) || !std::isfinite(nw)) throw NumericalError("power iteration lost the vector");
      v = w / nw;
      ++out.iterations;
      if (std::abs(lam - prev) < tol * lam && res < tol * lam) {
        done = true;
        break;
      }
      prev = lam;
    }
    if (!done) throw NumericalError("power iteration did not converge in " + std::to_string(maxIter) + " steps");
    if ((v.array() <= 0.0).any()) v = v.cwiseAbs();
    Eigen::VectorXd lv = v.array().log().matrix();
    if ((lv.array() == kNegInf).any()) {
      // absorb what we have and retry with a finer scaling
      for (Eigen::Index i = 0; i < n; ++i) lv(i) = std::max(lv(i), -600.0);
    }
    out.lambda = lam;
    out.logv = lv + ls;
    const double spread = lv.maxCoeff() - lv.minCoeff();
    if (spread < 50.0 && (v.array() > 0.0).all()) break;
    ls = out.logv;
  }
  const double lnorm = 0.5 * logSumExp((2.0 * out.logv.array() + mu.array().log()).matrix());
  out.logv.array() -= lnorm;
  return out;
}

double relResidual(const Eigen::MatrixXd& A, const Eigen::VectorXd& logv, const Eigen::VectorXd& mu, double lam) {
  // ||A phi - lam phi||_mu / ||phi||_mu evaluated in balanced coordinates
  const Eigen::MatrixXd B = scaled(A, logv);
  const Eigen::VectorXd one = Eigen::VectorXd::Ones(A.rows());
  const Eigen::VectorXd r = B * one - lam * one;
  Eigen::VectorXd terms(A.rows()), base(A.rows());
  for (Eigen::Index i = 0; i < A.rows(); ++i) {
    terms(i) = r(i) == 0.0 ? kNegInf : 2.0 * (logv(i) + std::log(std::abs(r(i)))) + std::log(mu(i));
    base(i) = 2.0 * logv(i) + std::log(mu(i));
  }
  const double lt = logSumExp(terms);
  if (lt == kNegInf) return 0.0;
  return std::exp(0.5 * (lt - logSumExp(base))) / lam;
}

}  // namespace

Eigen::VectorXd balance_scaling(const Eigen::MatrixXd& A) {
  const Eigen::Index n = A.rows();
  const double amax = A.maxCoeff();
  // dist(x) = min over paths x -> x0 of sum(log amax - log A); Dijkstra from x0 on reversed edges
  Eigen::VectorXd dist = Eigen::VectorXd::Constant(n, std::numeric_limits<double>::infinity());
  std::vector<char> done(n, 0);
  dist(0) = 0.0;
  for (Eigen::Index step = 0; step < n; ++step) {
    Eigen::Index u = -1;
    for (Eigen::Index i = 0; i < n; ++i)
      if (!done[i] && (u < 0 || dist(i) < dist(u))) u = i;
    if (u < 0 || !std::isfinite(dist(u))) break;
    done[u] = 1;
    for (Eigen::Index x = 0; x < n; ++x) {
      if (done[x]) continue;
      const double a = A(x, u);
      if (a <= 0.0) continue;
      const double c = std::log(amax) - std::log(a);
      if (dist(u) + c < dist(x)) dist(x) = dist(u) + c;
    }
  }
  Eigen::VectorXd ls(n);
  const double worst = dist.array().isFinite().select(dist, 0.0).maxCoeff();
  for (Eigen::Index i = 0; i < n; ++i) ls(i) = std::isfinite(dist(i)) ? -dist(i) : -worst - 50.0;
  return ls;
}

GroundState principal_eigs(const TruncatedOperator& op, const EigOptions& opt) {
  if (!(opt.tol > 0)) throw PreconditionError("tolerance must be positive");
  GroundState gs;
  auto f = powerPrincipal(op.U, op.mu, opt.tol, opt.maxIter);
  auto d = powerPrincipal(op.Uhat, op.mu, opt.tol, opt.maxIter);
  gs.lambda0 = f.lambda;
  gs.lambdaHat0 = d.lambda;
  gs.logPhi0 = f.logv;
  gs.logPhiHat0 = d.logv;
  gs.iterations = f.iterations;
  gs.iterationsHat = d.iterations;
  gs.residual = relResidual(op.U, gs.logPhi0, op.mu, gs.lambda0);
  gs.residualHat = relResidual(op.Uhat, gs.logPhiHat0, op.mu, gs.lambdaHat0);
  return gs;
}

ComparabilityReport ground_state_bounds(const TruncatedOperator& op, const GroundState& gs, int M) {
  ComparabilityReport rep;
  const Eigen::Index inner = op.ballCount(M);
  double lo1 = std::numeric_limits<double>::infinity(), hi1 = -lo1, lo2 = lo1, hi2 = -lo1;
  double hiA = -lo1, hiB = -lo1;
  for (Eigen::Index i = 0; i < inner; ++i) {
    const double Px = op.P(i, 0), Ph = op.Phat(i, 0);
    if (Px <= 0.0 || Ph <= 0.0) {
      rep.kernelVanishes = true;
      continue;
    }
    const double a = gs.logPhi0(i) + op.logV(i) - std::log(Px / op.mu(0));
    const double b = gs.logPhiHat0(i) - std::log(Ph / op.mu(0));
    lo1 = std::min(lo1, a);
    hi1 = std::max(hi1, a);
    lo2 = std::min(lo2, b);
    hi2 = std::max(hi2, b);
    hiA = std::max(hiA, gs.logPhi0(i) + op.logV(i) - std::log(Px));
    hiB = std::max(hiB, gs.logPhiHat0(i) - std::log(Ph));
  }
  if (rep.kernelVanishes) {
    rep.r1 = rep.r2 = rep.cUpper = std::numeric_limits<double>::infinity();
  } else {
    rep.r1 = std::exp(hi1 - lo1);
    rep.r2 = std::exp(hi2 - lo2);
    rep.cUpper = std::exp(hiA + hiB);
  }
  return rep;
}

double spectral_gap(const TruncatedOperator& op, GroundState& gs, const GapOptions& opt) {
  const Eigen::Index n = op.size();
  if (n < 2) throw PreconditionError("spectral gap needs at least two states");
  // balanced coordinates: A = S^{-1} U S with S = phi0; right vector 1, left vector S mu phihat0
  const Eigen::VectorXd ls = gs.logPhi0;
  const Eigen::MatrixXd A = scaled(op.U, ls);
  Eigen::VectorXd logLeft = ls + op.mu.array().log().matrix() + gs.logPhiHat0;
  logLeft.array() -= logLeft.maxCoeff();
  const Eigen::VectorXd left = logLeft.array().exp().matrix();
  const Eigen::VectorXd right = Eigen::VectorXd::Ones(n);
  const double denom = left.dot(right);
  auto project = [&](Eigen::VectorXd& v) { v -= right * (left.dot(v) / denom); };

  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = std::cos(1.0 + 0.7 * double(i)) + 0.1;
  project(v);
  v.normalize();
  double prev = -1.0, est = 0.0, pairPrev = -1.0;
  for (int it = 0; it < opt.maxIter; ++it) {
    Eigen::VectorXd w = A * v;
    project(w);
    const double rq = v.dot(w);
    const double res = (w - rq * v).norm();
    const double nw = w.norm();
    if (!(nw > 0.0)) return gs.gapRatio = 0.0;
    v = w / nw;
    if (std::abs(std::abs(rq) - prev) < opt.tol * gs.lambda0 && res < opt.tol * gs.lambda0) {
      est = std::abs(rq);
      return gs.gapRatio = est / gs.lambda0;
    }
    prev = std::abs(rq);
    // complex or +- pair: A^2 v = s A v - p v on the settled plane, |lambda_1| = sqrt|p|
    if (it >= 50 && it % 25 == 0) {
      Eigen::VectorXd w1 = A * v;
      project(w1);
      Eigen::VectorXd w2 = A * w1;
      project(w2);
      Eigen::MatrixXd B(n, 2);
      B.col(0) = w1;
      B.col(1) = -v;
      const Eigen::Vector2d sp = B.colPivHouseholderQr().solve(w2);
      const double fitRes = (B * sp - w2).norm() / std::max(w2.norm(), 1e-300);
      const bool complexPair = sp(1) > 0.0 && sp(0) * sp(0) < 4.0 * sp(1);
      const bool signPair = sp(1) < 0.0 && std::abs(sp(0)) < 1e-6 * std::sqrt(-sp(1));
      if ((complexPair || signPair) && fitRes < 1e-9) {
        const double m = std::sqrt(std::abs(sp(1)));
        if (std::abs(m - pairPrev) < opt.tol * gs.lambda0) return gs.gapRatio = m / gs.lambda0;
        pairPrev = m;
      }
    }
  }
  throw NumericalError("deflated iteration did not settle");
}

}  // namespace fklab
