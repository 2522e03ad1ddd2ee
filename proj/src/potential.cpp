#include "fklab/potential.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "fklab/error.hpp"

namespace fklab {

Potential::Potential(SpacePtr space, ProfileKind kind, double rho, std::vector<double> table)
    : space_(std::move(space)), kind_(kind), rho_(rho), table_(std::move(table)) {
  if (kind_ != ProfileKind::Table && !(rho_ > 0)) throw ConfigError("potential exponent rho must be positive");
  if (kind_ == ProfileKind::Table) {
    if (table_.empty()) throw ConfigError("empty potential table");
    for (size_t i = 0; i < table_.size(); ++i) {
      if (!(table_[i] > 0)) throw ConfigError("potential table values must be positive");
      if (i && table_[i] < table_[i - 1]) throw ConfigError("potential table must be nondecreasing");
    }
  }
}

double Potential::W(int n) const {
  switch (kind_) {
    case ProfileKind::Log: return std::pow(std::log1p(double(n)), rho_);
    case ProfileKind::Poly: return std::pow(double(n), rho_);
    case ProfileKind::Exp: return std::exp(rho_ * n);
    case ProfileKind::Table:
      if (n < 1 || n > int(table_.size()))
        throw ResourceError("potential table has no entry for n = " + std::to_string(n));
      return table_[n - 1];
  }
  return 1.0;
}

double Potential::logW(int n) const {
  switch (kind_) {
    case ProfileKind::Log: return rho_ * std::log(std::log1p(double(n)));
    case ProfileKind::Poly: return rho_ * std::log(double(n));
    case ProfileKind::Exp: return rho_ * n;
    case ProfileKind::Table: return std::log(W(n));
  }
  return 0.0;
}

std::string Potential::name() const {
  std::ostringstream os;
  switch (kind_) {
    case ProfileKind::Log: os << "log^" << rho_ << "(1+n)"; break;
    case ProfileKind::Poly: os << "n^" << rho_; break;
    case ProfileKind::Exp: os << "exp(" << rho_ << "n)"; break;
    case ProfileKind::Table: os << "table[" << table_.size() << "]"; break;
  }
  return os.str();
}

Potential build_potential(SpacePtr space, ProfileKind kind, double rho) {
  if (kind == ProfileKind::Table) throw ConfigError("table potentials are loaded with load_table_potential");
  return Potential(std::move(space), kind, rho);
}

Potential load_table_potential(SpacePtr space, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read potential table " + path);
  std::vector<double> w;
  std::string line;
  int expect = 1;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#' || line[0] == 'n') continue;
    std::istringstream ls(line);
    int n;
    char comma;
    double v;
    if (!(ls >> n >> comma >> v) || comma != ',') throw ConfigError("bad potential table row: " + line);
    if (n != expect++) throw ConfigError("potential table rows must be n = 1, 2, ...");
    w.push_back(v);
  }
  return Potential(std::move(space), ProfileKind::Table, 1.0, std::move(w));
}

ProfileKind parse_profile_kind(const std::string& s) {
  if (s == "log") return ProfileKind::Log;
  if (s == "poly") return ProfileKind::Poly;
  if (s == "exp") return ProfileKind::Exp;
  if (s == "table") return ProfileKind::Table;
  throw ConfigError("unknown potential.kind '" + s + "'");
}

std::vector<State> confinement_level_set(const Potential& v, double M, int Nmax) {
  if (M <= v.lowerBound()) throw PreconditionError("level M must exceed V_-");
  int Nstar = 1;
  const int cap = v.kind() == ProfileKind::Table ? std::min(Nmax, v.tableRange()) : Nmax;
  while (Nstar <= cap && v.W(Nstar) < M) ++Nstar;
  if (Nstar > cap) throw ResourceError("level " + std::to_string(M) + " not reached within N_max");
  std::vector<State> out;
  for (const auto& x : v.space().window(Nstar))
    if (v.V(x) < M) out.push_back(x);
  return out;
}

}  // namespace fklab
