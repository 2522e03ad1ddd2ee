#pragma once
#include <string>
#include <vector>

#include "fklab/space.hpp"

namespace fklab {

enum class ProfileKind { Log, Poly, Exp, Table };

// V(x) = W(alpha(x)) with W one of log^rho(1+n), n^rho, exp(rho n), or a table.
class Potential {
 public:
  Potential(SpacePtr space, ProfileKind kind, double rho, std::vector<double> table = {});

  double W(int n) const;
  double logW(int n) const;
  double V(const State& x) const { return W(space_->alpha(x)); }
  double logV(const State& x) const { return logW(space_->alpha(x)); }
  double lowerBound() const { return W(1); }
  ProfileKind kind() const { return kind_; }
  double rho() const { return rho_; }
  int tableRange() const { return int(table_.size()); }
  const StateSpace& space() const { return *space_; }
  std::string name() const;

 private:
  SpacePtr space_;
  ProfileKind kind_;
  double rho_;
  std::vector<double> table_;  // table_[n-1] = W(n)
};

Potential build_potential(SpacePtr space, ProfileKind kind, double rho);
Potential load_table_potential(SpacePtr space, const std::string& csvPath);
ProfileKind parse_profile_kind(const std::string& s);

// {x in B_{N*} : V(x) < M} with N* the least radius where W(N*) >= M
std::vector<State> confinement_level_set(const Potential& v, double M, int Nmax = 1'000'000);

}  // namespace fklab
