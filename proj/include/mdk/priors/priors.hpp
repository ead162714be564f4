#pragma once

#include <cmath>
#include <functional>
#include <map>
#include <string>
#include <variant>
#include <vector>

#include "mdk/core/energy_forces.hpp"
#include "mdk/core/error.hpp"
#include "mdk/core/system.hpp"
#include "mdk/core/units.hpp"
#include "mdk/model/radial.hpp"
#include "mdk/neighbors/neighbor_list.hpp"

namespace mdk {

/// Per-element reference energies (eV). When learnable, the trainer owns
/// the table as a parameter.
struct Atomref {
  std::map<int, double> table;
  bool learnable = false;
};

/// Coulomb interaction k_e q_i q_j S(d)/d with S(d) = (1 - cos(pi d / r_s))/2
/// below the switch radius r_s and 1 beyond it.
struct Coulomb {
  double switch_radius = 1.0;
};

struct D2Element {
  double c6;      // eV Angstrom^6
  double radius;  // van der Waals radius, Angstrom
};

/// DFT-D2 C6 coefficients (J nm^6 mol^-1) and van der Waals radii
/// (Angstrom) for H, C, N, O, F, S, Cl, converted to eV Angstrom^6.
inline std::map<int, D2Element> default_d2_table() {
  const double k = units::j_nm6_per_mol;
  return {
      {1, {0.14 * k, 1.001}},  {6, {1.75 * k, 1.452}},  {7, {1.23 * k, 1.397}},
      {8, {0.70 * k, 1.342}},  {9, {0.75 * k, 1.287}},  {16, {5.57 * k, 1.683}},
      {17, {5.07 * k, 1.639}},
  };
}

/// Damped dispersion -s6 C6_ij / d^6 f(d), f(d) = 1/(1 + exp(-d_steep (d/(R_i + R_j) - 1))),
/// times the cosine envelope at the neighbor cutoff.
struct D2 {
  double s6 = 0.75;
  double d_steep = 20.0;
  std::map<int, D2Element> elements = default_d2_table();
};

/// Ziegler-Biersack-Littmark universal screened nuclear repulsion, times the
/// cosine envelope at the neighbor cutoff.
struct ZBL {};

/// User-supplied energy term.
struct CustomPrior {
  std::string name;
  std::function<EnergyForces(const System&, const NeighborList&)> evaluate;
};

using PriorTerm = std::variant<Atomref, Coulomb, D2, ZBL, CustomPrior>;

struct PriorStack {
  std::vector<PriorTerm> terms;

  bool empty() const { return terms.empty(); }
};

inline std::string prior_name(const PriorTerm& term) {
  struct {
    std::string operator()(const Atomref&) const { return "Atomref"; }
    std::string operator()(const Coulomb&) const { return "Coulomb"; }
    std::string operator()(const D2&) const { return "D2"; }
    std::string operator()(const ZBL&) const { return "ZBL"; }
    std::string operator()(const CustomPrior& c) const { return c.name; }
  } visitor;
  return std::visit(visitor, term);
}

namespace detail {

/// Accumulates a pair energy e(d) with slope de/dd over every unordered pair of
/// the list, splitting energy evenly between the two atoms.
template <typename PairTerm>
EnergyForces accumulate_pairs(const System& system, const NeighborList& list, PairTerm&& term) {
  EnergyForces out = EnergyForces::zeros(system);
  auto& per_atom = *out.per_atom_energy;
  for (std::size_t k = 0; k < list.capacity(); ++k) {
    if (!list.occupied(k)) continue;
    const auto [pi, pj] = list.pairs[k];
    if (pi == pj || (list.full_list && pi > pj)) continue;
    const auto i = static_cast<std::size_t>(pi);
    const auto j = static_cast<std::size_t>(pj);
    const double d = list.distances[k];
    const ValueSlope e = term(i, j, d);
    if (e.value == 0.0 && e.slope == 0.0) continue;
    per_atom[i] += 0.5 * e.value;
    per_atom[j] += 0.5 * e.value;
    out.energy[static_cast<std::size_t>(system.batch[i])] += e.value;
    const Vec3 f = list.deltas[k] * (e.slope / d);
    out.forces[i] -= f;
    out.forces[j] += f;
  }
  return out;
}

inline double zbl_screening(double x, double* slope) {
  static constexpr double c[4] = {0.18175, 0.50986, 0.28022, 0.02817};
  static constexpr double a[4] = {3.19980, 0.94229, 0.40290, 0.20162};
  double v = 0.0, s = 0.0;
  for (int t = 0; t < 4; ++t) {
    const double e = c[t] * std::exp(-a[t] * x);
    v += e;
    s -= a[t] * e;
  }
  *slope = s;
  return v;
}

}  // namespace detail

/// Per-atom reference energies; forces are identically zero.
inline EnergyForces prior_atomref(const System& system, const Atomref& atomref) {
  EnergyForces out = EnergyForces::zeros(system);
  for (std::size_t i = 0; i < system.real_size(); ++i) {
    const auto it = atomref.table.find(system.species[i]);
    if (it == atomref.table.end()) {
      throw InputError("missing reference for element " + std::to_string(system.species[i]));
    }
    (*out.per_atom_energy)[i] = it->second;
    out.energy[static_cast<std::size_t>(system.batch[i])] += it->second;
  }
  return out;
}

/// d E / d table[z] for sum_s upstream[s] * E_s: the weighted element counts.
inline std::map<int, double> atomref_gradient(const System& system, const std::vector<double>& upstream) {
  std::map<int, double> grad;
  for (std::size_t i = 0; i < system.real_size(); ++i) {
    grad[system.species[i]] += upstream[static_cast<std::size_t>(system.batch[i])];
  }
  return grad;
}

inline EnergyForces prior_coulomb(const System& system, const NeighborList& list, const Coulomb& coulomb) {
  if (!system.charges) throw InputError("Coulomb prior requires per-atom partial charges");
  if (!(coulomb.switch_radius > 0.0)) throw ConfigError("Coulomb switch radius must be positive");
  const auto& q = *system.charges;
  const double rs = coulomb.switch_radius;
  return detail::accumulate_pairs(system, list, [&](std::size_t i, std::size_t j, double d) -> ValueSlope {
    const double qq = units::coulomb * q[i] * q[j];
    if (qq == 0.0) return {0.0, 0.0};
    if (d >= rs) return {qq / d, -qq / (d * d)};
    const double theta = units::pi * d / rs;
    const double s = 0.5 * (1.0 - std::cos(theta));
    const double ds = 0.5 * std::sin(theta) * units::pi / rs;
    return {qq * s / d, qq * (ds / d - s / (d * d))};
  });
}

inline EnergyForces prior_zbl(const System& system, const NeighborList& list, const ZBL& = {}) {
  for (std::size_t i = 0; i < system.real_size(); ++i) {
    if (system.species[i] <= 0) {
      throw InputError("ZBL prior requires atomic numbers >= 1; atom " + std::to_string(i) + " has " +
                       std::to_string(system.species[i]));
    }
  }
  const double ru = list.cutoff_upper;
  return detail::accumulate_pairs(system, list, [&](std::size_t i, std::size_t j, double d) -> ValueSlope {
    const double zi = system.species[i];
    const double zj = system.species[j];
    const double a = 0.8854 * units::bohr / (std::pow(zi, 0.23) + std::pow(zj, 0.23));
    double dphi = 0.0;
    const double phi = detail::zbl_screening(d / a, &dphi);
    dphi /= a;
    const ValueSlope env = cosine_cutoff_with_slope(d, 0.0, ru);
    const double c = units::coulomb * zi * zj;
    const double bare = c / d;
    const double dbare = -c / (d * d);
    return {bare * phi * env.value,
            dbare * phi * env.value + bare * dphi * env.value + bare * phi * env.slope};
  });
}

inline EnergyForces prior_d2(const System& system, const NeighborList& list, const D2& d2) {
  for (std::size_t i = 0; i < system.real_size(); ++i) {
    if (!d2.elements.contains(system.species[i])) {
      throw InputError("D2 prior has no parameters for element " + std::to_string(system.species[i]));
    }
  }
  const double ru = list.cutoff_upper;
  return detail::accumulate_pairs(system, list, [&](std::size_t i, std::size_t j, double d) -> ValueSlope {
    const D2Element& ei = d2.elements.at(system.species[i]);
    const D2Element& ej = d2.elements.at(system.species[j]);
    const double c6 = std::sqrt(ei.c6 * ej.c6);
    const double r0 = ei.radius + ej.radius;
    const double ex = std::exp(-d2.d_steep * (d / r0 - 1.0));
    const double damp = 1.0 / (1.0 + ex);
    const double ddamp = damp * damp * ex * d2.d_steep / r0;
    const double d6 = std::pow(d, 6);
    const double disp = -d2.s6 * c6 / d6;
    const double ddisp = 6.0 * d2.s6 * c6 / (d6 * d);
    const ValueSlope env = cosine_cutoff_with_slope(d, 0.0, ru);
    return {disp * damp * env.value,
            ddisp * damp * env.value + disp * ddamp * env.value + disp * damp * env.slope};
  });
}

inline EnergyForces evaluate_prior(const System& system, const NeighborList& list, const PriorTerm& term) {
  struct {
    const System& system;
    const NeighborList& list;
    EnergyForces operator()(const Atomref& t) const { return prior_atomref(system, t); }
    EnergyForces operator()(const Coulomb& t) const { return prior_coulomb(system, list, t); }
    EnergyForces operator()(const D2& t) const { return prior_d2(system, list, t); }
    EnergyForces operator()(const ZBL& t) const { return prior_zbl(system, list, t); }
    EnergyForces operator()(const CustomPrior& t) const { return t.evaluate(system, list); }
  } visitor{system, list};
  return std::visit(visitor, term);
}

/// Element-wise sum over the stack; an empty stack gives zeros.
inline EnergyForces evaluate_prior_stack(const System& system, const NeighborList& list, const PriorStack& stack) {
  EnergyForces total = EnergyForces::zeros(system);
  for (const auto& term : stack.terms) total += evaluate_prior(system, list, term);
  return total;
}

}  // namespace mdk
