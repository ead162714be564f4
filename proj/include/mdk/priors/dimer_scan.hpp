#pragma once

#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "mdk/neighbors/neighbor_list.hpp"
#include "mdk/priors/priors.hpp"

namespace mdk {

struct PairEnergyProfile {
  std::vector<double> distances;
  std::vector<double> energies;
};

/// Single-term energy of an isolated pair at each distance in (0, cutoff_upper].
inline PairEnergyProfile dimer_scan(const PriorTerm& term, int zi, int zj, std::optional<double> qi,
                                    std::optional<double> qj, const std::vector<double>& distances,
                                    double cutoff_upper) {
  PairEnergyProfile profile;
  for (std::size_t k = 0; k < distances.size(); ++k) {
    const double d = distances[k];
    if (!(d > 0.0) || d > cutoff_upper) {
      throw InputError("dimer scan distance " + std::to_string(d) + " outside (0, " +
                       std::to_string(cutoff_upper) + "]");
    }
    if (k > 0 && !(d > distances[k - 1])) throw InputError("dimer scan distances must be strictly increasing");
  }
  std::optional<std::vector<double>> charges;
  if (qi || qj) charges = std::vector<double>{qi.value_or(0.0), qj.value_or(0.0)};
  NeighborSpec spec;
  spec.cutoff_upper = cutoff_upper;
  spec.capacity = 1;
  spec.strategy = Strategy::brute;
  spec.threads = 1;
  for (const double d : distances) {
    const System system = build_system({Vec3{d, 0, 0}, Vec3{0, 0, 0}}, {zi, zj}, std::nullopt, std::nullopt, charges);
    const NeighborList list = build_neighbor_list(system, spec);
    profile.distances.push_back(d);
    profile.energies.push_back(evaluate_prior(system, list, term).energy[0]);
  }
  return profile;
}

inline void write_profile_csv(std::ostream& os, const PairEnergyProfile& profile) {
  os << "distance_angstrom,energy_ev\n";
  os.precision(17);
  for (std::size_t k = 0; k < profile.distances.size(); ++k) {
    os << profile.distances[k] << ',' << profile.energies[k] << '\n';
  }
}

}  // namespace mdk
