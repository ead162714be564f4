#pragma once

#include <string>
#include <vector>

#include "mdk/core/error.hpp"
#include "mdk/priors/priors.hpp"

namespace mdk {

/// Harmonic positional restraint (k/2) sum_i |w * (r_i - site_i)|^2, with `axes`
/// selecting which Cartesian components are restrained (1 on, 0 off).
/// Positions are compared without periodic wrapping.
inline CustomPrior harmonic_restraint(std::vector<Vec3> sites, double k, Vec3 axes = {1, 1, 1}) {
  if (!(k >= 0.0)) throw ConfigError("restraint constant must be non-negative");
  return CustomPrior{"harmonic_restraint", [sites = std::move(sites), k, axes](const System& system, const NeighborList&) {
                       if (system.real_size() != sites.size()) {
                         throw InputError("restraint has " + std::to_string(sites.size()) + " sites for " +
                                          std::to_string(system.real_size()) + " atoms");
                       }
                       EnergyForces out = EnergyForces::zeros(system);
                       for (std::size_t i = 0; i < sites.size(); ++i) {
                         Vec3 d = system.positions[i] - sites[i];
                         for (std::size_t c = 0; c < 3; ++c) d[c] *= axes[c];
                         const double e = 0.5 * k * norm2(d);
                         out.energy[static_cast<std::size_t>(system.batch[i])] += e;
                         (*out.per_atom_energy)[i] = e;
                         out.forces[i] = d * (-k);
                       }
                       return out;
                     }};
}

}  // namespace mdk
