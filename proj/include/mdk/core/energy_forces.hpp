#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "mdk/core/system.hpp"
#include "mdk/core/vec3.hpp"

namespace mdk {

/// Per-sample energies (eV), per-atom forces (eV/Angstrom) and optionally
/// the per-atom energy decomposition.
struct EnergyForces {
  std::vector<double> energy;
  std::vector<Vec3> forces;
  std::optional<std::vector<double>> per_atom_energy;

  static EnergyForces zeros(const System& system, bool with_per_atom = true) {
    EnergyForces out;
    out.energy.assign(system.num_samples(), 0.0);
    out.forces.assign(system.size(), Vec3{});
    if (with_per_atom) out.per_atom_energy = std::vector<double>(system.size(), 0.0);
    return out;
  }

  /// Element-wise accumulation; per-atom energies survive only if both sides carry them.
  EnergyForces& operator+=(const EnergyForces& other) {
    for (std::size_t s = 0; s < energy.size() && s < other.energy.size(); ++s) {
      energy[s] += other.energy[s];
    }
    if (forces.empty()) {
      forces = other.forces;
    } else {
      for (std::size_t i = 0; i < forces.size() && i < other.forces.size(); ++i) {
        forces[i] += other.forces[i];
      }
    }
    if (per_atom_energy && other.per_atom_energy) {
      for (std::size_t i = 0; i < per_atom_energy->size(); ++i) {
        (*per_atom_energy)[i] += (*other.per_atom_energy)[i];
      }
    } else {
      per_atom_energy.reset();
    }
    return *this;
  }
};

}  // namespace mdk
