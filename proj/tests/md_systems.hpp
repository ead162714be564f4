#pragma once

// Toy systems shared by the MD tests and the acceptance runner.

#include <vector>

#include "mdk/md/restraint.hpp"
#include "mdk/md/simulation.hpp"

namespace mdk::toy {

struct Setup {
  System system;
  ComposedPotential potential;
};

/// Eight-atom charged C/O cube bound by D2 + Coulomb with ZBL repulsion, relaxed
/// to a minimum. Open boundaries and a 20 A cutoff keep every pair inside the
/// cutoff and beyond the Coulomb switch radius.
inline Setup nve_cluster() {
  std::vector<Vec3> pos;
  std::vector<int> z;
  std::vector<double> q;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int k = 0; k < 2; ++k) {
        const bool odd = (i + j + k) % 2;
        pos.push_back({2.6 * i, 2.6 * j, 2.6 * k});
        z.push_back(odd ? 6 : 8);
        q.push_back(odd ? 0.3 : -0.3);
      }
  Setup s{build_system(pos, z, std::nullopt, std::nullopt, q), {}};
  s.potential.priors.terms = {D2{}, Coulomb{1.0}, ZBL{}};
  s.potential.cutoff_upper = 20.0;
  MDState relax = make_state(s.system, s.potential, 0.0, 1);
  run_simulation(relax, s.potential, 3000, LangevinParams{1.0, 0.0, 50.0}, 3000);
  s.system = relax.system;
  return s;
}

/// 64 C/O atoms on a periodic 4x4x4 lattice, each tethered to its site and
/// coupled to the others through D2.
inline Setup tethered_lattice() {
  std::vector<Vec3> pos;
  std::vector<int> z;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      for (int k = 0; k < 4; ++k) {
        pos.push_back({3.5 * i, 3.5 * j, 3.5 * k});
        z.push_back((i + j + k) % 2 ? 6 : 8);
      }
  Setup s{build_system(pos, z, std::nullopt, Box::orthorhombic(14, 14, 14)), {}};
  s.potential.priors.terms = {harmonic_restraint(pos, 2.0), D2{}};
  s.potential.cutoff_upper = 6.0;
  return s;
}

}  // namespace mdk::toy
