#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mdk/core/elements.hpp"
#include "mdk/core/error.hpp"
#include "mdk/core/units.hpp"
#include "mdk/md/rng.hpp"
#include "mdk/model/potential.hpp"

namespace mdk {

/// Dynamical state: positions live in `system`; velocities in Angstrom/fs,
/// masses in amu, time in fs. Forces and potential energy are cached for the
/// current positions.
struct MDState {
  System system;
  std::vector<Vec3> velocities;
  std::vector<double> masses;
  double time = 0.0;
  std::uint64_t step = 0;
  GaussianStream noise;
  std::size_t capacity = 0;  // neighbor capacity, grown on overflow
  std::vector<Vec3> forces;
  double potential_energy = 0.0;

  std::size_t size() const { return system.size(); }

  void validate() const {
    const std::size_t n = system.size();
    if (velocities.size() != n || masses.size() != n) {
      throw InputError("length mismatch: MD state has " + std::to_string(n) + " atoms, " +
                       std::to_string(velocities.size()) + " velocities, " + std::to_string(masses.size()) +
                       " masses");
    }
    for (std::size_t i = 0; i < n; ++i) {
      if (!(masses[i] > 0.0)) throw InputError("mass of atom " + std::to_string(i) + " must be positive");
    }
  }
};

inline std::vector<double> masses_for(const std::vector<int>& species) {
  std::vector<double> m(species.size());
  for (std::size_t i = 0; i < species.size(); ++i) m[i] = atomic_mass(species[i]);
  return m;
}

/// Kinetic energy in eV.
inline double kinetic_energy(const MDState& s) {
  double twice = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) twice += s.masses[i] * norm2(s.velocities[i]);
  return 0.5 * twice / units::accel;
}

/// Kinetic energy of the on-step velocities v + dt F / (2 m). The stored
/// velocities lag the positions by half a step; without friction this equals
/// the velocity Verlet kinetic energy and conserves energy to O(dt^2).
inline double synchronous_kinetic_energy(const MDState& s, double dt) {
  double twice = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    twice += s.masses[i] * norm2(s.velocities[i] + s.forces[i] * (0.5 * dt * units::accel / s.masses[i]));
  }
  return 0.5 * twice / units::accel;
}

/// Instantaneous kinetic temperature over 3N degrees of freedom.
inline double kinetic_temperature(const MDState& s) {
  return 2.0 * kinetic_energy(s) / (3.0 * static_cast<double>(s.size()) * units::boltzmann);
}

/// Recomputes the cached forces and energy at the current positions.
inline void update_forces(MDState& s, const ComposedPotential& potential) {
  if (!potential.derivative) throw ConfigError("molecular dynamics needs a potential with derivative enabled");
  NeighborSpec spec = potential.neighbor_spec(s.size());
  spec.threads = 1;
  if (s.capacity > 0) spec.capacity = s.capacity;
  NeighborList list;
  try {
    list = build_neighbor_list(s.system, spec);
  } catch (const OverflowError& e) {
    spec.capacity = 2 * e.required();
    list = build_neighbor_list(s.system, spec);
  }
  s.capacity = spec.capacity;
  EnergyForces ef = evaluate(potential, s.system, list);
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (!is_finite(ef.forces[i])) {
      throw NumericError("non-finite force on atom " + std::to_string(i) + " at step " + std::to_string(s.step));
    }
  }
  s.potential_energy = 0.0;
  for (const double e : ef.energy) s.potential_energy += e;
  s.forces = std::move(ef.forces);
}

/// Builds a state with velocities drawn from Maxwell-Boltzmann at `temperature` K
/// (zero velocities for temperature 0) and evaluates the initial forces.
inline MDState make_state(System system, const ComposedPotential& potential, double temperature, std::uint64_t seed,
                          std::optional<std::vector<double>> masses = std::nullopt) {
  MDState s;
  s.masses = masses ? std::move(*masses) : masses_for(system.species);
  s.velocities.assign(system.size(), Vec3{});
  s.system = std::move(system);
  s.noise = GaussianStream{seed, 0};
  s.validate();
  if (temperature < 0.0) throw ConfigError("temperature must be non-negative");
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double sigma = std::sqrt(units::boltzmann * temperature * units::accel / s.masses[i]);
    for (std::size_t d = 0; d < 3; ++d) s.velocities[i][d] = sigma * s.noise.next();
  }
  update_forces(s, potential);
  return s;
}

struct LangevinParams {
  double dt = 1.0;              // fs
  double temperature = 298.5;   // K
  double friction = 1.0;        // 1/ps

  friend bool operator==(const LangevinParams&, const LangevinParams&) = default;
};

/// One Langevin-middle step: full kick with the cached forces, half drift,
/// Ornstein-Uhlenbeck velocity update, half drift, then new forces.
inline void langevin_middle_step(MDState& s, const ComposedPotential& potential, const LangevinParams& p) {
  if (!(p.dt > 0.0)) throw ConfigError("time step must be positive");
  if (p.friction < 0.0 || p.temperature < 0.0) throw ConfigError("friction and temperature must be non-negative");
  if (s.forces.size() != s.size()) update_forces(s, potential);
  const double c1 = std::exp(-p.friction * units::per_ps * p.dt);
  const double c2 = std::sqrt(1.0 - c1 * c1);
  const double kt = units::boltzmann * p.temperature * units::accel;
  const double half = 0.5 * p.dt;
  for (std::size_t i = 0; i < s.size(); ++i) {
    Vec3& v = s.velocities[i];
    v += s.forces[i] * (p.dt * units::accel / s.masses[i]);
    s.system.positions[i] += v * half;
    if (c2 > 0.0) {
      const double sigma = c2 * std::sqrt(kt / s.masses[i]);
      for (std::size_t d = 0; d < 3; ++d) v[d] = c1 * v[d] + sigma * s.noise.next();
    }
    s.system.positions[i] += v * half;
  }
  ++s.step;
  s.time += p.dt;
  update_forces(s, potential);
}

}  // namespace mdk
