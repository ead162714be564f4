#pragma once

#include <chrono>
#include <cstdint>
#include <fstream>
#include <functional>
#include <string>
#include <vector>

#include "mdk/md/integrator.hpp"
#include "mdk/train/dataset.hpp"

namespace mdk {

struct Throughput {
  double msteps_per_day = 0.0;
  double ns_per_day = 0.0;
};

/// Million steps per day and ns/day. The ratio is formed from exact products so
/// that 1e6 steps in 86400 s at 1 fs gives exactly 1 ns/day.
inline Throughput throughput(double steps, double wall_seconds, double dt_fs) {
  if (!(wall_seconds > 0.0)) throw InputError("throughput needs a positive wall time");
  Throughput t;
  t.msteps_per_day = (steps * 86400.0) / (wall_seconds * 1.0e6);
  t.ns_per_day = t.msteps_per_day * dt_fs;
  return t;
}

struct Trajectory {
  std::uint64_t stride = 1;
  std::vector<std::vector<Vec3>> frames;
  std::vector<double> times;              // fs
  std::vector<double> potential_energies;  // eV
  std::vector<double> kinetic_energies;    // eV
  // Run metadata.
  LangevinParams params;
  std::uint64_t seed = 0;
  std::uint64_t steps = 0;

  friend bool operator==(const Trajectory&, const Trajectory&) = default;
};

struct SimulationResult {
  Trajectory trajectory;
  double wall_seconds = 0.0;
  Throughput rate;
};

/// Runs `steps` Langevin-middle steps, capturing the initial frame and every
/// `stride`-th one. `on_step` sees the state after each step.
inline SimulationResult run_simulation(MDState& state, const ComposedPotential& potential, std::uint64_t steps,
                                       const LangevinParams& params, std::uint64_t stride = 1,
                                       const std::function<void(const MDState&)>& on_step = {}) {
  if (stride < 1) throw ConfigError("trajectory stride must be >= 1");
  state.validate();
  if (state.forces.size() != state.size()) update_forces(state, potential);
  SimulationResult out;
  Trajectory& traj = out.trajectory;
  traj.stride = stride;
  traj.params = params;
  traj.seed = state.noise.seed;
  traj.steps = steps;
  const auto capture = [&] {
    traj.frames.push_back(state.system.positions);
    traj.times.push_back(state.time);
    traj.potential_energies.push_back(state.potential_energy);
    traj.kinetic_energies.push_back(kinetic_energy(state));
  };
  capture();
  const auto start = std::chrono::steady_clock::now();
  for (std::uint64_t k = 1; k <= steps; ++k) {
    langevin_middle_step(state, potential, params);
    if (on_step) on_step(state);
    if (k % stride == 0) capture();
  }
  out.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (steps > 0 && out.wall_seconds > 0.0) out.rate = throughput(static_cast<double>(steps), out.wall_seconds, params.dt);
  return out;
}

/// Multi-frame extended XYZ; each comment line carries time and kinetic energy
/// next to the potential energy.
inline void write_trajectory(std::ostream& os, const Trajectory& traj, const System& system) {
  for (std::size_t f = 0; f < traj.frames.size(); ++f) {
    Frame frame;
    frame.positions = traj.frames[f];
    frame.species = system.species;
    frame.energy = traj.potential_energies[f];
    frame.box = system.box;
    write_extxyz_frame(os, frame,
                       {{"time", detail::format_double(traj.times[f])},
                        {"kinetic_energy", detail::format_double(traj.kinetic_energies[f])}});
  }
}

/// Flat `key: value` sidecar describing the run.
inline void write_run_metadata(std::ostream& os, const SimulationResult& result, std::size_t atoms) {
  const Trajectory& t = result.trajectory;
  os << "atoms: " << atoms << '\n'
     << "steps: " << t.steps << '\n'
     << "stride: " << t.stride << '\n'
     << "frames: " << t.frames.size() << '\n'
     << "dt_fs: " << detail::format_double(t.params.dt) << '\n'
     << "temperature_K: " << detail::format_double(t.params.temperature) << '\n'
     << "friction_per_ps: " << detail::format_double(t.params.friction) << '\n'
     << "seed: " << t.seed << '\n'
     << "wall_seconds: " << detail::format_double(result.wall_seconds) << '\n'
     << "msteps_per_day: " << detail::format_double(result.rate.msteps_per_day) << '\n'
     << "ns_per_day: " << detail::format_double(result.rate.ns_per_day) << '\n';
}

}  // namespace mdk
