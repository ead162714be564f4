#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "mdk/model/tensor.hpp"
#include "mdk/priors/priors.hpp"
#include "mdk/train/dataset.hpp"

namespace mdk {

/// Randomly oriented dimers labelled with a prior term: distances uniform on
/// [d_min, d_max], energies and forces from `term` with the given cutoff.
inline Dataset make_dimer_dataset(std::size_t frames, int zi, int zj, double d_min, double d_max,
                                  const PriorTerm& term, double cutoff, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  Dataset data;
  data.source = "synthetic dimer";
  NeighborSpec spec;
  spec.cutoff_upper = cutoff;
  spec.capacity = 1;
  spec.strategy = Strategy::brute;
  spec.threads = 1;
  for (std::size_t t = 0; t < frames; ++t) {
    const double d = d_min + (d_max - d_min) * uniform01(rng);
    // Uniform direction on the sphere.
    const double cz = 2.0 * uniform01(rng) - 1.0;
    const double phi = 2.0 * units::pi * uniform01(rng);
    const double sz = std::sqrt(1.0 - cz * cz);
    const Vec3 u{sz * std::cos(phi), sz * std::sin(phi), cz};
    const Vec3 center{uniform01(rng), uniform01(rng), uniform01(rng)};
    Frame f;
    f.positions = {center + u * (0.5 * d), center - u * (0.5 * d)};
    f.species = {zi, zj};
    const System s = build_system(f.positions, f.species);
    const EnergyForces ef = evaluate_prior(s, build_neighbor_list(s, spec), term);
    f.energy = ef.energy[0];
    f.forces = ef.forces;
    data.frames.push_back(std::move(f));
  }
  return data;
}

}  // namespace mdk
