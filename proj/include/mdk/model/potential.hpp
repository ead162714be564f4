#pragma once

#include <optional>
#include <string>

#include "mdk/core/energy_forces.hpp"
#include "mdk/core/error.hpp"
#include "mdk/model/graph_network.hpp"
#include "mdk/neighbors/neighbor_list.hpp"
#include "mdk/priors/priors.hpp"

namespace mdk {

/// Representation + output model packaged with its hyperparameters.
struct GraphModel {
  GNConfig config;
  GNParams params;
};

/// Network (optional) plus prior stack. Produces per-sample energies and,
/// when `derivative` is set, forces as the negative position gradient.
struct ComposedPotential {
  std::optional<GraphModel> network;
  PriorStack priors;
  bool derivative = true;
  /// Neighbor cutoffs for a priors-only potential; a network's config wins otherwise.
  double cutoff_upper = 5.0;
  double cutoff_lower = 0.0;

  double upper() const { return network ? network->config.cutoff_upper : cutoff_upper; }
  double lower() const { return network ? network->config.cutoff_lower : cutoff_lower; }

  /// The neighbor specification this potential expects for a system of `atoms` atoms.
  NeighborSpec neighbor_spec(std::size_t atoms, std::size_t max_num_neighbors = 64) const {
    NeighborSpec spec;
    spec.cutoff_upper = upper();
    spec.cutoff_lower = lower();
    spec.full_list = network.has_value();
    spec.capacity = NeighborSpec::capacity_for(atoms, max_num_neighbors);
    return spec;
  }
};

inline EnergyForces evaluate(const ComposedPotential& potential, const System& system, const NeighborList& neighbors) {
  if (!potential.network && potential.priors.empty()) throw ConfigError("empty potential: no network and no priors");
  if (neighbors.cutoff_upper != potential.upper() || neighbors.cutoff_lower != potential.lower()) {
    throw InputError("cutoff mismatch between potential and neighbor list");
  }
  EnergyForces total = EnergyForces::zeros(system);
  if (potential.network) {
    const auto& net = *potential.network;
    total += graph_energy_forces(net.params, net.config, system, neighbors, potential.derivative);
  }
  if (!potential.priors.empty()) total += evaluate_prior_stack(system, neighbors, potential.priors);
  if (!potential.derivative) total.forces.clear();
  return total;
}

/// Convenience: builds the neighbor list with the potential's spec, growing
/// capacity once on overflow, then evaluates.
inline EnergyForces evaluate(const ComposedPotential& potential, const System& system, NeighborSpec spec) {
  NeighborList list;
  try {
    list = build_neighbor_list(system, spec);
  } catch (const OverflowError& e) {
    spec.capacity = e.required();
    list = build_neighbor_list(system, spec);
  }
  return evaluate(potential, system, list);
}

}  // namespace mdk
