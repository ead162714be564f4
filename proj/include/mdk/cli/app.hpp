#pragma once

#include <set>
#include <string>

#include "mdk/cli/config.hpp"
#include "mdk/train/container.hpp"
#include "mdk/train/dataset.hpp"

namespace mdk {

inline bool has_xyz_extension(const std::string& path) {
  const auto dot = path.rfind('.');
  if (dot == std::string::npos) return false;
  const std::string ext = path.substr(dot);
  return ext == ".xyz" || ext == ".extxyz";
}

/// Extended XYZ by extension (.xyz, .extxyz), the binary container otherwise.
inline Dataset load_dataset(const std::string& path, bool require_energy = true) {
  if (path.empty()) throw ConfigError("no dataset given (positional path or `dataset:` key)");
  return has_xyz_extension(path) ? load_extxyz(path, require_energy) : load_binary_container(path);
}

/// Prior stack named by `prior_model`. Atomref starts at zero for every
/// species in `species` and is learnable.
inline PriorStack build_priors(const PriorConfig& config, const std::set<int>& species = {}) {
  PriorStack stack;
  for (const auto& name : config.prior_model) {
    if (name == "Atomref") {
      Atomref a;
      for (const int z : species) a.table[z] = 0.0;
      a.learnable = true;
      stack.terms.push_back(a);
    } else if (name == "Coulomb") {
      stack.terms.push_back(Coulomb{config.coulomb_switch_radius});
    } else if (name == "D2") {
      D2 d2;
      d2.s6 = config.d2_s6;
      stack.terms.push_back(d2);
    } else if (name == "ZBL") {
      stack.terms.push_back(ZBL{});
    } else {
      throw ConfigError("unknown prior '" + name + "' (expected Atomref, Coulomb, D2 or ZBL)");
    }
  }
  return stack;
}

inline std::set<int> species_of(const Dataset& data) {
  std::set<int> out;
  for (const auto& f : data.frames) out.insert(f.species.begin(), f.species.end());
  return out;
}

inline System frame_system(const Frame& frame) {
  return build_system(frame.positions, frame.species, std::nullopt, frame.box);
}

}  // namespace mdk
