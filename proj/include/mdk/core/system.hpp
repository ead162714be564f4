#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "mdk/core/box.hpp"
#include "mdk/core/error.hpp"
#include "mdk/core/vec3.hpp"

namespace mdk {

/// A batch of atomic samples: positions (Angstrom), species codes (atomic
/// numbers), per-atom sample index, optional cell and optional partial charges.
///
/// The last `ghosts` atoms are static-shape placeholders appended by
/// `pad_static`; they belong to no sample and carry no energy.
struct System {
  std::vector<Vec3> positions;
  std::vector<int> species;
  std::vector<int> batch;
  Box box;
  std::optional<std::vector<double>> charges;
  std::size_t ghosts = 0;

  std::size_t size() const { return positions.size(); }
  std::size_t real_size() const { return positions.size() - ghosts; }

  /// Number of samples; batch codes are contiguous from 0.
  std::size_t num_samples() const {
    const std::size_t n = real_size();
    return n == 0 ? 0 : static_cast<std::size_t>(batch[n - 1]) + 1;
  }

  bool is_ghost(std::size_t i) const { return i >= real_size(); }
};

/// Validates and assembles a System. A missing batch vector means a single sample.
inline System build_system(std::vector<Vec3> positions, std::vector<int> species,
                           std::optional<std::vector<int>> batch = std::nullopt,
                           std::optional<Box> box = std::nullopt,
                           std::optional<std::vector<double>> charges = std::nullopt) {
  const std::size_t n = positions.size();
  if (n == 0) throw InputError("length mismatch: system needs at least one atom");
  if (species.size() != n) {
    throw InputError("length mismatch: " + std::to_string(species.size()) + " species for " +
                     std::to_string(n) + " positions");
  }
  if (batch && batch->size() != n) {
    throw InputError("length mismatch: " + std::to_string(batch->size()) +
                     " batch codes for " + std::to_string(n) + " positions");
  }
  if (charges && charges->size() != n) {
    throw InputError("length mismatch: " + std::to_string(charges->size()) +
                     " charges for " + std::to_string(n) + " positions");
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!is_finite(positions[i])) {
      throw InputError("non-finite position for atom " + std::to_string(i));
    }
    if (species[i] < 0) throw InputError("negative species code for atom " + std::to_string(i));
  }
  std::vector<int> codes = batch ? std::move(*batch) : std::vector<int>(n, 0);
  if (codes[0] != 0) throw InputError("non-contiguous batch: codes must start at 0");
  for (std::size_t i = 1; i < n; ++i) {
    const int step = codes[i] - codes[i - 1];
    if (step != 0 && step != 1) {
      throw InputError("non-contiguous batch: code " + std::to_string(codes[i]) +
                       " follows " + std::to_string(codes[i - 1]) + " at atom " +
                       std::to_string(i));
    }
  }
  Box cell = box.value_or(Box{});
  cell.validate();
  return System{std::move(positions), std::move(species), std::move(codes), cell,
                std::move(charges), 0};
}

}  // namespace mdk
