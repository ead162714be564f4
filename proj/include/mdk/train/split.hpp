#pragma once

#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "mdk/core/error.hpp"

namespace mdk {

struct SplitIndices {
  std::vector<std::size_t> train, val, test;
  friend bool operator==(const SplitIndices&, const SplitIndices&) = default;
};

/// Resolves a size given as a fraction (< 1) or an absolute count (integral >= 1).
inline std::size_t resolve_split_size(double size, std::size_t total, const char* what) {
  if (!(size >= 0.0) || !std::isfinite(size)) throw ConfigError(std::string(what) + " must be non-negative");
  if (size < 1.0) return static_cast<std::size_t>(std::llround(size * static_cast<double>(total)));
  if (size != std::floor(size)) {
    throw ConfigError(std::string(what) + " must be a fraction below 1 or a whole count, got " + std::to_string(size));
  }
  return static_cast<std::size_t>(size);
}

/// Seeded shuffle of 0..total-1 cut into train, val and the remainder as test.
inline SplitIndices split(std::size_t total, double train_size, double val_size, std::uint64_t seed) {
  const std::size_t ntrain = resolve_split_size(train_size, total, "train_size");
  const std::size_t nval = resolve_split_size(val_size, total, "val_size");
  if (ntrain + nval > total) {
    throw ConfigError("infeasible split: train " + std::to_string(ntrain) + " + val " + std::to_string(nval) +
                      " exceeds " + std::to_string(total) + " frames");
  }
  std::vector<std::size_t> order(total);
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(seed);
  for (std::size_t i = total; i > 1; --i) std::swap(order[i - 1], order[rng() % i]);
  SplitIndices out;
  out.train.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(ntrain));
  out.val.assign(order.begin() + static_cast<std::ptrdiff_t>(ntrain),
                 order.begin() + static_cast<std::ptrdiff_t>(ntrain + nval));
  out.test.assign(order.begin() + static_cast<std::ptrdiff_t>(ntrain + nval), order.end());
  return out;
}

}  // namespace mdk
