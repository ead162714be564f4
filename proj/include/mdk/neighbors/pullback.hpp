#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mdk/core/error.hpp"
#include "mdk/neighbors/neighbor_list.hpp"

namespace mdk {

namespace detail {

inline void check_pullback_inputs(const NeighborList& list, std::span<const double> d_grad) {
  if (d_grad.size() != list.capacity()) {
    throw InputError("distance gradient has " + std::to_string(d_grad.size()) +
                     " entries for capacity " + std::to_string(list.capacity()));
  }
}

inline Vec3 unit_direction(const NeighborList& list, std::size_t k) {
  const double d = list.distances[k];
  if (d == 0.0) {
    throw NumericError("zero-distance pair (" + std::to_string(list.pairs[k][0]) + ", " +
                       std::to_string(list.pairs[k][1]) + ") has no direction");
  }
  return list.deltas[k] / d;
}

}  // namespace detail

/// Gradient of sum_k d_grad[k] * d_k with respect to positions.
/// d(d_k)/d(r_i) = delta/d and d(d_k)/d(r_j) = -delta/d; self-loops and
/// sentinel slots contribute nothing.
inline std::vector<Vec3> distance_pullback(const NeighborList& list, std::span<const double> d_grad,
                                           std::size_t num_atoms) {
  detail::check_pullback_inputs(list, d_grad);
  std::vector<Vec3> grad(num_atoms);
  for (std::size_t k = 0; k < list.capacity(); ++k) {
    if (!list.occupied(k)) continue;
    const auto [i, j] = list.pairs[k];
    if (i == j) continue;
    const Vec3 g = detail::unit_direction(list, k) * d_grad[k];
    grad[static_cast<std::size_t>(i)] += g;
    grad[static_cast<std::size_t>(j)] -= g;
  }
  return grad;
}

/// Directional derivative of distance_pullback along `tangent` (d_grad held
/// fixed), using the pair Hessian (I - u u^T)/d. Also returns the distance
/// tangents u . (t_i - t_j).
inline std::pair<std::vector<Vec3>, std::vector<double>> distance_pullback_second(
    const NeighborList& list, std::span<const double> d_grad, std::span<const Vec3> tangent) {
  detail::check_pullback_inputs(list, d_grad);
  std::vector<Vec3> grad(tangent.size());
  std::vector<double> d_tangent(list.capacity(), 0.0);
  for (std::size_t k = 0; k < list.capacity(); ++k) {
    if (!list.occupied(k)) continue;
    const auto [i, j] = list.pairs[k];
    if (i == j) continue;
    const Vec3 u = detail::unit_direction(list, k);
    const Vec3 dt = tangent[static_cast<std::size_t>(i)] - tangent[static_cast<std::size_t>(j)];
    const double along = dot(u, dt);
    d_tangent[k] = along;
    const Vec3 h = (dt - u * along) * (d_grad[k] / list.distances[k]);
    grad[static_cast<std::size_t>(i)] += h;
    grad[static_cast<std::size_t>(j)] -= h;
  }
  return {std::move(grad), std::move(d_tangent)};
}

}  // namespace mdk
