#pragma once

// Shared generators and finite-difference oracles for the test suites.

#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include "mdk/core/box.hpp"
#include "mdk/core/system.hpp"
#include "mdk/model/tensor.hpp"

namespace mdk::check {

inline double uniform(std::mt19937_64& rng, double lo, double hi) { return lo + (hi - lo) * uniform01(rng); }

inline int uniform_int(std::mt19937_64& rng, int lo, int hi) {
  return lo + static_cast<int>(rng() % static_cast<std::uint64_t>(hi - lo + 1));
}

/// Random reduced box of the given kind with diagonal entries in [lo, hi].
inline Box random_box(std::mt19937_64& rng, BoxKind kind, double lo, double hi) {
  if (kind == BoxKind::none) return Box::none();
  const double ax = uniform(rng, lo, hi), by = uniform(rng, lo, hi), cz = uniform(rng, lo, hi);
  if (kind == BoxKind::orthorhombic) return Box::orthorhombic(ax, by, cz);
  const Vec3 a{ax, 0, 0};
  const Vec3 b{uniform(rng, -0.5, 0.5) * ax, by, 0};
  const Vec3 c{uniform(rng, -0.5, 0.5) * ax, uniform(rng, -0.5, 0.5) * by, cz};
  return Box::triclinic(a, b, c);
}

/// Brute-force minimum image: smallest |delta + i a + j b + k c| over |i|,|j|,|k| <= reach.
inline Vec3 exhaustive_image(const Vec3& delta, const Box& box, int reach = 1) {
  if (!box.periodic()) return delta;
  Vec3 best = delta;
  double best2 = norm2(delta);
  for (int i = -reach; i <= reach; ++i) {
    for (int j = -reach; j <= reach; ++j) {
      for (int k = -reach; k <= reach; ++k) {
        const Vec3 cand = delta + box.vectors[0] * i + box.vectors[1] * j + box.vectors[2] * k;
        const double c2 = norm2(cand);
        if (c2 < best2) {
          best2 = c2;
          best = cand;
        }
      }
    }
  }
  return best;
}

/// Uniform positions inside the box (or a cube of edge `extent` without one);
/// batch codes split the atoms into `batches` contiguous blocks.
inline System random_system(std::mt19937_64& rng, std::size_t n, const Box& box, int batches = 1,
                            double extent = 10.0, std::vector<int> elements = {1, 6, 7, 8}) {
  std::vector<Vec3> pos(n);
  std::vector<int> z(n);
  std::vector<int> batch(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (box.periodic()) {
      // Deliberately reach outside the primary cell.
      pos[i] = box.from_fractional({uniform(rng, -0.5, 1.5), uniform(rng, -0.5, 1.5), uniform(rng, -0.5, 1.5)});
    } else {
      pos[i] = {uniform(rng, 0, extent), uniform(rng, 0, extent), uniform(rng, 0, extent)};
    }
    z[i] = elements[rng() % elements.size()];
    batch[i] = static_cast<int>(i * static_cast<std::size_t>(batches) / n);
  }
  return build_system(std::move(pos), std::move(z), std::move(batch), box);
}

/// -dE/dr by central differences of a per-system energy functional.
inline std::vector<Vec3> finite_difference_forces(System system, const std::function<double(const System&)>& energy,
                                                  double h) {
  std::vector<Vec3> forces(system.size());
  for (std::size_t i = 0; i < system.size(); ++i) {
    for (std::size_t d = 0; d < 3; ++d) {
      const double orig = system.positions[i][d];
      system.positions[i][d] = orig + h;
      const double ep = energy(system);
      system.positions[i][d] = orig - h;
      const double em = energy(system);
      system.positions[i][d] = orig;
      forces[i][d] = -(ep - em) / (2.0 * h);
    }
  }
  return forces;
}

/// ||a - b|| / ||b|| over flattened vectors; absolute when b vanishes.
inline double relative_error(const std::vector<Vec3>& a, const std::vector<Vec3>& b) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    num += norm2(a[i] - b[i]);
    den += norm2(b[i]);
  }
  return den > 0.0 ? std::sqrt(num / den) : std::sqrt(num);
}

inline double relative_error(double a, double b) {
  return std::abs(b) > 0.0 ? std::abs(a - b) / std::abs(b) : std::abs(a);
}

/// Rotation matrix from Euler-like angles.
inline Mat3 rotation(double alpha, double beta, double gamma) {
  const double ca = std::cos(alpha), sa = std::sin(alpha);
  const double cb = std::cos(beta), sb = std::sin(beta);
  const double cg = std::cos(gamma), sg = std::sin(gamma);
  const Mat3 rz{Vec3{ca, -sa, 0}, Vec3{sa, ca, 0}, Vec3{0, 0, 1}};
  const Mat3 ry{Vec3{cb, 0, sb}, Vec3{0, 1, 0}, Vec3{-sb, 0, cb}};
  const Mat3 rx{Vec3{1, 0, 0}, Vec3{0, cg, -sg}, Vec3{0, sg, cg}};
  const auto mul = [](const Mat3& p, const Mat3& q) {
    Mat3 r{};
    for (std::size_t i = 0; i < 3; ++i)
      for (std::size_t j = 0; j < 3; ++j)
        for (std::size_t k = 0; k < 3; ++k) r[i][j] += p[i][k] * q[k][j];
    return r;
  };
  return mul(rz, mul(ry, rx));
}

}  // namespace mdk::check
