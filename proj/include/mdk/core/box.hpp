#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

#include "mdk/core/error.hpp"
#include "mdk/core/vec3.hpp"

namespace mdk {

enum class BoxKind { none, orthorhombic, triclinic };

/// Simulation cell. Rows of `vectors` are the lattice vectors a, b, c.
///
/// Triclinic cells must be in reduced (lower-triangular) form:
/// a = (ax, 0, 0), b = (bx, by, 0), c = (cx, cy, cz) with ax, by, cz > 0,
/// |bx| <= ax/2, |cx| <= ax/2 and |cy| <= by/2.
struct Box {
  BoxKind kind = BoxKind::none;
  Mat3 vectors{};

  friend bool operator==(const Box&, const Box&) = default;

  static Box none() { return {}; }

  static Box orthorhombic(double lx, double ly, double lz) {
    Box b{BoxKind::orthorhombic, {Vec3{lx, 0, 0}, Vec3{0, ly, 0}, Vec3{0, 0, lz}}};
    b.validate();
    return b;
  }

  static Box triclinic(const Vec3& a, const Vec3& b, const Vec3& c) {
    Box box{BoxKind::triclinic, {a, b, c}};
    box.validate();
    return box;
  }

  bool periodic() const { return kind != BoxKind::none; }

  void validate() const {
    if (kind == BoxKind::none) return;
    const auto& [a, b, c] = vectors;
    for (const auto& v : vectors) {
      if (!is_finite(v)) throw GeometryError("malformed box: non-finite lattice vector");
    }
    if (!(a.x > 0 && b.y > 0 && c.z > 0)) {
      throw GeometryError("malformed box: diagonal entries must be positive");
    }
    if (kind == BoxKind::orthorhombic) {
      if (a.y != 0 || a.z != 0 || b.x != 0 || b.z != 0 || c.x != 0 || c.y != 0) {
        throw GeometryError("malformed box: orthorhombic box has off-diagonal entries");
      }
      return;
    }
    if (a.y != 0 || a.z != 0 || b.z != 0) {
      throw GeometryError("box not reduced: vectors must be lower triangular");
    }
    const double tol = 1e-12;
    if (std::abs(b.x) > 0.5 * a.x * (1 + tol) || std::abs(c.x) > 0.5 * a.x * (1 + tol) ||
        std::abs(c.y) > 0.5 * b.y * (1 + tol)) {
      throw GeometryError("box not reduced: |bx| <= ax/2, |cx| <= ax/2, |cy| <= by/2 required");
    }
  }

  double volume() const { return vectors[0].x * vectors[1].y * vectors[2].z; }

  /// Distances between opposite faces, ordered as the planes normal to
  /// the reciprocal vectors of a, b and c.
  Vec3 perpendicular_widths() const {
    const auto& [a, b, c] = vectors;
    const double v = volume();
    return {v / norm(cross(b, c)), v / norm(cross(a, c)), v / norm(cross(a, b))};
  }

  double min_perpendicular_width() const {
    const Vec3 w = perpendicular_widths();
    return std::min({w.x, w.y, w.z});
  }

  /// Fractional coordinates s with r = s.x a + s.y b + s.z c.
  Vec3 to_fractional(const Vec3& r) const {
    const auto& [a, b, c] = vectors;
    const double sc = r.z / c.z;
    const double sb = (r.y - sc * c.y) / b.y;
    const double sa = (r.x - sb * b.x - sc * c.x) / a.x;
    return {sa, sb, sc};
  }

  Vec3 from_fractional(const Vec3& s) const {
    const auto& [a, b, c] = vectors;
    return a * s.x + b * s.y + c * s.z;
  }

  /// Maps a position into the primary cell [0,1)^3 in fractional space.
  Vec3 wrap(const Vec3& r) const {
    if (!periodic()) return r;
    Vec3 s = to_fractional(r);
    for (std::size_t d = 0; d < 3; ++d) s[d] -= std::floor(s[d]);
    return from_fractional(s);
  }
};

/// Nearest integer (ties to even) for |x| < 2^51 without a libm call: adding
/// and removing 1.5 * 2^52 leaves no fractional bits under round-to-nearest.
inline double round_nearest(double x) {
  constexpr double shift = 6755399441055744.0;
  return (x + shift) - shift;
}

/// Image displacement by sequential reduction along c, b, then a. Equals the
/// minimum image whenever that is shorter than half the minimum perpendicular
/// width of a reduced box, which covers every pair within a legal cutoff.
inline Vec3 reduce_image(Vec3 delta, const Box& box) {
  switch (box.kind) {
    case BoxKind::none:
      return delta;
    case BoxKind::orthorhombic:
      for (std::size_t d = 0; d < 3; ++d) {
        const double l = box.vectors[d][d];
        delta[d] -= l * round_nearest(delta[d] / l);
      }
      return delta;
    case BoxKind::triclinic: {
      const auto& [a, b, c] = box.vectors;
      delta -= c * round_nearest(delta.z / c.z);
      delta -= b * round_nearest(delta.y / b.y);
      delta -= a * round_nearest(delta.x / a.x);
      return delta;
    }
  }
  return delta;
}

/// Shortest lattice image of `delta`, for any delta. Triclinic boxes
/// enumerate every shift within the reduced vector's length: the lattice
/// matrix is triangular, so z fixes the range of k, y that of j, and x picks i.
inline Vec3 minimum_image(Vec3 delta, const Box& box) {
  delta = reduce_image(delta, box);
  if (box.kind != BoxKind::triclinic) return delta;
  const auto& [a, b, c] = box.vectors;
  Vec3 best = delta;
  double best2 = norm2(delta);
  const double radius = std::sqrt(best2) * (1.0 + 1e-12);
  const auto span = [](double center, double half, double step) {
    return std::pair{static_cast<long>(std::ceil((-half - center) / step)),
                     static_cast<long>(std::floor((half - center) / step))};
  };
  const auto [k0, k1] = span(delta.z, radius, c.z);
  for (long k = k0; k <= k1; ++k) {
    const double z = delta.z + static_cast<double>(k) * c.z;
    const double rest_z = radius * radius - z * z;
    if (rest_z < 0.0) continue;
    const double y0 = delta.y + static_cast<double>(k) * c.y;
    const auto [j0, j1] = span(y0, std::sqrt(rest_z), b.y);
    for (long j = j0; j <= j1; ++j) {
      const double y = y0 + static_cast<double>(j) * b.y;
      const double x0 = delta.x + static_cast<double>(k) * c.x + static_cast<double>(j) * b.x;
      const double x = x0 - a.x * round_nearest(x0 / a.x);
      const double d2 = x * x + y * y + z * z;
      if (d2 < best2) best2 = d2, best = Vec3{x, y, z};
    }
  }
  return best;
}

}  // namespace mdk
