#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "mdk/core/error.hpp"
#include "mdk/core/parallel.hpp"
#include "mdk/core/system.hpp"
#include "mdk/core/vec3.hpp"

namespace mdk {

enum class Strategy { brute, cell, automatic };

inline const char* to_string(Strategy s) {
  switch (s) {
    case Strategy::brute: return "brute";
    case Strategy::cell: return "cell";
    case Strategy::automatic: return "auto";
  }
  return "?";
}

/// Systems below this many atoms use the brute-force kernel under Strategy::automatic.
inline constexpr std::size_t brute_force_atom_limit = 10000;

struct NeighborSpec {
  double cutoff_upper = 5.0;
  double cutoff_lower = 0.0;
  std::size_t capacity = 1;
  Strategy strategy = Strategy::automatic;
  bool include_self_loops = false;
  bool full_list = false;
  /// Sort pairs by (i, j) after construction. Timing runs may turn this off.
  bool deterministic = true;
  unsigned threads = 0;

  void validate() const {
    if (!(cutoff_lower >= 0.0) || !(cutoff_lower < cutoff_upper)) {
      throw ConfigError("neighbor spec requires 0 <= cutoff_lower < cutoff_upper");
    }
    if (capacity < 1) throw ConfigError("neighbor spec requires capacity >= 1");
  }

  /// Capacity heuristic: atoms times the maximum expected neighbors per atom.
  static std::size_t capacity_for(std::size_t atoms, std::size_t max_num_neighbors) {
    return std::max<std::size_t>(1, atoms * max_num_neighbors);
  }
};

using Pair = std::array<std::int64_t, 2>;
inline constexpr std::int64_t sentinel = -1;

/// Fixed-capacity padded edge set. Slots [0, count) hold pairs (i, j) with
/// deltas r_i - r_j (minimum image); the rest hold (-1, -1) with zero geometry.
/// A static-shape padded list (see pad_static) has no sentinels: its
/// placeholder slots point at the ghost atom instead.
struct NeighborList {
  std::vector<Pair> pairs;
  std::vector<Vec3> deltas;
  std::vector<double> distances;
  std::size_t count = 0;
  double cutoff_lower = 0.0;
  double cutoff_upper = 0.0;
  bool full_list = false;
  bool self_loops = false;
  Strategy strategy_used = Strategy::brute;
  /// Non-empty when construction fell back to another strategy.
  std::string notice;

  std::size_t capacity() const { return pairs.size(); }
  bool occupied(std::size_t k) const { return pairs[k][0] >= 0; }
};

namespace detail {

struct PairRecord {
  std::int64_t i;
  std::int64_t j;
  Vec3 delta;
  double distance;
};

struct PairFilter {
  const System& system;
  double lower;
  double upper;
  double upper2;

  PairFilter(const System& s, double rl, double ru)
      : system(s), lower(rl), upper(ru), upper2(ru * ru * (1.0 + 1e-12)) {}

  /// Appends (i, j) when both share a sample and r_l < d <= r_u.
  void test(std::size_t i, std::size_t j, std::vector<PairRecord>& out) const {
    if (system.batch[i] != system.batch[j]) return;
    const Vec3 delta = reduce_image(system.positions[i] - system.positions[j], system.box);
    const double d2 = norm2(delta);
    if (d2 > upper2) return;
    const double d = std::sqrt(d2);
    if (d > upper || d <= lower) return;
    out.push_back({static_cast<std::int64_t>(i), static_cast<std::int64_t>(j), delta, d});
  }
};

/// Chunk bounds over rows i of the upper triangle with roughly equal pair counts.
inline std::vector<std::size_t> triangle_chunks(std::size_t n, unsigned workers) {
  const std::size_t w = std::max<std::size_t>(1, std::min<std::size_t>(workers, std::max<std::size_t>(n, 1)));
  std::vector<std::size_t> bounds{0};
  const double total = 0.5 * static_cast<double>(n) * static_cast<double>(n);
  for (std::size_t k = 1; k < w; ++k) {
    // rows [0, r) cover n*r - r^2/2 pairs; solve for the k/w fraction.
    const double target = total * static_cast<double>(k) / static_cast<double>(w);
    const double nn = static_cast<double>(n);
    const double r = nn - std::sqrt(std::max(0.0, nn * nn - 2.0 * target));
    bounds.push_back(std::clamp<std::size_t>(static_cast<std::size_t>(r), bounds.back(), n));
  }
  bounds.push_back(n);
  return bounds;
}

inline std::vector<std::vector<PairRecord>> brute_force_pairs(const System& system,
                                                              const PairFilter& filter,
                                                              unsigned threads) {
  const std::size_t n = system.real_size();
  const auto bounds = triangle_chunks(n, threads);
  std::vector<std::vector<PairRecord>> found(bounds.size() - 1);
  parallel_chunks(bounds, [&](std::size_t w, std::size_t begin, std::size_t end) {
    auto& out = found[w];
    for (std::size_t i = begin; i < end; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) filter.test(i, j, out);
    }
  });
  return found;
}

/// Spatial hash for the cell strategy: one grid spanning all samples.
struct CellGrid {
  std::array<std::int64_t, 3> dims{1, 1, 1};
  bool periodic = false;
  std::vector<std::int64_t> cell_of;     // per atom
  std::vector<std::size_t> sorted;       // atom indices sorted by cell id
  std::vector<std::size_t> cell_start;   // size cells+1, offsets into `sorted`

  std::int64_t flat(std::int64_t cx, std::int64_t cy, std::int64_t cz) const {
    return (cx * dims[1] + cy) * dims[2] + cz;
  }
};

/// Returns false when a periodic dimension has fewer than three cells.
inline bool build_cell_grid(const System& system, double cutoff, CellGrid& grid) {
  const std::size_t n = system.real_size();
  grid.periodic = system.box.periodic();
  std::vector<Vec3> coords(n);
  if (grid.periodic) {
    const Vec3 widths = system.box.perpendicular_widths();
    for (std::size_t d = 0; d < 3; ++d) {
      grid.dims[d] = static_cast<std::int64_t>(std::floor(widths[d] / (cutoff * (1.0 + 1e-9))));
      if (grid.dims[d] < 3) return false;
    }
    for (std::size_t i = 0; i < n; ++i) {
      Vec3 s = system.box.to_fractional(system.positions[i]);
      for (std::size_t d = 0; d < 3; ++d) s[d] -= std::floor(s[d]);
      coords[i] = s;
    }
  } else {
    Vec3 lo = system.positions[0];
    Vec3 hi = system.positions[0];
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t d = 0; d < 3; ++d) {
        lo[d] = std::min(lo[d], system.positions[i][d]);
        hi[d] = std::max(hi[d], system.positions[i][d]);
      }
    }
    Vec3 extent;
    for (std::size_t d = 0; d < 3; ++d) {
      lo[d] -= cutoff;
      hi[d] += cutoff;
      extent[d] = hi[d] - lo[d];
    }
    // Grow the cell edge until the grid holds no more than ~2 cells per atom.
    const double max_cells = std::max<double>(64.0, 2.0 * static_cast<double>(n));
    double edge = cutoff;
    for (;;) {
      double cells = 1.0;
      for (std::size_t d = 0; d < 3; ++d) {
        grid.dims[d] = std::max<std::int64_t>(1, static_cast<std::int64_t>(std::floor(extent[d] / edge)));
        cells *= static_cast<double>(grid.dims[d]);
      }
      if (cells <= max_cells) break;
      edge *= 1.25;
    }
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t d = 0; d < 3; ++d) coords[i][d] = (system.positions[i][d] - lo[d]) / extent[d];
    }
  }
  grid.cell_of.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::array<std::int64_t, 3> c{};
    for (std::size_t d = 0; d < 3; ++d) {
      c[d] = std::clamp<std::int64_t>(static_cast<std::int64_t>(coords[i][d] * static_cast<double>(grid.dims[d])), 0,
                                      grid.dims[d] - 1);
    }
    grid.cell_of[i] = grid.flat(c[0], c[1], c[2]);
  }
  const auto cells = static_cast<std::size_t>(grid.dims[0] * grid.dims[1] * grid.dims[2]);
  // Hash-and-sort: stable counting sort of atom indices by cell id.
  grid.cell_start.assign(cells + 1, 0);
  for (std::size_t i = 0; i < n; ++i) ++grid.cell_start[static_cast<std::size_t>(grid.cell_of[i]) + 1];
  std::partial_sum(grid.cell_start.begin(), grid.cell_start.end(), grid.cell_start.begin());
  grid.sorted.resize(n);
  std::vector<std::size_t> fill(grid.cell_start.begin(), grid.cell_start.end() - 1);
  for (std::size_t i = 0; i < n; ++i) grid.sorted[fill[static_cast<std::size_t>(grid.cell_of[i])]++] = i;
  return true;
}

inline std::vector<std::vector<PairRecord>> cell_list_pairs(const System& system,
                                                            const PairFilter& filter,
                                                            const CellGrid& grid,
                                                            unsigned threads) {
  const std::size_t n = system.real_size();
  const auto bounds = even_chunks(n, threads);
  std::vector<std::vector<PairRecord>> found(bounds.size() - 1);
  const auto& dims = grid.dims;
  parallel_chunks(bounds, [&](std::size_t w, std::size_t begin, std::size_t end) {
    auto& out = found[w];
    for (std::size_t i = begin; i < end; ++i) {
      std::int64_t id = grid.cell_of[i];
      const std::int64_t cz = id % dims[2];
      id /= dims[2];
      const std::int64_t cy = id % dims[1];
      const std::int64_t cx = id / dims[1];
      for (std::int64_t dx = -1; dx <= 1; ++dx) {
        for (std::int64_t dy = -1; dy <= 1; ++dy) {
          for (std::int64_t dz = -1; dz <= 1; ++dz) {
            std::int64_t nx = cx + dx, ny = cy + dy, nz = cz + dz;
            if (grid.periodic) {
              nx = (nx + dims[0]) % dims[0];
              ny = (ny + dims[1]) % dims[1];
              nz = (nz + dims[2]) % dims[2];
            } else if (nx < 0 || ny < 0 || nz < 0 || nx >= dims[0] || ny >= dims[1] || nz >= dims[2]) {
              continue;
            }
            const auto cell = static_cast<std::size_t>(grid.flat(nx, ny, nz));
            for (std::size_t k = grid.cell_start[cell]; k < grid.cell_start[cell + 1]; ++k) {
              const std::size_t j = grid.sorted[k];
              if (j > i) filter.test(i, j, out);
            }
          }
        }
      }
    }
  });
  return found;
}

}  // namespace detail

/// Builds the padded neighbor list of `system` under `spec`.
///
/// Throws OverflowError (carrying the required count) when more pairs are
/// found than `spec.capacity`, and GeometryError when the upper cutoff
/// exceeds half the minimum perpendicular width of a periodic box.
inline NeighborList build_neighbor_list(const System& system, const NeighborSpec& spec) {
  spec.validate();
  if (system.box.periodic() && spec.cutoff_upper > 0.5 * system.box.min_perpendicular_width()) {
    throw GeometryError("cutoff " + std::to_string(spec.cutoff_upper) +
                        " exceeds half the minimum perpendicular box width " +
                        std::to_string(0.5 * system.box.min_perpendicular_width()));
  }
  const std::size_t n = system.real_size();
  const unsigned threads = resolve_threads(spec.threads);
  const detail::PairFilter filter(system, spec.cutoff_lower, spec.cutoff_upper);

  NeighborList list;
  list.cutoff_lower = spec.cutoff_lower;
  list.cutoff_upper = spec.cutoff_upper;
  list.full_list = spec.full_list;
  list.self_loops = spec.include_self_loops;

  Strategy strategy = spec.strategy;
  if (strategy == Strategy::automatic) {
    strategy = n < brute_force_atom_limit ? Strategy::brute : Strategy::cell;
  }
  std::vector<std::vector<detail::PairRecord>> found;
  if (strategy == Strategy::cell) {
    detail::CellGrid grid;
    if (detail::build_cell_grid(system, spec.cutoff_upper, grid)) {
      found = detail::cell_list_pairs(system, filter, grid, threads);
    } else {
      list.notice = "cell strategy needs at least 3 cells per periodic dimension; used brute force";
      strategy = Strategy::brute;
    }
  }
  if (strategy == Strategy::brute) found = detail::brute_force_pairs(system, filter, threads);
  list.strategy_used = strategy;

  std::size_t unordered = 0;
  for (const auto& f : found) unordered += f.size();
  const std::size_t loops = spec.include_self_loops ? n : 0;
  const std::size_t required = (spec.full_list ? 2 * unordered : unordered) + loops;
  if (required > spec.capacity) throw OverflowError(required, spec.capacity);

  std::vector<detail::PairRecord> records;
  records.reserve(required);
  for (std::size_t i = 0; i < loops; ++i) {
    records.push_back({static_cast<std::int64_t>(i), static_cast<std::int64_t>(i), Vec3{}, 0.0});
  }
  for (const auto& f : found) {
    for (const auto& r : f) {
      records.push_back(r);
      if (spec.full_list) records.push_back({r.j, r.i, -r.delta, r.distance});
    }
  }
  if (spec.deterministic) {
    std::sort(records.begin(), records.end(), [](const auto& a, const auto& b) {
      return a.i != b.i ? a.i < b.i : a.j < b.j;
    });
  }
  list.count = records.size();
  list.pairs.assign(spec.capacity, Pair{sentinel, sentinel});
  list.deltas.assign(spec.capacity, Vec3{});
  list.distances.assign(spec.capacity, 0.0);
  for (std::size_t k = 0; k < records.size(); ++k) {
    list.pairs[k] = {records[k].i, records[k].j};
    list.deltas[k] = records[k].delta;
    list.distances[k] = records[k].distance;
  }
  return list;
}

/// A canonical unordered pair with its distance.
struct CanonicalPair {
  Pair pair;
  double distance;
  friend bool operator==(const CanonicalPair&, const CanonicalPair&) = default;
};

/// Strategy-independent form: pairs oriented i <= j, sentinels dropped,
/// transposes of a full list collapsed, sorted lexicographically.
inline std::vector<CanonicalPair> canonicalize(const NeighborList& list) {
  std::vector<CanonicalPair> out;
  out.reserve(list.count);
  for (std::size_t k = 0; k < list.capacity(); ++k) {
    if (!list.occupied(k)) continue;
    auto [i, j] = list.pairs[k];
    if (list.full_list && i > j) continue;
    if (i > j) std::swap(i, j);
    out.push_back({Pair{i, j}, list.distances[k]});
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.pair < b.pair; });
  return out;
}

}  // namespace mdk
