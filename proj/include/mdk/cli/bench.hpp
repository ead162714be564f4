#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <iomanip>
#include <optional>
#include <ostream>
#include <random>
#include <string>
#include <vector>

#include "mdk/cli/config.hpp"
#include "mdk/md/rng.hpp"
#include "mdk/model/potential.hpp"

namespace mdk {

/// Edge of a cubic box holding n particles at the density that gives k
/// expected neighbors within `cutoff`: n (4/3) pi r^3 / L^3 = k.
inline double cloud_box_edge(std::size_t n, double k, double cutoff) {
  return std::cbrt(static_cast<double>(n) * 4.0 * units::pi * cutoff * cutoff * cutoff / (3.0 * k));
}

/// Uniform random particles in a periodic cube sized for `k` mean neighbors,
/// split into `batches` contiguous blocks of near-equal size.
inline System generate_cloud(std::size_t n, double k, double cutoff, std::size_t batches, std::uint64_t seed) {
  if (batches < 1 || n < batches) throw InputError("cloud needs n >= batches >= 1");
  const double edge = cloud_box_edge(n, k, cutoff);
  if (edge < 2.0 * cutoff) {
    throw GeometryError("cloud box edge " + std::to_string(edge) + " is below twice the cutoff; raise n or lower k");
  }
  std::mt19937_64 rng(seed);
  std::vector<Vec3> pos(n);
  std::vector<int> batch(n);
  for (std::size_t i = 0; i < n; ++i) {
    pos[i] = {edge * uniform01(rng), edge * uniform01(rng), edge * uniform01(rng)};
    batch[i] = static_cast<int>(i * batches / n);
  }
  return build_system(std::move(pos), std::vector<int>(n, 1), std::move(batch), Box::orthorhombic(edge, edge, edge));
}

/// Order-independent fingerprint of the unordered pair multiset.
inline std::uint64_t pair_multiset_hash(const NeighborList& list) {
  std::uint64_t sum = 0, mix = 0;
  for (std::size_t s = 0; s < list.count; ++s) {
    const auto i = static_cast<std::uint64_t>(std::min(list.pairs[s][0], list.pairs[s][1]));
    const auto j = static_cast<std::uint64_t>(std::max(list.pairs[s][0], list.pairs[s][1]));
    const std::uint64_t h = splitmix64((i << 32) ^ j);
    sum += h;
    mix ^= splitmix64(h);
  }
  return sum ^ (mix * 0x9e3779b97f4a7c15ULL) ^ list.count;
}

struct StrategyTiming {
  double mean_ms = 0.0;
  std::size_t capacity = 0;  // capacity used for the timed runs
  std::size_t pairs = 0;     // pairs found
  bool retried = false;      // overflow forced a doubled capacity
  bool consistent = true;    // every timed run produced the same pair multiset
};

struct NeighborBenchRow {
  std::size_t particles = 0;
  std::size_t batch = 0;
  std::optional<StrategyTiming> cell, brute;
};

/// Times neighbor-list construction: warmup runs, then the mean over the timed
/// repetitions, per (particle count, batch count, strategy).
inline std::vector<NeighborBenchRow> bench_neighbors(const BenchConfig& config) {
  config.validate();
  std::vector<NeighborBenchRow> rows;
  for (const std::size_t n : config.particles) {
    for (const std::size_t b : config.batches) {
      const System system = generate_cloud(n, config.mean_neighbors, config.cutoff, b, config.seed);
      NeighborBenchRow row{n, b, std::nullopt, std::nullopt};
      for (const auto& name : config.strategies) {
        NeighborSpec spec;
        spec.cutoff_upper = config.cutoff;
        spec.capacity = NeighborSpec::capacity_for(n, config.max_num_neighbors);
        spec.strategy = name == "cell" ? Strategy::cell : Strategy::brute;
        spec.deterministic = false;
        spec.threads = config.threads;
        StrategyTiming t;
        NeighborList list;
        try {
          list = build_neighbor_list(system, spec);
        } catch (const OverflowError&) {
          spec.capacity *= 2;
          t.retried = true;
          list = build_neighbor_list(system, spec);
        }
        t.capacity = spec.capacity;
        t.pairs = list.count;
        const std::uint64_t reference = pair_multiset_hash(list);
        for (std::size_t w = 1; w < config.warmup_repetitions; ++w) list = build_neighbor_list(system, spec);
        double total = 0.0;
        for (std::size_t r = 0; r < config.repetitions; ++r) {
          const auto start = std::chrono::steady_clock::now();
          list = build_neighbor_list(system, spec);
          total += std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
          t.consistent = t.consistent && pair_multiset_hash(list) == reference;
        }
        t.mean_ms = total / static_cast<double>(config.repetitions);
        (name == "cell" ? row.cell : row.brute) = t;
      }
      rows.push_back(row);
    }
  }
  return rows;
}

inline void write_neighbor_csv(std::ostream& os, const std::vector<NeighborBenchRow>& rows) {
  os << "particles,batch,cell_ms,brute_ms\n";
  const auto cell = [&](const std::optional<StrategyTiming>& t) {
    if (t) os << std::setprecision(6) << t->mean_ms;
  };
  for (const auto& r : rows) {
    os << r.particles << ',' << r.batch << ',';
    cell(r.cell);
    os << ',';
    cell(r.brute);
    os << '\n';
  }
}

/// Capacity bookkeeping behind the timings.
inline void write_capacity_csv(std::ostream& os, const std::vector<NeighborBenchRow>& rows) {
  os << "particles,batch,strategy,capacity,pairs,retried,consistent\n";
  for (const auto& r : rows) {
    for (const auto& [name, t] : {std::pair{"cell", r.cell}, std::pair{"brute", r.brute}}) {
      if (!t) continue;
      os << r.particles << ',' << r.batch << ',' << name << ',' << t->capacity << ',' << t->pairs << ','
         << (t->retried ? 1 : 0) << ',' << (t->consistent ? 1 : 0) << '\n';
    }
  }
}

/// Least-squares slope of log(y) against log(x).
inline double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw InputError("slope fit needs at least two matching points");
  double mx = 0, my = 0;
  for (std::size_t k = 0; k < x.size(); ++k) mx += std::log(x[k]), my += std::log(y[k]);
  mx /= static_cast<double>(x.size());
  my /= static_cast<double>(x.size());
  double sxy = 0, sxx = 0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double dx = std::log(x[k]) - mx;
    sxy += dx * (std::log(y[k]) - my);
    sxx += dx * dx;
  }
  return sxy / sxx;
}

/// Million steps per day for a step taking `ms` milliseconds: 86400e3 ms/day / 1e6.
inline double msteps_per_day_from_ms(double ms) { return 86.4 / ms; }

struct ModelBenchRow {
  std::string structure;
  std::size_t atoms = 0;
  std::vector<double> ms;  // one entry per configured layer count
};

/// Times energy + force evaluation of the network for each structure and layer count.
/// A network without interaction layers has no geometric input, so no neighbor
/// search is timed for it.
inline std::vector<ModelBenchRow> bench_model(const GNConfig& model, const BenchConfig& config,
                                              const std::vector<std::pair<std::string, System>>& structures) {
  if (config.repetitions < 1) throw ConfigError("repetitions must be >= 1");
  std::vector<ModelBenchRow> rows;
  for (const auto& [name, system] : structures) {
    ModelBenchRow row{name, system.size(), {}};
    for (const std::size_t layers : config.layers) {
      GNConfig c = model;
      c.num_layers = layers;
      c.validate();
      for (const int z : system.species) {
        if (z >= c.max_z) throw InputError(name + ": species " + std::to_string(z) + " needs max_z > " + std::to_string(z));
      }
      const GNParams params = GNParams::initialize(c, config.seed);
      NeighborSpec spec;
      spec.cutoff_upper = c.cutoff_upper;
      spec.cutoff_lower = c.cutoff_lower;
      spec.full_list = true;
      spec.capacity = NeighborSpec::capacity_for(system.size(), c.max_num_neighbors);
      spec.threads = config.threads;
      const auto step = [&] {
        NeighborList list;
        if (layers == 0) {
          list.cutoff_upper = c.cutoff_upper;
          list.cutoff_lower = c.cutoff_lower;
          list.full_list = true;
        } else {
          try {
            list = build_neighbor_list(system, spec);
          } catch (const OverflowError& e) {
            spec.capacity = 2 * e.required();
            list = build_neighbor_list(system, spec);
          }
        }
        return graph_energy_forces(params, c, system, list, true);
      };
      for (std::size_t w = 0; w < config.warmup_repetitions; ++w) step();
      const auto start = std::chrono::steady_clock::now();
      for (std::size_t r = 0; r < config.repetitions; ++r) step();
      const double total = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
      row.ms.push_back(total / static_cast<double>(config.repetitions));
    }
    rows.push_back(row);
  }
  return rows;
}

/// Million steps per day; rows are structures, columns layer counts.
inline void write_model_table(std::ostream& os, const std::vector<ModelBenchRow>& rows,
                              const std::vector<std::size_t>& layers) {
  os << std::left << std::setw(24) << "structure" << std::right << std::setw(8) << "atoms";
  for (const auto l : layers) os << std::setw(12) << (std::to_string(l) + "L");
  os << '\n';
  for (const auto& r : rows) {
    os << std::left << std::setw(24) << r.structure << std::right << std::setw(8) << r.atoms;
    for (const double ms : r.ms) os << std::setw(12) << std::fixed << std::setprecision(3) << msteps_per_day_from_ms(ms);
    os << std::defaultfloat << '\n';
  }
}

}  // namespace mdk
