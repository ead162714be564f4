#pragma once

#include <cstdint>
#include <cstring>
#include <random>
#include <string>
#include <vector>

#include "mdk/core/energy_forces.hpp"
#include "mdk/core/error.hpp"
#include "mdk/core/system.hpp"
#include "mdk/model/radial.hpp"
#include "mdk/model/tensor.hpp"
#include "mdk/neighbors/neighbor_list.hpp"
#include "mdk/neighbors/pullback.hpp"

namespace mdk {

/// Hyperparameters of the invariant graph network. Key names follow the
/// configuration vocabulary (embedding_dimension, num_rbf, cutoff_upper, ...).
struct GNConfig {
  std::size_t embedding_dimension = 128;
  std::size_t num_layers = 2;
  std::size_t num_rbf = 32;
  double cutoff_lower = 0.0;
  double cutoff_upper = 5.0;
  int max_z = 100;
  std::string activation = "silu";
  bool trainable_rbf = false;
  bool static_shapes = false;
  std::size_t max_num_neighbors = 64;
  /// Per-atom standardization: y_i = head(x_i) * std + mean.
  double mean = 0.0;
  double std = 1.0;

  void validate() const {
    if (embedding_dimension < 1) throw ConfigError("embedding_dimension must be >= 1");
    if (num_rbf < 1) throw ConfigError("num_rbf must be >= 1");
    if (!(cutoff_lower >= 0.0 && cutoff_lower < cutoff_upper)) {
      throw ConfigError("graph network requires 0 <= cutoff_lower < cutoff_upper");
    }
    if (max_z < 1) throw ConfigError("max_z must be >= 1");
    if (activation != "silu") throw ConfigError("unsupported activation '" + activation + "' (only silu)");
  }

  std::size_t head_dimension() const { return std::max<std::size_t>(1, embedding_dimension / 2); }
};

struct InteractionParams {
  Tensor filter1_w, filter1_b;  // K -> F
  Tensor filter2_w, filter2_b;  // F -> F
  Tensor premix_w;              // F -> F, no bias
  Tensor post1_w, post1_b;      // F -> F
  Tensor post2_w, post2_b;      // F -> F
};

/// All learnable tensors of the network. Also used as the shape of gradients
/// and optimizer moments.
struct GNParams {
  Tensor embed;
  std::vector<InteractionParams> layers;
  Tensor head1_w, head1_b;  // F -> F/2
  Tensor head2_w, head2_b;  // F/2 -> 1
  Tensor rbf_means, rbf_betas;

  /// Visits every tensor in a fixed order with a stable name.
  template <typename Fn>
  void for_each(Fn&& fn) {
    fn(std::string("embed"), embed);
    for (std::size_t l = 0; l < layers.size(); ++l) {
      auto& p = layers[l];
      const std::string pre = "layer" + std::to_string(l) + ".";
      fn(pre + "filter1_w", p.filter1_w);
      fn(pre + "filter1_b", p.filter1_b);
      fn(pre + "filter2_w", p.filter2_w);
      fn(pre + "filter2_b", p.filter2_b);
      fn(pre + "premix_w", p.premix_w);
      fn(pre + "post1_w", p.post1_w);
      fn(pre + "post1_b", p.post1_b);
      fn(pre + "post2_w", p.post2_w);
      fn(pre + "post2_b", p.post2_b);
    }
    fn(std::string("head1_w"), head1_w);
    fn(std::string("head1_b"), head1_b);
    fn(std::string("head2_w"), head2_w);
    fn(std::string("head2_b"), head2_b);
    fn(std::string("rbf_means"), rbf_means);
    fn(std::string("rbf_betas"), rbf_betas);
  }

  template <typename Fn>
  void for_each(Fn&& fn) const {
    const_cast<GNParams*>(this)->for_each([&](const std::string& name, Tensor& t) {
      fn(name, static_cast<const Tensor&>(t));
    });
  }

  std::size_t size() const {
    std::size_t n = 0;
    for_each([&](const std::string&, const Tensor& t) { n += t.size(); });
    return n;
  }

  static GNParams zeros(const GNConfig& config) {
    const std::size_t f = config.embedding_dimension;
    const std::size_t k = config.num_rbf;
    const std::size_t h = config.head_dimension();
    GNParams p;
    p.embed = Tensor(static_cast<std::size_t>(config.max_z), f);
    p.layers.resize(config.num_layers);
    for (auto& layer : p.layers) {
      layer.filter1_w = Tensor(f, k);
      layer.filter1_b = Tensor(f, 1);
      layer.filter2_w = Tensor(f, f);
      layer.filter2_b = Tensor(f, 1);
      layer.premix_w = Tensor(f, f);
      layer.post1_w = Tensor(f, f);
      layer.post1_b = Tensor(f, 1);
      layer.post2_w = Tensor(f, f);
      layer.post2_b = Tensor(f, 1);
    }
    p.head1_w = Tensor(h, f);
    p.head1_b = Tensor(h, 1);
    p.head2_w = Tensor(1, h);
    p.head2_b = Tensor(1, 1);
    p.rbf_means = Tensor(k, 1);
    p.rbf_betas = Tensor(k, 1);
    return p;
  }

  /// Xavier-uniform weights, zero biases, unit-variance uniform embeddings and
  /// the standard expnorm basis.
  static GNParams initialize(const GNConfig& config, std::uint64_t seed) {
    config.validate();
    GNParams p = zeros(config);
    std::mt19937_64 rng(seed);
    const auto xavier = [&](Tensor& w) {
      const double limit = std::sqrt(6.0 / static_cast<double>(w.rows + w.cols));
      for (auto& v : w.data) v = limit * (2.0 * uniform01(rng) - 1.0);
    };
    for (auto& v : p.embed.data) v = std::sqrt(3.0) * (2.0 * uniform01(rng) - 1.0);
    for (auto& layer : p.layers) {
      xavier(layer.filter1_w);
      xavier(layer.filter2_w);
      xavier(layer.premix_w);
      xavier(layer.post1_w);
      xavier(layer.post2_w);
    }
    xavier(p.head1_w);
    xavier(p.head2_w);
    const auto basis = ExpNormBasis::initial(config.num_rbf, config.cutoff_lower, config.cutoff_upper);
    p.rbf_means.data = basis.means;
    p.rbf_betas.data = basis.betas;
    return p;
  }

  ExpNormBasis basis(const GNConfig& config) const {
    return ExpNormBasis{rbf_means.data, rbf_betas.data, config.cutoff_lower};
  }

  friend bool operator==(const GNParams& a, const GNParams& b) {
    bool same = a.layers.size() == b.layers.size();
    if (!same) return false;
    std::vector<const Tensor*> ta, tb;
    a.for_each([&](const std::string&, const Tensor& t) { ta.push_back(&t); });
    b.for_each([&](const std::string&, const Tensor& t) { tb.push_back(&t); });
    for (std::size_t i = 0; i < ta.size(); ++i) same = same && *ta[i] == *tb[i];
    return same;
  }
};

/// Intermediate activations of one forward pass, consumed by the backward passes.
struct ForwardCache {
  std::uint64_t fingerprint = 0;
  std::size_t atoms = 0;
  // Active edges in slot order: receiver, sender, distance and slot index.
  std::vector<std::size_t> recv, send, slot;
  std::vector<double> dist;
  std::vector<double> rbf, rbf_slope;  // edges x K
  std::vector<double> env, env_slope;  // edges
  struct Layer {
    std::vector<double> x;        // atoms x F, layer input
    std::vector<double> premix;   // atoms x F
    std::vector<double> filter_pre;  // edges x F, before activation
    std::vector<double> filter;   // edges x F, filter output before the envelope
    std::vector<double> message;  // atoms x F
    std::vector<double> post_pre; // atoms x F
  };
  std::vector<Layer> layers;
  std::vector<double> x_final;    // atoms x F
  std::vector<double> head_pre;   // atoms x H
  std::vector<double> per_atom;   // atoms
};

namespace detail {

/// Word-wise FNV-style mixing; used only to detect stale caches.
inline void fnv_mix(std::uint64_t& h, const void* data, std::size_t bytes) {
  const auto* p = static_cast<const unsigned char*>(data);
  std::size_t i = 0;
  for (; i + 8 <= bytes; i += 8) {
    std::uint64_t w;
    std::memcpy(&w, p + i, 8);
    h ^= w;
    h *= 1099511628211ull;
  }
  for (; i < bytes; ++i) {
    h ^= p[i];
    h *= 1099511628211ull;
  }
}

inline std::uint64_t fingerprint(const GNParams& params, const System& system, const NeighborList& list) {
  std::uint64_t h = 1469598103934665603ull;
  params.for_each([&](const std::string&, const Tensor& t) { fnv_mix(h, t.data.data(), t.data.size() * sizeof(double)); });
  fnv_mix(h, system.positions.data(), system.positions.size() * sizeof(Vec3));
  fnv_mix(h, system.species.data(), system.species.size() * sizeof(int));
  fnv_mix(h, list.pairs.data(), list.pairs.size() * sizeof(Pair));
  fnv_mix(h, list.distances.data(), list.distances.size() * sizeof(double));
  return h;
}

inline void check_graph_inputs(const GNConfig& config, const GNParams& params, const System& system,
                               const NeighborList& list) {
  if (list.cutoff_upper != config.cutoff_upper || list.cutoff_lower != config.cutoff_lower) {
    throw InputError("neighbor/config cutoff mismatch: list [" + std::to_string(list.cutoff_lower) + ", " +
                     std::to_string(list.cutoff_upper) + "] vs model [" + std::to_string(config.cutoff_lower) +
                     ", " + std::to_string(config.cutoff_upper) + "]");
  }
  if (!list.full_list) throw InputError("graph network needs a full neighbor list (full_list = true)");
  if (params.layers.size() != config.num_layers || params.embed.cols != config.embedding_dimension ||
      params.rbf_means.size() != config.num_rbf) {
    throw InputError("graph network parameters do not match the configuration");
  }
  for (std::size_t i = 0; i < system.real_size(); ++i) {
    if (system.species[i] >= config.max_z) {
      throw InputError("species " + std::to_string(system.species[i]) + " >= max_z " + std::to_string(config.max_z));
    }
  }
}

}  // namespace detail

/// Per-atom and per-sample energies of the graph network, caching the activations.
///
/// x_i^0 = embed[Z_i]; per layer W_e = filter(rbf(d_e)) * phi(d_e),
/// m_i = sum_{e: j->i} (premix x_j) * W_e and x_i += post2(silu(post1(m_i)));
/// y_i = head(x_i) * std + mean and E_s = sum of y_i over real atoms of sample s.
inline EnergyForces graph_forward(const GNParams& params, const GNConfig& config, const System& system,
                                  const NeighborList& list, ForwardCache& cache) {
  detail::check_graph_inputs(config, params, system, list);
  const std::size_t n = system.size();
  const std::size_t f = config.embedding_dimension;
  const std::size_t kr = config.num_rbf;
  const std::size_t h = config.head_dimension();

  cache = ForwardCache{};
  cache.fingerprint = detail::fingerprint(params, system, list);
  cache.atoms = n;
  if (config.num_layers > 0) {
    for (std::size_t k = 0; k < list.capacity(); ++k) {
      if (!list.occupied(k)) continue;
      cache.recv.push_back(static_cast<std::size_t>(list.pairs[k][0]));
      cache.send.push_back(static_cast<std::size_t>(list.pairs[k][1]));
      cache.slot.push_back(k);
      cache.dist.push_back(list.distances[k]);
    }
  }
  const std::size_t edges = cache.recv.size();
  const ExpNormBasis basis = params.basis(config);
  cache.rbf.resize(edges * kr);
  cache.rbf_slope.resize(edges * kr);
  cache.env.resize(edges);
  cache.env_slope.resize(edges);
  for (std::size_t e = 0; e < edges; ++e) {
    basis.evaluate(cache.dist[e], &cache.rbf[e * kr], &cache.rbf_slope[e * kr]);
    const ValueSlope env = cosine_cutoff_with_slope(cache.dist[e], config.cutoff_lower, config.cutoff_upper);
    cache.env[e] = env.value;
    cache.env_slope[e] = env.slope;
  }

  std::vector<double> x(n * f, 0.0);
  for (std::size_t i = 0; i < system.real_size(); ++i) {
    const double* row = params.embed.row(static_cast<std::size_t>(system.species[i]));
    std::copy(row, row + f, x.begin() + static_cast<std::ptrdiff_t>(i * f));
  }
  std::vector<double> act(f);
  cache.layers.resize(config.num_layers);
  for (std::size_t l = 0; l < config.num_layers; ++l) {
    const InteractionParams& p = params.layers[l];
    auto& c = cache.layers[l];
    c.x = x;
    c.premix.resize(n * f);
    for (std::size_t i = 0; i < n; ++i) affine(p.premix_w, &x[i * f], nullptr, &c.premix[i * f]);
    c.filter_pre.resize(edges * f);
    c.filter.resize(edges * f);
    c.message.assign(n * f, 0.0);
    for (std::size_t e = 0; e < edges; ++e) {
      double* pre = &c.filter_pre[e * f];
      affine(p.filter1_w, &cache.rbf[e * kr], &p.filter1_b, pre);
      for (std::size_t a = 0; a < f; ++a) act[a] = silu(pre[a]);
      double* filt = &c.filter[e * f];
      affine(p.filter2_w, act.data(), &p.filter2_b, filt);
      const double env = cache.env[e];
      const double* src = &c.premix[cache.send[e] * f];
      double* dst = &c.message[cache.recv[e] * f];
      for (std::size_t a = 0; a < f; ++a) dst[a] += src[a] * (filt[a] * env);
    }
    c.post_pre.resize(n * f);
    std::vector<double> update(f);
    for (std::size_t i = 0; i < n; ++i) {
      double* z = &c.post_pre[i * f];
      affine(p.post1_w, &c.message[i * f], &p.post1_b, z);
      for (std::size_t a = 0; a < f; ++a) act[a] = silu(z[a]);
      affine(p.post2_w, act.data(), &p.post2_b, update.data());
      for (std::size_t a = 0; a < f; ++a) x[i * f + a] += update[a];
    }
  }
  cache.x_final = x;
  cache.head_pre.resize(n * h);
  cache.per_atom.assign(n, 0.0);
  EnergyForces out = EnergyForces::zeros(system);
  std::vector<double> hidden(h);
  for (std::size_t i = 0; i < system.real_size(); ++i) {
    double* z = &cache.head_pre[i * h];
    affine(params.head1_w, &x[i * f], &params.head1_b, z);
    for (std::size_t a = 0; a < h; ++a) hidden[a] = silu(z[a]);
    double o = 0.0;
    affine(params.head2_w, hidden.data(), &params.head2_b, &o);
    const double y = o * config.std + config.mean;
    cache.per_atom[i] = y;
    (*out.per_atom_energy)[i] = y;
    out.energy[static_cast<std::size_t>(system.batch[i])] += y;
  }
  out.forces.clear();
  return out;
}

/// Result of a reverse pass: d(sum_s upstream_s E_s)/d(distance) per list
/// slot and, when requested, with respect to every parameter.
struct GraphGradients {
  std::vector<double> distance_grad;
  GNParams params;
  bool has_params = false;
};

/// Reverse-mode sweep through the cached forward pass.
inline GraphGradients graph_backward(const GNParams& params, const GNConfig& config, const System& system,
                                     const NeighborList& list, const ForwardCache& cache,
                                     const std::vector<double>& upstream, bool parameter_gradients) {
  if (cache.atoms != system.size() || cache.fingerprint != detail::fingerprint(params, system, list)) {
    throw InputError("stale forward cache: system, neighbors or parameters changed since forward");
  }
  if (upstream.size() != system.num_samples()) {
    throw InputError("upstream gradient has " + std::to_string(upstream.size()) + " entries for " +
                     std::to_string(system.num_samples()) + " samples");
  }
  const std::size_t n = system.size();
  const std::size_t f = config.embedding_dimension;
  const std::size_t kr = config.num_rbf;
  const std::size_t h = config.head_dimension();
  const std::size_t edges = cache.recv.size();

  GraphGradients out;
  out.distance_grad.assign(list.capacity(), 0.0);
  out.has_params = parameter_gradients;
  if (parameter_gradients) out.params = GNParams::zeros(config);
  GNParams& g = out.params;

  // Head.
  std::vector<double> gx(n * f, 0.0);
  std::vector<double> hidden(h), ghead(h);
  for (std::size_t i = 0; i < system.real_size(); ++i) {
    const double go = upstream[static_cast<std::size_t>(system.batch[i])] * config.std;
    if (go == 0.0) continue;
    const double* z = &cache.head_pre[i * h];
    for (std::size_t a = 0; a < h; ++a) {
      hidden[a] = silu(z[a]);
      ghead[a] = go * params.head2_w.data[a] * silu_slope(z[a]);
    }
    if (parameter_gradients) {
      outer_acc(&go, hidden.data(), g.head2_w, &g.head2_b);
      outer_acc(ghead.data(), &cache.x_final[i * f], g.head1_w, &g.head1_b);
    }
    affine_transpose_acc(params.head1_w, ghead.data(), &gx[i * f]);
  }

  std::vector<double> grbf(edges * kr, 0.0);
  std::vector<double> act(f), gz(f), gm_i(f), gw(f), gf(f), gs(f), ga(f);
  for (std::size_t l = config.num_layers; l-- > 0;) {
    const InteractionParams& p = params.layers[l];
    const auto& c = cache.layers[l];
    // Post-mix with residual: gx stays as the residual path.
    std::vector<double> gm(n * f, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      const double* gout = &gx[i * f];
      const double* z = &c.post_pre[i * f];
      std::fill(gz.begin(), gz.end(), 0.0);
      affine_transpose_acc(p.post2_w, gout, gz.data());
      for (std::size_t a = 0; a < f; ++a) gz[a] *= silu_slope(z[a]);
      if (parameter_gradients) {
        for (std::size_t a = 0; a < f; ++a) act[a] = silu(z[a]);
        outer_acc(gout, act.data(), g.layers[l].post2_w, &g.layers[l].post2_b);
        outer_acc(gz.data(), &c.message[i * f], g.layers[l].post1_w, &g.layers[l].post1_b);
      }
      affine_transpose_acc(p.post1_w, gz.data(), &gm[i * f]);
    }
    // Continuous-filter convolution.
    std::vector<double> gpremix(n * f, 0.0);
    for (std::size_t e = 0; e < edges; ++e) {
      const std::size_t i = cache.recv[e];
      const std::size_t j = cache.send[e];
      const double* gmi = &gm[i * f];
      const double* src = &c.premix[j * f];
      const double* filt = &c.filter[e * f];
      const double env = cache.env[e];
      double genv = 0.0;
      double* gsrc = &gpremix[j * f];
      for (std::size_t a = 0; a < f; ++a) {
        gsrc[a] += gmi[a] * filt[a] * env;
        gw[a] = gmi[a] * src[a];
        genv += gw[a] * filt[a];
        gf[a] = gw[a] * env;
      }
      const double* pre = &c.filter_pre[e * f];
      std::fill(gs.begin(), gs.end(), 0.0);
      affine_transpose_acc(p.filter2_w, gf.data(), gs.data());
      for (std::size_t a = 0; a < f; ++a) ga[a] = gs[a] * silu_slope(pre[a]);
      if (parameter_gradients) {
        for (std::size_t a = 0; a < f; ++a) act[a] = silu(pre[a]);
        outer_acc(gf.data(), act.data(), g.layers[l].filter2_w, &g.layers[l].filter2_b);
        outer_acc(ga.data(), &cache.rbf[e * kr], g.layers[l].filter1_w, &g.layers[l].filter1_b);
      }
      affine_transpose_acc(p.filter1_w, ga.data(), &grbf[e * kr]);
      out.distance_grad[cache.slot[e]] += genv * cache.env_slope[e];
    }
    for (std::size_t i = 0; i < n; ++i) {
      if (parameter_gradients) outer_acc(&gpremix[i * f], &c.x[i * f], g.layers[l].premix_w, nullptr);
      affine_transpose_acc(p.premix_w, &gpremix[i * f], &gx[i * f]);
    }
  }
  // Radial basis: d f_k/d d, d f_k/d mu_k, d f_k/d beta_k.
  for (std::size_t e = 0; e < edges; ++e) {
    double gd = 0.0;
    const double* gr = &grbf[e * kr];
    for (std::size_t k = 0; k < kr; ++k) gd += gr[k] * cache.rbf_slope[e * kr + k];
    out.distance_grad[cache.slot[e]] += gd;
    if (parameter_gradients && config.trainable_rbf) {
      const double ex = std::exp(config.cutoff_lower - cache.dist[e]);
      for (std::size_t k = 0; k < kr; ++k) {
        const double fk = cache.rbf[e * kr + k];
        const double diff = ex - params.rbf_means.data[k];
        g.rbf_means.data[k] += gr[k] * fk * 2.0 * params.rbf_betas.data[k] * diff;
        g.rbf_betas.data[k] -= gr[k] * fk * diff * diff;
      }
    }
  }
  if (parameter_gradients) {
    for (std::size_t i = 0; i < system.real_size(); ++i) {
      double* row = g.embed.row(static_cast<std::size_t>(system.species[i]));
      for (std::size_t a = 0; a < f; ++a) row[a] += gx[i * f + a];
    }
  }
  return out;
}

/// Forces -dE/dr via the per-edge distance adjoint and the distance pullback.
inline std::vector<Vec3> graph_backward_forces(const GNParams& params, const GNConfig& config, const System& system,
                                               const NeighborList& list, const ForwardCache& cache) {
  const std::vector<double> ones(system.num_samples(), 1.0);
  const GraphGradients grads = graph_backward(params, config, system, list, cache, ones, false);
  std::vector<Vec3> forces = distance_pullback(list, grads.distance_grad, system.size());
  for (auto& v : forces) v = -v;
  return forces;
}

/// Exact gradients of sum_s upstream_s E_s with respect to every parameter.
/// Basis means/betas receive gradients only when trainable_rbf is set.
inline GNParams graph_backward_params(const GNParams& params, const GNConfig& config, const System& system,
                                      const NeighborList& list, const ForwardCache& cache,
                                      const std::vector<double>& upstream) {
  return graph_backward(params, config, system, list, cache, upstream, true).params;
}

/// Energies and (when `derivative`) forces of the network alone.
inline EnergyForces graph_energy_forces(const GNParams& params, const GNConfig& config, const System& system,
                                        const NeighborList& list, bool derivative = true) {
  ForwardCache cache;
  EnergyForces out = graph_forward(params, config, system, list, cache);
  if (derivative) out.forces = graph_backward_forces(params, config, system, list, cache);
  return out;
}

/// A system and neighbor list in static-shape form.
struct PaddedInput {
  System system;
  NeighborList neighbors;
};

/// Appends one ghost atom and re-points every sentinel slot to a ghost-ghost
/// edge at distance r_u, so the envelope zeroes its filter. Real-atom outputs
/// are unchanged.
inline PaddedInput pad_static(const System& system, const NeighborList& list, const GNConfig& config) {
  if (!config.static_shapes) throw ConfigError("pad_static requires static_shapes = true");
  if (system.ghosts != 0) throw InputError("system is already padded");
  if (list.count > list.capacity()) throw OverflowError(list.count, list.capacity());
  PaddedInput out{system, list};
  const std::size_t ghost = system.size();
  out.system.positions.push_back(Vec3{});
  out.system.species.push_back(0);
  out.system.batch.push_back(system.batch.back());
  if (out.system.charges) out.system.charges->push_back(0.0);
  out.system.ghosts = 1;
  const auto g = static_cast<std::int64_t>(ghost);
  for (std::size_t k = 0; k < out.neighbors.capacity(); ++k) {
    if (out.neighbors.occupied(k)) continue;
    out.neighbors.pairs[k] = {g, g};
    out.neighbors.distances[k] = config.cutoff_upper;
    out.neighbors.deltas[k] = Vec3{config.cutoff_upper, 0.0, 0.0};
  }
  return out;
}

}  // namespace mdk
