#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "mdk/core/error.hpp"
#include "mdk/model/potential.hpp"
#include "mdk/train/dataset.hpp"
#include "mdk/train/loss.hpp"
#include "mdk/train/optim.hpp"
#include "mdk/train/split.hpp"

namespace mdk {

/// Training hyperparameters; names follow the configuration vocabulary.
struct TrainConfig {
  GNConfig model;
  LRSchedule schedule;
  std::uint64_t num_epochs = 100;
  std::size_t batch_size = 32;
  std::size_t inference_batch_size = 64;
  double y_weight = 1.0;
  double neg_dy_weight = 0.0;
  double ema_alpha_y = 1.0;
  double ema_alpha_neg_dy = 1.0;
  double train_size = 0.8;
  double val_size = 0.1;
  std::uint64_t seed = 1;
  /// Derive the network's mean/std from the training targets (after fixed priors).
  bool standardize = true;

  void validate() const {
    model.validate();
    schedule.validate();
    if (batch_size < 1 || inference_batch_size < 1) throw ConfigError("batch sizes must be >= 1");
    if (num_epochs < 1) throw ConfigError("num_epochs must be >= 1");
    if (!(y_weight >= 0.0) || !(neg_dy_weight >= 0.0)) throw ConfigError("loss weights must be non-negative");
    if (neg_dy_weight > 0.0) {
      throw ConfigError(
          "neg_dy_weight > 0 is not supported for training: the force loss would need parameter gradients of "
          "the forces (double backpropagation), which this trainer does not implement; set neg_dy_weight: 0 "
          "(force errors are still reported during validation and testing)");
    }
    if (!(ema_alpha_y > 0.0 && ema_alpha_y <= 1.0) || !(ema_alpha_neg_dy > 0.0 && ema_alpha_neg_dy <= 1.0)) {
      throw ConfigError("ema_alpha_y and ema_alpha_neg_dy must lie in (0, 1]");
    }
  }
};

struct TrainerState {
  std::uint64_t step = 0;
  std::uint64_t epoch = 0;
  Adam adam;
  ScheduleState schedule;
  std::optional<double> ema_train_y, ema_val_y, ema_val_neg_dy;
  std::optional<double> best_val;
  friend bool operator==(const TrainerState&, const TrainerState&) = default;
};

struct EpochRecord {
  std::uint64_t epoch = 0;
  double lr = 0.0;
  double train_loss = 0.0;
  double train_ema = 0.0;
  double val_loss = 0.0;  // smoothed value fed to the scheduler
  bool decayed = false;
  friend bool operator==(const EpochRecord&, const EpochRecord&) = default;
};

struct Checkpoint {
  static constexpr std::uint32_t current_version = 1;
  std::uint32_t version = current_version;
  TrainConfig config;
  /// Parameters with the best smoothed validation loss.
  GNParams params;
  /// Priors as evaluated, including the trained Atomref table when learnable.
  PriorStack priors;
  TrainerState state;
  SplitIndices split;
  std::vector<EpochRecord> history;
  /// Validation metrics of the freshly initialized model.
  Metrics initial_val_metrics;
  Metrics test_metrics;

  ComposedPotential potential() const {
    ComposedPotential p;
    p.network = GraphModel{config.model, params};
    p.priors = priors;
    return p;
  }
};

/// Optional instrumentation for train().
struct TrainHooks {
  /// Replaces the measured (smoothed) validation loss of each epoch (1-based).
  std::function<double(std::uint64_t epoch, double measured)> val_loss;
  /// Called after every epoch.
  std::function<void(const EpochRecord&)> on_epoch;
};

namespace detail {

inline std::vector<double> flatten(const GNParams& params, const PriorStack& priors) {
  std::vector<double> out;
  params.for_each([&](const std::string&, const Tensor& t) { out.insert(out.end(), t.data.begin(), t.data.end()); });
  for (const auto& t : priors.terms) {
    if (const auto* a = std::get_if<Atomref>(&t); a && a->learnable) {
      for (const auto& [z, e] : a->table) out.push_back(e);
    }
  }
  return out;
}

inline void unflatten(std::span<const double> flat, GNParams& params, PriorStack& priors) {
  std::size_t k = 0;
  params.for_each([&](const std::string&, Tensor& t) {
    for (auto& v : t.data) v = flat[k++];
  });
  for (auto& t : priors.terms) {
    if (auto* a = std::get_if<Atomref>(&t); a && a->learnable) {
      for (auto& [z, e] : a->table) e = flat[k++];
    }
  }
}

inline PriorStack fixed_priors(const PriorStack& priors) {
  PriorStack out;
  for (const auto& t : priors.terms) {
    if (const auto* a = std::get_if<Atomref>(&t); a && a->learnable) continue;
    out.terms.push_back(t);
  }
  return out;
}

inline NeighborList batch_neighbors(const ComposedPotential& pot, const System& system) {
  NeighborSpec spec = pot.neighbor_spec(system.size(), pot.network ? pot.network->config.max_num_neighbors : 64);
  try {
    return build_neighbor_list(system, spec);
  } catch (const OverflowError& e) {
    spec.capacity = e.required();
    return build_neighbor_list(system, spec);
  }
}

}  // namespace detail

/// Energies (and forces when `derivative`) for the given frames, evaluated in
/// batches of `batch_size` and concatenated in index order.
inline EnergyForces evaluate_frames(const ComposedPotential& potential, const Dataset& data,
                                    const std::vector<std::size_t>& indices, std::size_t batch_size,
                                    bool derivative, Targets* targets = nullptr) {
  EnergyForces out;
  out.per_atom_energy.reset();
  if (targets) *targets = Targets{};
  ComposedPotential pot = potential;
  pot.derivative = derivative;
  bool all_forces = derivative;
  for (std::size_t b = 0; b < indices.size(); b += batch_size) {
    const std::vector<std::size_t> chunk(indices.begin() + static_cast<std::ptrdiff_t>(b),
                                         indices.begin() + static_cast<std::ptrdiff_t>(std::min(indices.size(), b + batch_size)));
    const Batch batch = assemble_batch(data, chunk);
    const EnergyForces ef = evaluate(pot, batch.system, detail::batch_neighbors(pot, batch.system));
    out.energy.insert(out.energy.end(), ef.energy.begin(), ef.energy.end());
    out.forces.insert(out.forces.end(), ef.forces.begin(), ef.forces.end());
    if (targets) {
      targets->energy.insert(targets->energy.end(), batch.energy.begin(), batch.energy.end());
      all_forces = all_forces && batch.forces.has_value();
      if (batch.forces) {
        if (!targets->forces) targets->forces.emplace();
        targets->forces->insert(targets->forces->end(), batch.forces->begin(), batch.forces->end());
      }
    }
  }
  if (targets && !all_forces) targets->forces.reset();
  return out;
}

/// Mini-batch Adam training of the graph network (plus learnable Atomref
/// entries) on the energy loss, with warmup, reduce-on-plateau, early
/// stopping and EMA-smoothed losses. Deterministic for a given seed.
inline Checkpoint train(const TrainConfig& config_in, const Dataset& data, const PriorStack& priors = {},
                        const TrainHooks& hooks = {}) {
  config_in.validate();
  if (data.size() == 0) throw InputError("training needs a non-empty dataset");
  for (const auto& t : priors.terms) {
    if (std::holds_alternative<CustomPrior>(t)) throw ConfigError("custom priors cannot be checkpointed or trained");
  }
  Checkpoint ckpt;
  ckpt.config = config_in;
  TrainConfig& config = ckpt.config;
  ckpt.split = split(data.size(), config.train_size, config.val_size, config.seed);
  if (ckpt.split.train.empty()) throw ConfigError("training split is empty");

  // Targets minus the fixed priors set the network's standardization.
  const PriorStack fixed = detail::fixed_priors(priors);
  std::vector<double> fixed_energy(data.size(), 0.0);
  if (!fixed.empty()) {
    ComposedPotential only{std::nullopt, fixed, false, config.model.cutoff_upper, config.model.cutoff_lower};
    for (std::size_t i = 0; i < data.size(); ++i) {
      const Batch b = assemble_batch(data, {i});
      fixed_energy[i] = evaluate(only, b.system, detail::batch_neighbors(only, b.system)).energy[0];
    }
  }
  if (config.standardize) {
    double sum = 0.0, sum2 = 0.0;
    for (const auto i : ckpt.split.train) {
      const double per_atom = (data.frames[i].energy - fixed_energy[i]) / static_cast<double>(data.frames[i].size());
      sum += per_atom;
      sum2 += per_atom * per_atom;
    }
    const double n = static_cast<double>(ckpt.split.train.size());
    const double mean = sum / n;
    const double var = std::max(0.0, sum2 / n - mean * mean);
    config.model.mean = mean;
    config.model.std = var > 1e-24 ? std::sqrt(var) : 1.0;
  }

  ComposedPotential pot;
  pot.network = GraphModel{config.model, GNParams::initialize(config.model, config.seed)};
  pot.priors = priors;
  GNParams& params = pot.network->params;
  std::vector<double> flat = detail::flatten(params, pot.priors);
  std::vector<double> grad_flat(flat.size());

  TrainerState& st = ckpt.state;
  Scheduler scheduler(config.schedule);
  GNParams best_params = params;
  PriorStack best_priors = pot.priors;
  std::mt19937_64 rng(config.seed ^ 0x9e3779b97f4a7c15ull);
  std::vector<std::size_t> order = ckpt.split.train;

  const auto validate_epoch = [&](double train_loss) -> double {
    if (ckpt.split.val.empty()) return train_loss;
    Targets target;
    const EnergyForces pred =
        evaluate_frames(pot, data, ckpt.split.val, config.inference_batch_size, data.has_forces(), &target);
    const Metrics m = loss_and_metrics(pred, target, config.y_weight, 0.0, Stage::val);
    st.ema_val_y = ema_update(st.ema_val_y, m.at("mse_y"), config.ema_alpha_y);
    if (m.contains("mse_neg_dy")) st.ema_val_neg_dy = ema_update(st.ema_val_neg_dy, m.at("mse_neg_dy"), config.ema_alpha_neg_dy);
    return config.y_weight * *st.ema_val_y + config.neg_dy_weight * st.ema_val_neg_dy.value_or(0.0);
  };

  if (!ckpt.split.val.empty()) {
    Targets target;
    const EnergyForces pred =
        evaluate_frames(pot, data, ckpt.split.val, config.inference_batch_size, data.has_forces(), &target);
    ckpt.initial_val_metrics = loss_and_metrics(pred, target, config.y_weight, 0.0, Stage::val);
  }

  for (std::uint64_t epoch = 1; epoch <= config.num_epochs; ++epoch) {
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng() % i]);
    double loss_sum = 0.0;
    std::size_t batches = 0;
    for (std::size_t b = 0; b < order.size(); b += config.batch_size) {
      const std::vector<std::size_t> chunk(order.begin() + static_cast<std::ptrdiff_t>(b),
                                           order.begin() + static_cast<std::ptrdiff_t>(std::min(order.size(), b + config.batch_size)));
      const Batch batch = assemble_batch(data, chunk);
      const NeighborList list = detail::batch_neighbors(pot, batch.system);
      ForwardCache cache;
      std::vector<double> energy = graph_forward(params, config.model, batch.system, list, cache).energy;
      for (const auto& t : pot.priors.terms) {
        if (const auto* a = std::get_if<Atomref>(&t); a && a->learnable) {
          const auto e = prior_atomref(batch.system, *a).energy;
          for (std::size_t s = 0; s < energy.size(); ++s) energy[s] += e[s];
        }
      }
      const double ns = static_cast<double>(chunk.size());
      std::vector<double> upstream(chunk.size());
      double loss = 0.0;
      for (std::size_t s = 0; s < chunk.size(); ++s) {
        const double r = energy[s] + fixed_energy[chunk[s]] - batch.energy[s];
        loss += r * r / ns;
        upstream[s] = 2.0 * config.y_weight * r / ns;
      }
      loss *= config.y_weight;
      ++st.step;
      if (!std::isfinite(loss)) {
        throw NumericError("non-finite training loss at epoch " + std::to_string(epoch) + ", step " +
                           std::to_string(st.step) + " (lr " + std::to_string(scheduler.lr_at(st.step)) + ")");
      }
      const GNParams g = graph_backward_params(params, config.model, batch.system, list, cache, upstream);
      std::size_t k = 0;
      g.for_each([&](const std::string&, const Tensor& t) {
        for (const double v : t.data) grad_flat[k++] = v;
      });
      for (const auto& t : pot.priors.terms) {
        if (const auto* a = std::get_if<Atomref>(&t); a && a->learnable) {
          const auto ga = atomref_gradient(batch.system, upstream);
          for (const auto& [z, e] : a->table) {
            const auto it = ga.find(z);
            grad_flat[k++] = it == ga.end() ? 0.0 : it->second;
          }
        }
      }
      st.adam.step(flat, grad_flat, scheduler.lr_at(st.step));
      detail::unflatten(flat, params, pot.priors);
      loss_sum += loss;
      ++batches;
    }
    const double train_loss = loss_sum / static_cast<double>(batches);
    st.ema_train_y = ema_update(st.ema_train_y, train_loss, config.ema_alpha_y);
    double val = validate_epoch(*st.ema_train_y);
    if (hooks.val_loss) val = hooks.val_loss(epoch, val);
    const double lr_used = scheduler.lr_at(st.step);
    const EpochDecision d = scheduler.end_epoch(val);
    st.epoch = epoch;
    st.schedule = scheduler.state();
    if (d.improved) {
      st.best_val = val;
      best_params = params;
      best_priors = pot.priors;
    }
    ckpt.history.push_back({epoch, lr_used, train_loss, *st.ema_train_y, val, d.decayed});
    if (hooks.on_epoch) hooks.on_epoch(ckpt.history.back());
    if (d.stop) break;
  }

  ckpt.params = best_params;
  ckpt.priors = best_priors;
  if (!ckpt.split.test.empty()) {
    Targets target;
    const EnergyForces pred = evaluate_frames(ckpt.potential(), data, ckpt.split.test, config.inference_batch_size,
                                              data.has_forces(), &target);
    ckpt.test_metrics = loss_and_metrics(pred, target, config.y_weight, 0.0, Stage::test);
  }
  return ckpt;
}

}  // namespace mdk
