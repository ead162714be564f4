#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "mdk/core/error.hpp"

namespace mdk {

/// Adam with bias correction.
struct Adam {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  std::uint64_t t = 0;
  std::vector<double> m, v;

  void step(std::span<double> params, std::span<const double> grads, double lr) {
    if (params.size() != grads.size()) throw InputError("Adam: parameter/gradient size mismatch");
    if (m.empty()) {
      m.assign(params.size(), 0.0);
      v.assign(params.size(), 0.0);
    }
    if (m.size() != params.size()) throw InputError("Adam: parameter count changed between steps");
    ++t;
    const double c1 = 1.0 - std::pow(beta1, static_cast<double>(t));
    const double c2 = 1.0 - std::pow(beta2, static_cast<double>(t));
    for (std::size_t i = 0; i < params.size(); ++i) {
      m[i] = beta1 * m[i] + (1.0 - beta1) * grads[i];
      v[i] = beta2 * v[i] + (1.0 - beta2) * grads[i] * grads[i];
      params[i] -= lr * (m[i] / c1) / (std::sqrt(v[i] / c2) + eps);
    }
  }

  friend bool operator==(const Adam&, const Adam&) = default;
};

/// Linear warmup followed by reduce-on-plateau with a floor, plus early stopping.
///
/// Key names follow the configuration vocabulary (lr, lr_warmup_steps, lr_factor,
/// lr_patience, lr_min, early_stopping_patience).
struct LRSchedule {
  double lr = 1e-3;
  std::uint64_t lr_warmup_steps = 0;
  double lr_factor = 0.8;
  std::uint64_t lr_patience = 10;
  double lr_min = 1e-7;
  std::uint64_t early_stopping_patience = 30;

  void validate() const {
    if (!(lr > 0.0)) throw ConfigError("lr must be positive");
    if (!(lr_factor > 0.0 && lr_factor < 1.0)) throw ConfigError("lr_factor must lie in (0, 1)");
    if (lr_patience < 1) throw ConfigError("lr_patience must be >= 1");
    if (!(lr_min >= 0.0 && lr_min <= lr)) throw ConfigError("lr_min must lie in [0, lr]");
    if (early_stopping_patience < 1) throw ConfigError("early_stopping_patience must be >= 1");
  }
};

struct ScheduleState {
  double lr = 0.0;  // plateau-adjusted base rate
  std::optional<double> best;
  std::uint64_t bad_epochs = 0;        // since the last improvement or decay
  std::uint64_t epochs_since_best = 0;
  std::uint64_t epoch = 0;             // completed epochs
  friend bool operator==(const ScheduleState&, const ScheduleState&) = default;
};

struct EpochDecision {
  bool decayed = false;
  bool stop = false;
  bool improved = false;
};

class Scheduler {
 public:
  Scheduler() = default;
  explicit Scheduler(LRSchedule config) : config_(config) {
    config_.validate();
    state_.lr = config_.lr;
  }
  Scheduler(LRSchedule config, ScheduleState state) : config_(config), state_(state) { config_.validate(); }

  /// Learning rate for optimizer step `step` (1-based): lr * step / warmup while warming up.
  double lr_at(std::uint64_t step) const {
    if (config_.lr_warmup_steps > 0 && step < config_.lr_warmup_steps) {
      return state_.lr * static_cast<double>(step) / static_cast<double>(config_.lr_warmup_steps);
    }
    return state_.lr;
  }

  /// Feeds the epoch's (smoothed) validation loss. Decays once `lr_patience`
  /// consecutive epochs fail to improve on the best value, then restarts the
  /// count; stops once `early_stopping_patience` epochs pass without improvement.
  EpochDecision end_epoch(double val_loss) {
    EpochDecision d;
    ++state_.epoch;
    if (!state_.best || val_loss < *state_.best) {
      state_.best = val_loss;
      state_.bad_epochs = 0;
      state_.epochs_since_best = 0;
      d.improved = true;
      return d;
    }
    ++state_.bad_epochs;
    ++state_.epochs_since_best;
    if (state_.bad_epochs >= config_.lr_patience) {
      const double next = std::max(state_.lr * config_.lr_factor, config_.lr_min);
      d.decayed = next < state_.lr;
      state_.lr = next;
      state_.bad_epochs = 0;
    }
    d.stop = state_.epochs_since_best >= config_.early_stopping_patience;
    return d;
  }

  const LRSchedule& config() const { return config_; }
  const ScheduleState& state() const { return state_; }

 private:
  LRSchedule config_;
  ScheduleState state_;
};

}  // namespace mdk
