#pragma once

#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mdk/core/energy_forces.hpp"
#include "mdk/core/error.hpp"

namespace mdk {

enum class Stage { train, val, test };

using Metrics = std::map<std::string, double>;

/// Reference energies per sample and optional reference forces per atom.
struct Targets {
  std::vector<double> energy;
  std::optional<std::vector<Vec3>> forces;
};

/// Energy/force errors for one stage.
///
/// train: "loss" = y_weight MSE(E) + neg_dy_weight MSE(F), with the parts as
/// "mse_y" / "mse_neg_dy"; val: "l1_*" and "mse_*" for both and the same
/// "loss"; test: "l1_y" and "l1_neg_dy" only. Force errors average over the
/// 3N components and are reported only when both sides carry forces.
inline Metrics loss_and_metrics(const EnergyForces& pred, const Targets& target, double y_weight,
                                double neg_dy_weight, Stage stage) {
  if (pred.energy.size() != target.energy.size()) {
    throw InputError("shape mismatch: " + std::to_string(pred.energy.size()) + " predicted energies for " +
                     std::to_string(target.energy.size()) + " targets");
  }
  if (neg_dy_weight > 0.0 && (!target.forces || pred.forces.empty())) {
    throw InputError("neg_dy_weight > 0 requires predicted and reference forces");
  }
  double l1_y = 0.0, mse_y = 0.0;
  for (std::size_t s = 0; s < pred.energy.size(); ++s) {
    const double d = pred.energy[s] - target.energy[s];
    l1_y += std::abs(d);
    mse_y += d * d;
  }
  const double ns = static_cast<double>(pred.energy.size());
  l1_y /= ns;
  mse_y /= ns;

  const bool forces = target.forces && !pred.forces.empty();
  double l1_f = 0.0, mse_f = 0.0;
  if (forces) {
    if (target.forces->size() != pred.forces.size()) {
      throw InputError("shape mismatch: " + std::to_string(pred.forces.size()) + " predicted force rows for " +
                       std::to_string(target.forces->size()) + " targets");
    }
    for (std::size_t i = 0; i < pred.forces.size(); ++i) {
      for (std::size_t d = 0; d < 3; ++d) {
        const double e = pred.forces[i][d] - (*target.forces)[i][d];
        l1_f += std::abs(e);
        mse_f += e * e;
      }
    }
    const double nc = 3.0 * static_cast<double>(pred.forces.size());
    l1_f /= nc;
    mse_f /= nc;
  }

  Metrics m;
  const double loss = y_weight * mse_y + (forces ? neg_dy_weight * mse_f : 0.0);
  switch (stage) {
    case Stage::train:
      m["loss"] = loss;
      m["mse_y"] = mse_y;
      if (forces) m["mse_neg_dy"] = mse_f;
      break;
    case Stage::val:
      m["loss"] = loss;
      m["l1_y"] = l1_y;
      m["mse_y"] = mse_y;
      if (forces) {
        m["l1_neg_dy"] = l1_f;
        m["mse_neg_dy"] = mse_f;
      }
      break;
    case Stage::test:
      m["l1_y"] = l1_y;
      if (forces) m["l1_neg_dy"] = l1_f;
      break;
  }
  return m;
}

/// alpha * value + (1 - alpha) * prev; the first value passes through.
inline double ema_update(std::optional<double> prev, double value, double alpha) {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw ConfigError("EMA alpha must lie in (0, 1]");
  if (!prev) return value;
  return alpha * value + (1.0 - alpha) * *prev;
}

}  // namespace mdk
