#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "mdk/core/error.hpp"
#include "mdk/core/units.hpp"

namespace mdk {

struct ValueSlope {
  double value;
  double slope;
};

/// Cosine cutoff envelope phi(d) and its derivative.
///
/// With r_l = 0 this is (cos(pi d / r_u) + 1)/2 on [0, r_u]; with r_l > 0 it is
/// the bump (cos(pi (2 (d - r_l)/(r_u - r_l) + 1)) + 1)/2 on [r_l, r_u]. Zero
/// outside. Continuous everywhere and C1 at r_u.
inline ValueSlope cosine_cutoff_with_slope(double d, double lower, double upper) {
  using units::pi;
  if (lower > 0.0) {
    if (d < lower || d > upper) return {0.0, 0.0};
    const double w = upper - lower;
    const double theta = pi * (2.0 * (d - lower) / w + 1.0);
    return {0.5 * (std::cos(theta) + 1.0), -0.5 * std::sin(theta) * 2.0 * pi / w};
  }
  if (d > upper) return {0.0, 0.0};
  const double theta = pi * d / upper;
  return {0.5 * (std::cos(theta) + 1.0), -0.5 * std::sin(theta) * pi / upper};
}

inline double cosine_cutoff(double d, double lower, double upper) {
  return cosine_cutoff_with_slope(d, lower, upper).value;
}

/// Exponential-normal radial basis f_k(d) = exp(-beta_k (exp(r_l - d) - mu_k)^2).
struct ExpNormBasis {
  std::vector<double> means;
  std::vector<double> betas;
  double cutoff_lower = 0.0;

  /// Means spaced linearly on [exp(-(r_u - r_l)), 1]; betas (2/K (1 - exp(-(r_u - r_l))))^-2.
  static ExpNormBasis initial(std::size_t k, double lower, double upper) {
    if (k == 0) throw ConfigError("num_rbf must be at least 1");
    ExpNormBasis basis;
    basis.cutoff_lower = lower;
    const double start = std::exp(-(upper - lower));
    basis.means.resize(k);
    for (std::size_t i = 0; i < k; ++i) {
      basis.means[i] = k == 1 ? start : start + (1.0 - start) * static_cast<double>(i) / static_cast<double>(k - 1);
    }
    const double width = 2.0 / static_cast<double>(k) * (1.0 - start);
    basis.betas.assign(k, 1.0 / (width * width));
    return basis;
  }

  std::size_t size() const { return means.size(); }

  /// Writes values and, when `slopes` is non-null, d f_k / d d.
  void evaluate(double d, double* values, double* slopes = nullptr) const {
    const double ex = std::exp(cutoff_lower - d);
    for (std::size_t k = 0; k < means.size(); ++k) {
      const double diff = ex - means[k];
      const double f = std::exp(-betas[k] * diff * diff);
      values[k] = f;
      if (slopes) slopes[k] = 2.0 * betas[k] * f * diff * ex;
    }
  }

  std::vector<double> operator()(double d) const {
    std::vector<double> out(size());
    evaluate(d, out.data());
    return out;
  }
};

}  // namespace mdk
