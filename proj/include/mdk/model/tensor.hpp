#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

namespace mdk {

/// Dense row-major matrix of doubles. Vectors are rows x 1.
struct Tensor {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Tensor() = default;
  Tensor(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}

  std::size_t size() const { return data.size(); }
  double* row(std::size_t r) { return data.data() + r * cols; }
  const double* row(std::size_t r) const { return data.data() + r * cols; }
  double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

  void fill(double v) { std::fill(data.begin(), data.end(), v); }

  friend bool operator==(const Tensor&, const Tensor&) = default;
};

/// y = W x (+ b). W is out x in.
inline void affine(const Tensor& w, const double* x, const Tensor* b, double* y) {
  for (std::size_t r = 0; r < w.rows; ++r) {
    const double* wr = w.row(r);
    double acc = b ? b->data[r] : 0.0;
    for (std::size_t c = 0; c < w.cols; ++c) acc += wr[c] * x[c];
    y[r] = acc;
  }
}

/// x_grad += W^T y_grad.
inline void affine_transpose_acc(const Tensor& w, const double* y_grad, double* x_grad) {
  for (std::size_t r = 0; r < w.rows; ++r) {
    const double g = y_grad[r];
    if (g == 0.0) continue;
    const double* wr = w.row(r);
    for (std::size_t c = 0; c < w.cols; ++c) x_grad[c] += wr[c] * g;
  }
}

/// W_grad += y_grad x^T; b_grad += y_grad.
inline void outer_acc(const double* y_grad, const double* x, Tensor& w_grad, Tensor* b_grad) {
  for (std::size_t r = 0; r < w_grad.rows; ++r) {
    const double g = y_grad[r];
    if (b_grad) b_grad->data[r] += g;
    if (g == 0.0) continue;
    double* wr = w_grad.row(r);
    for (std::size_t c = 0; c < w_grad.cols; ++c) wr[c] += g * x[c];
  }
}

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }
inline double silu(double x) { return x * sigmoid(x); }
inline double silu_slope(double x) {
  const double s = sigmoid(x);
  return s * (1.0 + x * (1.0 - s));
}

/// Uniform double in [0, 1) from 53 random bits; identical across standard libraries.
inline double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace mdk
