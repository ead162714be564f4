#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <string>
#include <vector>

#include "mdk/core/error.hpp"
#include "mdk/core/vec3.hpp"

namespace mdk {

/// Root mean square deviation of `frame` from `reference`. With `align`, the
/// frame is first superposed on the reference by the optimal rotation and
/// translation (Kabsch, reflections excluded).
inline double rmsd(const std::vector<Vec3>& reference, const std::vector<Vec3>& frame, bool align = true) {
  const std::size_t n = reference.size();
  if (frame.size() != n) {
    throw InputError("rmsd: reference has " + std::to_string(n) + " atoms, frame has " + std::to_string(frame.size()));
  }
  if (n == 0) return 0.0;
  Eigen::Matrix3Xd p(3, n), q(3, n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto col = static_cast<Eigen::Index>(i);
    p.col(col) << reference[i][0], reference[i][1], reference[i][2];
    q.col(col) << frame[i][0], frame[i][1], frame[i][2];
  }
  if (align) {
    p.colwise() -= p.rowwise().mean();
    q.colwise() -= q.rowwise().mean();
    const Eigen::Matrix3d h = q * p.transpose();
    const Eigen::JacobiSVD<Eigen::Matrix3d> svd(h, Eigen::ComputeFullU | Eigen::ComputeFullV);
    Eigen::Matrix3d correction = Eigen::Matrix3d::Identity();
    if ((svd.matrixV() * svd.matrixU().transpose()).determinant() < 0.0) correction(2, 2) = -1.0;
    const Eigen::Matrix3d rotation = svd.matrixV() * correction * svd.matrixU().transpose();
    q = rotation * q;
  }
  return std::sqrt((q - p).squaredNorm() / static_cast<double>(n));
}

}  // namespace mdk
