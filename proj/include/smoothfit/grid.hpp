#pragma once

#include <Eigen/Dense>

namespace smoothfit {

/// Equally spaced evaluation grid on [0, 1] with trapezoid quadrature weights.
class Grid {
 public:
  static constexpr int default_size = 25;

  explicit Grid(int size = default_size);

  int size() const noexcept { return static_cast<int>(points_.size()); }
  double spacing() const noexcept { return spacing_; }
  double operator[](int g) const noexcept { return points_[g]; }
  const Eigen::VectorXd& points() const noexcept { return points_; }
  const Eigen::VectorXd& weights() const noexcept { return weights_; }

  /// Trapezoid integral of values sampled on the grid.
  double integrate(const Eigen::VectorXd& values) const;

  /// Piecewise-linear interpolation of grid values at x in [0, 1].
  double interpolate(const Eigen::VectorXd& values, double x) const;

 private:
  Eigen::VectorXd points_;
  Eigen::VectorXd weights_;
  double spacing_;
};

}  // namespace smoothfit
