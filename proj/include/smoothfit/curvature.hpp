#pragma once

#include <Eigen/Dense>
#include <vector>

#include "smoothfit/grid.hpp"
#include "smoothfit/kernel.hpp"

namespace smoothfit {

/// Second-derivative estimate of a fitted component on its grid.
struct CurvatureCurve {
  Grid grid;
  Eigen::VectorXd values;
  double pilot_bandwidth = 0.0;
  /// Grid points where fewer than three grid nodes had positive weight and
  /// the three nearest nodes were used with equal weights instead.
  std::vector<int> widened;
};

enum class PilotRule { proportional, rate_adjusted };

/// g = factor * h (proportional) or g = factor * h^(5/7) (rate_adjusted).
double pilot_bandwidth(double h, double factor, PilotRule rule = PilotRule::proportional);

/// Local quadratic fit to a curve sampled on grid, weighted by
/// L((v - u) / g) times the trapezoid weights; returns twice the quadratic
/// coefficient at every grid point. Near the edges the truncated window is
/// used as is.
CurvatureCurve second_derivative(const Grid& grid, const Eigen::VectorXd& curve, double g,
                                 const Kernel& L = Kernel::biweight());

/// Weights a_v with m''(u) = sum_v a_v curve(v) for the local quadratic fit at u.
Eigen::VectorXd curvature_weights(const Grid& grid, double u, double g,
                                  const Kernel& L = Kernel::biweight(),
                                  bool* widened = nullptr);

struct EquivalentKernelMoments {
  double i0 = 0.0, i1 = 0.0, i2 = 0.0;
  bool skipped = false;
};

/// Moments of the equivalent kernel implied by curvature_weights at an
/// interior u (g <= u <= 1 - g). Expected (0, 0, 1). Boundary points are
/// reported as skipped.
EquivalentKernelMoments equivalent_kernel_check(const Kernel& L, double g, double u,
                                                const Grid& grid = Grid());

/// Linear interpolation of a curvature curve at every entry of x.
Eigen::VectorXd curvature_at(const CurvatureCurve& c, const Eigen::VectorXd& x);

}  // namespace smoothfit
