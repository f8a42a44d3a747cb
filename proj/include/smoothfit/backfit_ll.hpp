#pragma once

#include "smoothfit/additive_fit.hpp"

namespace smoothfit {

struct LocalLinearCurve {
  Eigen::VectorXd level;
  Eigen::VectorXd slope;
};

/// Solves the 2x2 system M x = b by adjugate. When |det| falls below
/// 1e-12 (m00^2 + m11^2) a ridge 1e-9 (m00 + m11) is added to the diagonal.
/// Returns false if the system is singular even after the ridge.
bool solve_moment_system(double m00, double m01, double m11, double b0, double b1,
                         double& x0, double& x1) noexcept;

/// Ordinary local-linear fit of Y on X_j: level and slope at each grid point.
LocalLinearCurve marginal_ll(const Dataset& data, int j, double h, const Grid& grid,
                             const BackfitOptions& opts = {});

/// Smooth backfitting with local-linear smoothing. Levels and slopes are
/// iterated jointly; after the final sweep each level curve is shifted so the
/// norming condition holds, leaving the intercept at mean(Y).
AdditiveFit backfit_ll(const Dataset& data, const Eigen::VectorXd& h, const Grid& grid,
                       const BackfitOptions& opts = {}, const AdditiveFit* warm = nullptr);

AdditiveFit backfit_ll(const Dataset& data, const std::vector<AxisWeights>& axes,
                       const Grid& grid, const BackfitOptions& opts = {},
                       const AdditiveFit* warm = nullptr);

/// Sup-norm of the residual of the local-linear backfitting equations over
/// levels and slopes.
double ll_fixed_point_residual(const Dataset& data, const AdditiveFit& fit,
                               const BackfitOptions& opts = {});

/// Dispatch on smoother.
AdditiveFit backfit(Smoother s, const Dataset& data, const Eigen::VectorXd& h,
                    const Grid& grid, const BackfitOptions& opts = {},
                    const AdditiveFit* warm = nullptr);

}  // namespace smoothfit
