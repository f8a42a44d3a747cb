#pragma once

#include "smoothfit/additive_fit.hpp"

namespace smoothfit {

/// One-dimensional Nadaraya-Watson estimate of Y on X_j over the grid.
/// Throws empty_neighborhood when the density estimate vanishes at a grid
/// point.
Eigen::VectorXd marginal_nw(const Dataset& data, int j, double h, const Grid& grid,
                            const BackfitOptions& opts = {});

/// Smooth backfitting with Nadaraya-Watson smoothing.
///
/// Components are updated in order 0..d-1, each from the newest values of
/// the others, starting from zero (or from `warm` when given). After the
/// final sweep every component is shifted so that its integral against p_j
/// vanishes; the intercept is the sample mean of Y.
AdditiveFit backfit_nw(const Dataset& data, const Eigen::VectorXd& h, const Grid& grid,
                       const BackfitOptions& opts = {}, const AdditiveFit* warm = nullptr);

AdditiveFit backfit_nw(const Dataset& data, const std::vector<AxisWeights>& axes,
                       const Grid& grid, const BackfitOptions& opts = {},
                       const AdditiveFit* warm = nullptr);

/// Sup-norm over j and grid points of (right side of the NW backfitting
/// equation evaluated at fit) minus fit.
double nw_fixed_point_residual(const Dataset& data, const AdditiveFit& fit,
                               const BackfitOptions& opts = {});

}  // namespace smoothfit
