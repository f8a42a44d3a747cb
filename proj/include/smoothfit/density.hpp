#pragma once

#include <Eigen/Dense>

#include "smoothfit/dataset.hpp"
#include "smoothfit/grid.hpp"
#include "smoothfit/kernel.hpp"

namespace smoothfit {

/// How K_h(u, v) is normalized over u.
///
/// `exact` uses the closed-form integral over [0, 1] (boundary_weight).
/// `grid` divides by the trapezoid sum of the same kernel over the evaluation
/// grid, so that every discretized integral identity used by the solvers
/// (unit mass of p_j, marginals of p_jk, the norming conditions) holds to
/// rounding error.
enum class Normalization { grid, exact };

/// Kernel weights of one covariate against the evaluation grid.
struct AxisWeights {
  double h = 0.0;
  Eigen::MatrixXd w;       // G x n, K_h(u_g, X^i)
  Eigen::MatrixXd offset;  // G x n, K_h(u_g, X^i) * (X^i - u_g)
};

AxisWeights axis_weights(const Kernel& k, const Eigen::VectorXd& x, double h,
                         const Grid& grid,
                         Normalization norm = Normalization::grid);

struct DensityCurve {
  Grid grid;
  Eigen::VectorXd values;
};

struct PairDensitySurface {
  Grid grid_j, grid_k;
  Eigen::MatrixXd values;  // [g_j, g_k]
};

/// Entries of the symmetric local design matrix M_j(u) on the grid.
struct LocalMomentField {
  Grid grid;
  Eigen::VectorXd m00, m01, m11;
  const Eigen::VectorXd& p1() const noexcept { return m01; }
};

/// The four entries of S_lj(u_l, u_j), each stored as [g_l, g_j].
///   s11 = sum K_l K_j
///   s12 = sum K_l K_j (X_l - u_l)
///   s21 = sum K_l K_j (X_j - u_j)
///   s22 = sum K_l K_j (X_l - u_l)(X_j - u_j)
/// all divided by n. Row 2 carries the offset of the equation's own axis j.
struct CrossMomentSurface {
  Grid grid_l, grid_j;
  Eigen::MatrixXd s11, s12, s21, s22;
};

DensityCurve marginal_density(const Dataset& data, int j, double h,
                              const Grid& grid,
                              const Kernel& k = Kernel::biweight(),
                              Normalization norm = Normalization::grid);

PairDensitySurface pair_density(const Dataset& data, int j, int k, double h_j,
                                double h_k, const Grid& grid_j,
                                const Grid& grid_k,
                                const Kernel& kern = Kernel::biweight(),
                                Normalization norm = Normalization::grid);

LocalMomentField local_moments(const Dataset& data, int j, double h,
                               const Grid& grid,
                               const Kernel& k = Kernel::biweight(),
                               Normalization norm = Normalization::grid);

CrossMomentSurface cross_moments(const Dataset& data, int l, int j, double h_l,
                                 double h_j, const Grid& grid_l,
                                 const Grid& grid_j,
                                 const Kernel& k = Kernel::biweight(),
                                 Normalization norm = Normalization::grid);

}  // namespace smoothfit
