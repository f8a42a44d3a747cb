#pragma once

#include <Eigen/Dense>
#include <vector>

#include "smoothfit/density.hpp"
#include "smoothfit/grid.hpp"
#include "smoothfit/kernel.hpp"

namespace smoothfit {

enum class Smoother { nw, ll };

const char* to_string(Smoother s) noexcept;

/// Inner fixed-point iteration controls shared by both solvers.
struct BackfitOptions {
  Kernel kernel = Kernel::biweight();
  int max_sweeps = 200;
  double tol = 1e-6;  // sup-norm change relative to sup-norm of components
  Normalization normalization = Normalization::grid;
};

/// Output of a smooth backfitting solve. For the local-linear smoother
/// `slopes` carries the derivative curves; it is empty for Nadaraya-Watson.
struct AdditiveFit {
  Smoother smoother = Smoother::nw;
  Grid grid;
  double intercept = 0.0;
  std::vector<Eigen::VectorXd> components;
  std::vector<Eigen::VectorXd> slopes;
  Eigen::VectorXd bandwidths;
  int iterations = 0;
  bool converged = false;
  /// Relative sup-norm change after each sweep.
  std::vector<double> changes;

  int d() const noexcept { return static_cast<int>(components.size()); }
};

using AdditiveFitNW = AdditiveFit;
using AdditiveFitLL = AdditiveFit;

/// intercept + sum_j interpolated component j at x_j. Throws domain when x
/// leaves [0, 1]^d.
double predict(const AdditiveFit& fit, const Eigen::Ref<const Eigen::VectorXd>& x);

/// Predictions at every row of data.x.
Eigen::VectorXd predict_rows(const AdditiveFit& fit, const Eigen::MatrixXd& x);

inline double predict_nw(const AdditiveFit& fit, const Eigen::Ref<const Eigen::VectorXd>& x) {
  return predict(fit, x);
}
inline double predict_ll(const AdditiveFit& fit, const Eigen::Ref<const Eigen::VectorXd>& x) {
  return predict(fit, x);
}

/// Builds the per-axis kernel weights for bandwidth vector h.
std::vector<AxisWeights> make_axes(const Dataset& data, const Eigen::VectorXd& h,
                                   const Grid& grid, const BackfitOptions& opts);

}  // namespace smoothfit
