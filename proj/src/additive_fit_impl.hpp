#pragma once

// Helpers shared by the two backfitting solvers. Not installed.

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "smoothfit/additive_fit.hpp"
#include "smoothfit/error.hpp"

namespace smoothfit::detail {

inline void check_axes(const Dataset& data, const std::vector<AxisWeights>& axes,
                       const Grid& grid) {
  if (data.n() == 0) throw Error(ErrorCode::invalid_input, "dataset is empty");
  if (data.d() == 0) throw Error(ErrorCode::invalid_input, "dataset has no covariates");
  if (static_cast<Eigen::Index>(axes.size()) != data.d())
    throw Error(ErrorCode::invalid_input, "need one bandwidth per covariate");
  for (const auto& a : axes)
    if (a.w.rows() != grid.size() || a.w.cols() != data.n())
      throw Error(ErrorCode::invalid_input, "axis weights do not match grid or data");
}

/// Absolute floor for the relative change denominator, so that exactly
/// constant responses converge instead of chasing rounding noise.
inline double change_floor(const Dataset& data) {
  double scale = data.y.cwiseAbs().maxCoeff();
  return 1e-10 * (scale > 0.0 ? scale : 1.0);
}

inline double sup_norm(const std::vector<Eigen::VectorXd>& curves) {
  double s = 0.0;
  for (const auto& c : curves) s = std::max(s, c.cwiseAbs().maxCoeff());
  return s;
}

inline std::string grid_point_label(const Grid& grid, int g, int j) {
  return "u = " + std::to_string(grid[g]) + " on axis " + std::to_string(j + 1);
}

inline bool usable_warm_start(const AdditiveFit* warm, Smoother s, Eigen::Index d, int G) {
  if (!warm || warm->smoother != s || warm->d() != d) return false;
  for (const auto& c : warm->components)
    if (c.size() != G) return false;
  return true;
}

}  // namespace smoothfit::detail
