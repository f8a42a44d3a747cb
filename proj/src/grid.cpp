#include "smoothfit/grid.hpp"

#include <algorithm>
#include <cmath>

#include "smoothfit/error.hpp"

namespace smoothfit {

Grid::Grid(int size) {
  if (size < 5) throw Error(ErrorCode::invalid_input, "grid needs at least 5 points");
  points_ = Eigen::VectorXd::LinSpaced(size, 0.0, 1.0);
  points_[size - 1] = 1.0;
  spacing_ = 1.0 / (size - 1);
  weights_ = Eigen::VectorXd::Constant(size, spacing_);
  weights_[0] = weights_[size - 1] = 0.5 * spacing_;
}

double Grid::integrate(const Eigen::VectorXd& values) const { return weights_.dot(values); }

double Grid::interpolate(const Eigen::VectorXd& values, double x) const {
  const int last = size() - 1;
  x = std::clamp(x, 0.0, 1.0);
  int lo = std::clamp(static_cast<int>(std::floor(x * last)), 0, last - 1);
  // x * last can round across a node; settle on the bracketing pair.
  if (x < points_[lo]) --lo;
  else if (x >= points_[lo + 1] && lo + 1 < last) ++lo;
  if (x == points_[lo]) return values[lo];
  if (x == points_[lo + 1]) return values[lo + 1];
  double t = (x - points_[lo]) / (points_[lo + 1] - points_[lo]);
  return (1.0 - t) * values[lo] + t * values[lo + 1];
}

}  // namespace smoothfit
