#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace smoothfit {

/// n observations of d covariates in [0, 1]^d plus a scalar response.
struct Dataset {
  Eigen::MatrixXd x;  // n x d, column j holds covariate j
  Eigen::VectorXd y;

  Dataset() = default;
  Dataset(Eigen::MatrixXd covariates, Eigen::VectorXd response);

  Eigen::Index n() const noexcept { return x.rows(); }
  Eigen::Index d() const noexcept { return x.cols(); }

  /// Copy with only the listed covariate columns.
  Dataset select_columns(const std::vector<int>& columns) const;
};

/// Throws invalid_input naming the first row with a covariate outside [0, 1].
void require_unit_cube(const Dataset& data);

/// Affine map applied per axis: x_scaled = (x - offset) / scale.
struct AffineMap {
  Eigen::VectorXd offset;
  Eigen::VectorXd scale;
};

/// Min-max scales every covariate into [0, 1] in place.
AffineMap rescale_minmax(Dataset& data);

/// Reads a CSV file with header x1,...,xd,y. Errors carry the 1-based line
/// number. Covariates are not range checked here.
Dataset read_csv(const std::string& path);
Dataset parse_csv(const std::string& text);

}  // namespace smoothfit
