#include "smoothfit/additive_fit.hpp"

#include "smoothfit/error.hpp"

namespace smoothfit {

const char* to_string(Smoother s) noexcept { return s == Smoother::nw ? "nw" : "ll"; }

double predict(const AdditiveFit& fit, const Eigen::Ref<const Eigen::VectorXd>& x) {
  if (x.size() != fit.d())
    throw Error(ErrorCode::invalid_input, "prediction point has wrong dimension");
  double v = fit.intercept;
  for (int j = 0; j < fit.d(); ++j) {
    if (!(x[j] >= 0.0 && x[j] <= 1.0))
      throw Error(ErrorCode::domain, "prediction point outside [0,1]^d on axis " +
                                         std::to_string(j + 1));
    v += fit.grid.interpolate(fit.components[j], x[j]);
  }
  return v;
}

Eigen::VectorXd predict_rows(const AdditiveFit& fit, const Eigen::MatrixXd& x) {
  Eigen::VectorXd out(x.rows());
  for (Eigen::Index i = 0; i < x.rows(); ++i) out[i] = predict(fit, x.row(i).transpose());
  return out;
}

std::vector<AxisWeights> make_axes(const Dataset& data, const Eigen::VectorXd& h,
                                   const Grid& grid, const BackfitOptions& opts) {
  if (h.size() != data.d())
    throw Error(ErrorCode::invalid_input, "expected " + std::to_string(data.d()) +
                                              " bandwidths, got " + std::to_string(h.size()));
  std::vector<AxisWeights> axes;
  axes.reserve(static_cast<std::size_t>(data.d()));
  for (Eigen::Index j = 0; j < data.d(); ++j)
    axes.push_back(axis_weights(opts.kernel, data.x.col(j), h[j], grid, opts.normalization));
  return axes;
}

}  // namespace smoothfit
