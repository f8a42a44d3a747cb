#include "smoothfit/density.hpp"

#include <cmath>

#include "smoothfit/error.hpp"

namespace smoothfit {

namespace {

void check_axis(const Dataset& data, int j) {
  if (data.n() == 0) throw Error(ErrorCode::invalid_input, "dataset is empty");
  if (j < 0 || j >= data.d())
    throw Error(ErrorCode::invalid_input, "axis " + std::to_string(j) + " out of range");
}

void check_bandwidth(double h) {
  if (!(h > 0.0) || !std::isfinite(h))
    throw Error(ErrorCode::invalid_bandwidth, "bandwidth must be positive, got " + std::to_string(h));
}

}  // namespace

AxisWeights axis_weights(const Kernel& k, const Eigen::VectorXd& x, double h, const Grid& grid,
                         Normalization norm) {
  check_bandwidth(h);
  const int G = grid.size();
  const Eigen::Index n = x.size();
  AxisWeights out;
  out.h = h;
  out.w.resize(G, n);
  out.offset.resize(G, n);
  const auto& u = grid.points();
  const auto& omega = grid.weights();
  for (Eigen::Index i = 0; i < n; ++i) {
    const double v = x[i];
    double denom = 0.0;
    for (int g = 0; g < G; ++g) {
      double kv = k((v - u[g]) / h);
      out.w(g, i) = kv;
      denom += omega[g] * kv;
    }
    if (norm == Normalization::exact) denom = h * k.mass((v - 1.0) / h, v / h);
    const double scale = denom > 0.0 ? 1.0 / denom : 0.0;
    for (int g = 0; g < G; ++g) {
      out.w(g, i) *= scale;
      out.offset(g, i) = out.w(g, i) * (v - u[g]);
    }
  }
  return out;
}

DensityCurve marginal_density(const Dataset& data, int j, double h, const Grid& grid,
                              const Kernel& k, Normalization norm) {
  check_axis(data, j);
  auto aw = axis_weights(k, data.x.col(j), h, grid, norm);
  return {grid, aw.w.rowwise().sum() / static_cast<double>(data.n())};
}

PairDensitySurface pair_density(const Dataset& data, int j, int k, double h_j, double h_k,
                                const Grid& grid_j, const Grid& grid_k, const Kernel& kern,
                                Normalization norm) {
  check_axis(data, j);
  check_axis(data, k);
  if (j == k) throw Error(ErrorCode::invalid_input, "pair density needs two distinct axes");
  auto wj = axis_weights(kern, data.x.col(j), h_j, grid_j, norm);
  auto wk = axis_weights(kern, data.x.col(k), h_k, grid_k, norm);
  Eigen::MatrixXd p = wj.w * wk.w.transpose() / static_cast<double>(data.n());
  return {grid_j, grid_k, std::move(p)};
}

LocalMomentField local_moments(const Dataset& data, int j, double h, const Grid& grid,
                               const Kernel& k, Normalization norm) {
  check_axis(data, j);
  auto aw = axis_weights(k, data.x.col(j), h, grid, norm);
  const double inv_n = 1.0 / static_cast<double>(data.n());
  LocalMomentField f{grid, {}, {}, {}};
  f.m00 = aw.w.rowwise().sum() * inv_n;
  f.m01 = aw.offset.rowwise().sum() * inv_n;
  // offset^2 / w = w (X - u)^2
  Eigen::VectorXd m11 = Eigen::VectorXd::Zero(grid.size());
  const auto& u = grid.points();
  for (Eigen::Index i = 0; i < data.n(); ++i)
    for (int g = 0; g < grid.size(); ++g) {
      double dx = data.x(i, j) - u[g];
      m11[g] += aw.w(g, i) * dx * dx;
    }
  f.m11 = m11 * inv_n;
  return f;
}

CrossMomentSurface cross_moments(const Dataset& data, int l, int j, double h_l, double h_j,
                                 const Grid& grid_l, const Grid& grid_j, const Kernel& k,
                                 Normalization norm) {
  check_axis(data, l);
  check_axis(data, j);
  if (l == j) throw Error(ErrorCode::invalid_input, "cross moments need two distinct axes");
  auto al = axis_weights(k, data.x.col(l), h_l, grid_l, norm);
  auto aj = axis_weights(k, data.x.col(j), h_j, grid_j, norm);
  const double inv_n = 1.0 / static_cast<double>(data.n());
  CrossMomentSurface s{grid_l, grid_j, {}, {}, {}, {}};
  s.s11 = al.w * aj.w.transpose() * inv_n;
  s.s12 = al.offset * aj.w.transpose() * inv_n;
  s.s21 = al.w * aj.offset.transpose() * inv_n;
  s.s22 = al.offset * aj.offset.transpose() * inv_n;
  return s;
}

}  // namespace smoothfit
