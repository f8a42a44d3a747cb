#include "smoothfit/curvature.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "smoothfit/error.hpp"

namespace smoothfit {

double pilot_bandwidth(double h, double factor, PilotRule rule) {
  if (!(h > 0.0) || !(factor > 0.0))
    throw Error(ErrorCode::invalid_bandwidth, "pilot bandwidth needs positive h and factor");
  return rule == PilotRule::proportional ? factor * h : factor * std::pow(h, 5.0 / 7.0);
}

Eigen::VectorXd curvature_weights(const Grid& grid, double u, double g, const Kernel& L,
                                  bool* widened) {
  if (!(g > 0.0)) throw Error(ErrorCode::invalid_bandwidth, "pilot bandwidth must be positive");
  const int G = grid.size();
  Eigen::VectorXd w(G);
  int positive = 0;
  for (int v = 0; v < G; ++v) {
    w[v] = grid.weights()[v] * L((grid[v] - u) / g);
    if (w[v] > 0.0) ++positive;
  }
  if (widened) *widened = false;
  if (positive < 3) {
    std::vector<int> idx(G);
    std::iota(idx.begin(), idx.end(), 0);
    std::partial_sort(idx.begin(), idx.begin() + 3, idx.end(), [&](int a, int b) {
      return std::abs(grid[a] - u) < std::abs(grid[b] - u);
    });
    w.setZero();
    for (int k = 0; k < 3; ++k) w[idx[k]] = 1.0;
    if (widened) *widened = true;
  }

  // Design in scaled offsets t = (v - u) / g for conditioning.
  Eigen::MatrixXd X(G, 3);
  for (int v = 0; v < G; ++v) {
    double t = (grid[v] - u) / g;
    X(v, 0) = 1.0;
    X(v, 1) = t;
    X(v, 2) = t * t;
  }
  Eigen::Matrix3d A = X.transpose() * w.asDiagonal() * X;
  if (std::abs(A.determinant()) < 1e-12 * std::pow(A.trace(), 3))
    A += Eigen::Matrix3d::Identity() * 1e-9 * A.trace();
  Eigen::Vector3d e2 = A.ldlt().solve(Eigen::Vector3d(0.0, 0.0, 1.0));
  // beta_2 = e2' X' W f / g^2 and m'' = 2 beta_2.
  return (2.0 / (g * g)) * w.cwiseProduct(X * e2);
}

CurvatureCurve second_derivative(const Grid& grid, const Eigen::VectorXd& curve, double g,
                                 const Kernel& L) {
  if (curve.size() != grid.size())
    throw Error(ErrorCode::invalid_input, "curve length does not match grid");
  CurvatureCurve out{grid, Eigen::VectorXd(grid.size()), g, {}};
  for (int k = 0; k < grid.size(); ++k) {
    bool wide = false;
    out.values[k] = curvature_weights(grid, grid[k], g, L, &wide).dot(curve);
    if (wide) out.widened.push_back(k);
  }
  return out;
}

EquivalentKernelMoments equivalent_kernel_check(const Kernel& L, double g, double u,
                                                const Grid& grid) {
  EquivalentKernelMoments m;
  if (u < g || u > 1.0 - g) {
    m.skipped = true;
    return m;
  }
  Eigen::VectorXd a = curvature_weights(grid, u, g, L);
  for (int v = 0; v < grid.size(); ++v) {
    double t = grid[v] - u;
    m.i0 += a[v];
    m.i1 += a[v] * t;
    m.i2 += a[v] * t * t;
  }
  // a_v = 2 g^-3 L*((v - u) / g) dv, so the moments of L* rescale as below.
  m.i0 *= 0.5 * g * g;
  m.i1 *= 0.5 * g;
  m.i2 *= 0.5;
  return m;
}

Eigen::VectorXd curvature_at(const CurvatureCurve& c, const Eigen::VectorXd& x) {
  Eigen::VectorXd out(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) out[i] = c.grid.interpolate(c.values, x[i]);
  return out;
}

}  // namespace smoothfit
