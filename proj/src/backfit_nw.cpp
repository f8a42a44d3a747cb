#include "smoothfit/backfit_nw.hpp"

#include <cmath>

#include "additive_fit_impl.hpp"

namespace smoothfit {

namespace {

/// Discretized NW backfitting system on the grid:
///   m_j = mtilde_j - ybar - sum_{k != j} A_jk m_k
/// with A_jk = diag(1 / p_j) p_jk diag(omega).
struct NwSystem {
  int d = 0;
  double ybar = 0.0;
  std::vector<Eigen::VectorXd> density;  // p_j
  std::vector<Eigen::VectorXd> mtilde;
  std::vector<Eigen::MatrixXd> coupling;  // A_jk at j * d + k

  NwSystem(const Dataset& data, const std::vector<AxisWeights>& axes, const Grid& grid) {
    detail::check_axes(data, axes, grid);
    d = static_cast<int>(data.d());
    const double inv_n = 1.0 / static_cast<double>(data.n());
    ybar = data.y.mean();
    density.resize(d);
    mtilde.resize(d);
    for (int j = 0; j < d; ++j) {
      density[j] = axes[j].w.rowwise().sum() * inv_n;
      for (int g = 0; g < grid.size(); ++g)
        if (!(density[j][g] > 0.0))
          throw Error(ErrorCode::empty_neighborhood,
                      "no observations within the kernel window at " +
                          detail::grid_point_label(grid, g, j));
      mtilde[j] = (axes[j].w * data.y * inv_n).cwiseQuotient(density[j]);
    }
    coupling.resize(static_cast<std::size_t>(d) * d);
    const Eigen::VectorXd& omega = grid.weights();
    for (int j = 0; j < d; ++j)
      for (int k = j + 1; k < d; ++k) {
        Eigen::MatrixXd pjk = axes[j].w * axes[k].w.transpose() * inv_n;
        coupling[j * d + k] = density[j].cwiseInverse().asDiagonal() * pjk * omega.asDiagonal();
        coupling[k * d + j] =
            density[k].cwiseInverse().asDiagonal() * pjk.transpose() * omega.asDiagonal();
      }
  }

  Eigen::VectorXd update(int j, const std::vector<Eigen::VectorXd>& m) const {
    Eigen::VectorXd v = mtilde[j].array() - ybar;
    for (int k = 0; k < d; ++k)
      if (k != j) v.noalias() -= coupling[j * d + k] * m[k];
    return v;
  }
};

}  // namespace

Eigen::VectorXd marginal_nw(const Dataset& data, int j, double h, const Grid& grid,
                            const BackfitOptions& opts) {
  if (j < 0 || j >= data.d()) throw Error(ErrorCode::invalid_input, "axis out of range");
  if (data.n() == 0) throw Error(ErrorCode::invalid_input, "dataset is empty");
  auto aw = axis_weights(opts.kernel, data.x.col(j), h, grid, opts.normalization);
  Eigen::VectorXd p = aw.w.rowwise().sum();
  for (int g = 0; g < grid.size(); ++g)
    if (!(p[g] > 0.0))
      throw Error(ErrorCode::empty_neighborhood, "no observations within the kernel window at " +
                                                     detail::grid_point_label(grid, g, j));
  return (aw.w * data.y).cwiseQuotient(p);
}

AdditiveFit backfit_nw(const Dataset& data, const std::vector<AxisWeights>& axes,
                       const Grid& grid, const BackfitOptions& opts, const AdditiveFit* warm) {
  NwSystem sys(data, axes, grid);
  const int d = sys.d;
  const int G = grid.size();

  AdditiveFit fit;
  fit.smoother = Smoother::nw;
  fit.grid = grid;
  fit.intercept = sys.ybar;
  fit.bandwidths.resize(d);
  for (int j = 0; j < d; ++j) fit.bandwidths[j] = axes[j].h;
  if (detail::usable_warm_start(warm, Smoother::nw, d, G))
    fit.components = warm->components;
  else
    fit.components.assign(d, Eigen::VectorXd::Zero(G));

  auto norming = [&](int j, const Eigen::VectorXd& m) {
    return grid.integrate(m.cwiseProduct(sys.density[j])) / grid.integrate(sys.density[j]);
  };
  // Closed-form boundary weights leave constant shifts between components
  // only approximately neutral, so that mode norms after every update.
  const bool norm_each = opts.normalization == Normalization::exact;
  const double floor = detail::change_floor(data);
  for (int sweep = 1; sweep <= opts.max_sweeps; ++sweep) {
    double change = 0.0;
    for (int j = 0; j < d; ++j) {
      Eigen::VectorXd next = sys.update(j, fit.components);
      if (norm_each) next.array() -= norming(j, next);
      change = std::max(change, (next - fit.components[j]).cwiseAbs().maxCoeff());
      fit.components[j] = std::move(next);
    }
    double rel = change / std::max(detail::sup_norm(fit.components), floor);
    fit.changes.push_back(rel);
    fit.iterations = sweep;
    // With one covariate there is no coupling and the first sweep is exact.
    if (rel < opts.tol || d == 1) {
      fit.converged = true;
      break;
    }
  }
  if (!fit.converged)
    throw NonConvergence("NW backfitting did not converge in " + std::to_string(opts.max_sweeps) +
                             " sweeps (last relative change " +
                             std::to_string(fit.changes.back()) + ")",
                         fit.changes.back(), opts.max_sweeps);

  for (int j = 0; j < d; ++j) fit.components[j].array() -= norming(j, fit.components[j]);
  return fit;
}

AdditiveFit backfit_nw(const Dataset& data, const Eigen::VectorXd& h, const Grid& grid,
                       const BackfitOptions& opts, const AdditiveFit* warm) {
  return backfit_nw(data, make_axes(data, h, grid, opts), grid, opts, warm);
}

double nw_fixed_point_residual(const Dataset& data, const AdditiveFit& fit,
                               const BackfitOptions& opts) {
  auto axes = make_axes(data, fit.bandwidths, fit.grid, opts);
  NwSystem sys(data, axes, fit.grid);
  if (fit.d() != sys.d) throw Error(ErrorCode::invalid_input, "fit does not match data");
  double r = 0.0;
  for (int j = 0; j < sys.d; ++j) {
    Eigen::VectorXd rhs = sys.update(j, fit.components);
    r = std::max(r, (rhs - fit.components[j]).cwiseAbs().maxCoeff());
  }
  return r;
}

}  // namespace smoothfit
