#include "smoothfit/backfit_ll.hpp"

#include <cmath>

#include "additive_fit_impl.hpp"
#include "smoothfit/backfit_nw.hpp"

namespace smoothfit {

bool solve_moment_system(double m00, double m01, double m11, double b0, double b1, double& x0,
                         double& x1) noexcept {
  double det = m00 * m11 - m01 * m01;
  if (std::abs(det) < 1e-12 * (m00 * m00 + m11 * m11)) {
    double ridge = 1e-9 * (m00 + m11);
    m00 += ridge;
    m11 += ridge;
    det = m00 * m11 - m01 * m01;
  }
  if (!(std::abs(det) > 0.0) || !std::isfinite(det)) return false;
  x0 = (m11 * b0 - m01 * b1) / det;
  x1 = (m00 * b1 - m01 * b0) / det;
  return true;
}

namespace {

struct Moments {
  Eigen::VectorXd m00, m01, m11;
};

Moments moments_of(const AxisWeights& a, const Eigen::VectorXd& x, const Grid& grid,
                   double inv_n) {
  Moments m;
  m.m00 = a.w.rowwise().sum() * inv_n;
  m.m01 = a.offset.rowwise().sum() * inv_n;
  m.m11 = Eigen::VectorXd::Zero(grid.size());
  for (Eigen::Index i = 0; i < x.size(); ++i)
    for (int g = 0; g < grid.size(); ++g) m.m11[g] += a.offset(g, i) * (x[i] - grid[g]);
  m.m11 *= inv_n;
  return m;
}

/// Discretized local-linear backfitting system. For each axis j the state is
/// the stacked vector [levels; slopes] of length 2G, and
///   M_j(u) v_j(u) = r_j(u) - ybar (m00, m01)(u) - sum_{l != j} B_jl (omega * v_l)
/// where B_jl = [W_j; D_j] [W_l; D_l]^T / n holds the four S_lj entries.
struct LlSystem {
  int d = 0;
  int G = 0;
  double ybar = 0.0;
  std::vector<Moments> mom;
  std::vector<Eigen::VectorXd> base;      // r_j - ybar (m00, m01), stacked
  std::vector<Eigen::MatrixXd> coupling;  // B_jl at j * d + l
  Eigen::VectorXd omega2;                 // trapezoid weights, stacked twice

  LlSystem(const Dataset& data, const std::vector<AxisWeights>& axes, const Grid& grid) {
    detail::check_axes(data, axes, grid);
    d = static_cast<int>(data.d());
    G = grid.size();
    const double inv_n = 1.0 / static_cast<double>(data.n());
    ybar = data.y.mean();
    mom.resize(d);
    base.resize(d);
    std::vector<Eigen::MatrixXd> stacked(d);
    for (int j = 0; j < d; ++j) {
      mom[j] = moments_of(axes[j], data.x.col(j), grid, inv_n);
      for (int g = 0; g < G; ++g)
        if (!(mom[j].m00[g] > 0.0))
          throw Error(ErrorCode::singular_moment,
                      "local design matrix is singular (no observations) at " +
                          detail::grid_point_label(grid, g, j));
      stacked[j].resize(2 * G, data.n());
      stacked[j] << axes[j].w, axes[j].offset;
      base[j] = stacked[j] * data.y * inv_n;
      base[j].head(G) -= ybar * mom[j].m00;
      base[j].tail(G) -= ybar * mom[j].m01;
    }
    coupling.resize(static_cast<std::size_t>(d) * d);
    for (int j = 0; j < d; ++j)
      for (int l = j + 1; l < d; ++l) {
        coupling[j * d + l] = stacked[j] * stacked[l].transpose() * inv_n;
        coupling[l * d + j] = coupling[j * d + l].transpose();
      }
    omega2.resize(2 * G);
    omega2 << grid.weights(), grid.weights();
  }

  /// Right side before applying M_j^{-1}.
  Eigen::VectorXd rhs(int j, const std::vector<Eigen::VectorXd>& levels,
                      const std::vector<Eigen::VectorXd>& slopes) const {
    Eigen::VectorXd r = base[j];
    Eigen::VectorXd v(2 * G);
    for (int l = 0; l < d; ++l) {
      if (l == j) continue;
      v << levels[l], slopes[l];
      r.noalias() -= coupling[j * d + l] * v.cwiseProduct(omega2);
    }
    return r;
  }

  void solve(int j, const Eigen::VectorXd& r, Eigen::VectorXd& level, Eigen::VectorXd& slope,
             const Grid& grid) const {
    for (int g = 0; g < G; ++g) {
      if (!solve_moment_system(mom[j].m00[g], mom[j].m01[g], mom[j].m11[g], r[g], r[G + g],
                               level[g], slope[g]))
        throw Error(ErrorCode::singular_moment,
                    "local design matrix is singular at " + detail::grid_point_label(grid, g, j));
    }
  }
};

}  // namespace

LocalLinearCurve marginal_ll(const Dataset& data, int j, double h, const Grid& grid,
                             const BackfitOptions& opts) {
  if (j < 0 || j >= data.d()) throw Error(ErrorCode::invalid_input, "axis out of range");
  if (data.n() == 0) throw Error(ErrorCode::invalid_input, "dataset is empty");
  auto aw = axis_weights(opts.kernel, data.x.col(j), h, grid, opts.normalization);
  const double inv_n = 1.0 / static_cast<double>(data.n());
  Moments m = moments_of(aw, data.x.col(j), grid, inv_n);
  Eigen::VectorXd r0 = aw.w * data.y * inv_n;
  Eigen::VectorXd r1 = aw.offset * data.y * inv_n;
  LocalLinearCurve out{Eigen::VectorXd(grid.size()), Eigen::VectorXd(grid.size())};
  for (int g = 0; g < grid.size(); ++g)
    if (!solve_moment_system(m.m00[g], m.m01[g], m.m11[g], r0[g], r1[g], out.level[g],
                             out.slope[g]))
      throw Error(ErrorCode::singular_moment,
                  "local design matrix is singular at " + detail::grid_point_label(grid, g, j));
  return out;
}

AdditiveFit backfit_ll(const Dataset& data, const std::vector<AxisWeights>& axes,
                       const Grid& grid, const BackfitOptions& opts, const AdditiveFit* warm) {
  LlSystem sys(data, axes, grid);
  const int d = sys.d;
  const int G = sys.G;

  AdditiveFit fit;
  fit.smoother = Smoother::ll;
  fit.grid = grid;
  fit.intercept = sys.ybar;
  fit.bandwidths.resize(d);
  for (int j = 0; j < d; ++j) fit.bandwidths[j] = axes[j].h;
  if (detail::usable_warm_start(warm, Smoother::ll, d, G) &&
      static_cast<int>(warm->slopes.size()) == d) {
    fit.components = warm->components;
    fit.slopes = warm->slopes;
  } else {
    fit.components.assign(d, Eigen::VectorXd::Zero(G));
    fit.slopes.assign(d, Eigen::VectorXd::Zero(G));
  }

  auto norming = [&](int j, const Eigen::VectorXd& lv, const Eigen::VectorXd& sl) {
    return (grid.integrate(lv.cwiseProduct(sys.mom[j].m00)) +
            grid.integrate(sl.cwiseProduct(sys.mom[j].m01))) /
           grid.integrate(sys.mom[j].m00);
  };
  // See backfit_nw: closed-form weights need norming after every update.
  const bool norm_each = opts.normalization == Normalization::exact;
  const double floor = detail::change_floor(data);
  Eigen::VectorXd level(G), slope(G);
  for (int sweep = 1; sweep <= opts.max_sweeps; ++sweep) {
    double change = 0.0;
    for (int j = 0; j < d; ++j) {
      sys.solve(j, sys.rhs(j, fit.components, fit.slopes), level, slope, grid);
      if (norm_each) level.array() -= norming(j, level, slope);
      change = std::max(change, (level - fit.components[j]).cwiseAbs().maxCoeff());
      change = std::max(change, (slope - fit.slopes[j]).cwiseAbs().maxCoeff());
      fit.components[j] = level;
      fit.slopes[j] = slope;
    }
    double scale = std::max(detail::sup_norm(fit.components), detail::sup_norm(fit.slopes));
    double rel = change / std::max(scale, floor);
    fit.changes.push_back(rel);
    fit.iterations = sweep;
    if (rel < opts.tol || d == 1) {
      fit.converged = true;
      break;
    }
  }
  if (!fit.converged)
    throw NonConvergence("LL backfitting did not converge in " + std::to_string(opts.max_sweeps) +
                             " sweeps (last relative change " +
                             std::to_string(fit.changes.back()) + ")",
                         fit.changes.back(), opts.max_sweeps);

  for (int j = 0; j < d; ++j)
    fit.components[j].array() -= norming(j, fit.components[j], fit.slopes[j]);
  return fit;
}

AdditiveFit backfit_ll(const Dataset& data, const Eigen::VectorXd& h, const Grid& grid,
                       const BackfitOptions& opts, const AdditiveFit* warm) {
  return backfit_ll(data, make_axes(data, h, grid, opts), grid, opts, warm);
}

double ll_fixed_point_residual(const Dataset& data, const AdditiveFit& fit,
                               const BackfitOptions& opts) {
  auto axes = make_axes(data, fit.bandwidths, fit.grid, opts);
  LlSystem sys(data, axes, fit.grid);
  if (fit.d() != sys.d || static_cast<int>(fit.slopes.size()) != sys.d)
    throw Error(ErrorCode::invalid_input, "fit does not match data");
  Eigen::VectorXd level(sys.G), slope(sys.G);
  double r = 0.0;
  for (int j = 0; j < sys.d; ++j) {
    sys.solve(j, sys.rhs(j, fit.components, fit.slopes), level, slope, fit.grid);
    r = std::max(r, (level - fit.components[j]).cwiseAbs().maxCoeff());
    r = std::max(r, (slope - fit.slopes[j]).cwiseAbs().maxCoeff());
  }
  return r;
}

AdditiveFit backfit(Smoother s, const Dataset& data, const Eigen::VectorXd& h, const Grid& grid,
                    const BackfitOptions& opts, const AdditiveFit* warm) {
  return s == Smoother::nw ? backfit_nw(data, h, grid, opts, warm)
                           : backfit_ll(data, h, grid, opts, warm);
}

}  // namespace smoothfit
