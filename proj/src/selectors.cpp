#include "smoothfit/selectors.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <limits>

#include "smoothfit/backfit_ll.hpp"
#include "smoothfit/backfit_nw.hpp"
#include "smoothfit/error.hpp"

namespace smoothfit {

namespace {

constexpr double inf = std::numeric_limits<double>::infinity();

double rate(Eigen::Index n) { return std::pow(static_cast<double>(n), -0.2); }

double max_relative_change(const Eigen::VectorXd& prev, const Eigen::VectorXd& next) {
  return ((next - prev).cwiseAbs().array() / prev.array()).maxCoeff();
}

/// Curvature at the observations. Values at rounding level relative to the
/// curve itself are reported as exactly zero, so that straight components
/// reach the flat-component rules instead of a ratio of rounding errors.
Eigen::VectorXd column_curvature(const Grid& grid, const Eigen::VectorXd& curve, double g,
                                 const Kernel& L, const Eigen::VectorXd& x) {
  Eigen::VectorXd c = curvature_at(second_derivative(grid, curve, g, L), x);
  double scale = std::max(curve.cwiseAbs().maxCoeff(), std::numeric_limits<double>::min());
  if (c.size() && c.cwiseAbs().maxCoeff() <= 1e-8 * scale) c.setZero();
  return c;
}

/// n x d matrix of curvature estimates at the observations, pilot g = c h.
Eigen::MatrixXd curvature_matrix(const Dataset& data, const AdditiveFit& fit,
                                 const BandwidthSearchSpec& spec) {
  Eigen::MatrixXd c(data.n(), data.d());
  for (Eigen::Index j = 0; j < data.d(); ++j) {
    double g = pilot_bandwidth(fit.bandwidths[j], spec.pilot_factor, spec.pilot_rule);
    c.col(j) = column_curvature(fit.grid, fit.components[j], g, spec.backfit.kernel, data.x.col(j));
  }
  return c;
}

void require_ll(const BandwidthSearchSpec&, const Dataset& data) {
  if (data.n() == 0 || data.d() == 0)
    throw Error(ErrorCode::invalid_input, "dataset is empty");
}

double clamp_flagged(double h, const SearchBox& box, int j, SelectionResult& res) {
  if (h < box.lo) {
    res.flags.push_back("axis " + std::to_string(j + 1) + ": update below box, clamped");
    return box.lo;
  }
  if (h > box.hi) {
    res.flags.push_back("axis " + std::to_string(j + 1) + ": update above box, clamped");
    return box.hi;
  }
  return h;
}

}  // namespace

const char* to_string(Method m) noexcept {
  switch (m) {
    case Method::pls: return "pls";
    case Method::pl_grid: return "pl_grid";
    case Method::pl_coord: return "pl_coord";
    case Method::pl_star: return "pl_star";
    case Method::ase_oracle: return "ase_oracle";
    case Method::ase_j_oracle: return "ase_j_oracle";
    case Method::pls1: return "pls1";
    case Method::pl1: return "pl1";
  }
  return "unknown";
}

SearchBox resolve_box(const BandwidthSearchSpec& spec, Eigen::Index n, Eigen::Index d) {
  if (!(spec.box_lo > 0.0) || !(spec.box_hi > spec.box_lo))
    throw Error(ErrorCode::invalid_input, "bandwidth box needs 0 < lo < hi");
  if (spec.n_candidates < 5)
    throw Error(ErrorCode::invalid_input, "need at least 5 candidate bandwidths");
  if (spec.h0.size() != 1 && spec.h0.size() != d)
    throw Error(ErrorCode::invalid_input, "initial bandwidth must have 1 or d entries");
  SearchBox box;
  const double s = rate(n);
  box.lo = spec.box_lo * s;
  box.hi = spec.box_hi * s;
  const int N = spec.n_candidates;
  box.candidates.resize(N);
  const double step = std::log(box.hi / box.lo) / (N - 1);
  for (int c = 0; c < N; ++c) box.candidates[c] = box.lo * std::exp(step * c);
  box.candidates.front() = box.lo;
  box.candidates.back() = box.hi;
  box.h0 = spec.h0.size() == 1 ? Eigen::VectorXd::Constant(d, spec.h0[0]) : spec.h0;
  for (Eigen::Index j = 0; j < d; ++j) {
    if (!(box.h0[j] > 0.0)) throw Error(ErrorCode::invalid_bandwidth, "initial bandwidth <= 0");
    box.h0[j] = std::clamp(box.h0[j], box.lo, box.hi);
  }
  return box;
}

TrimSpec nw_trim(const BandwidthSearchSpec& spec, Eigen::Index n, Eigen::Index d) {
  const double s = rate(n);
  double cut = spec.trim_cut >= 0.0 ? spec.trim_cut * s : std::min(spec.box_hi * s, 0.25);
  return TrimSpec::symmetric(static_cast<int>(d), cut);
}

// FitEvaluator ---------------------------------------------------------------

FitEvaluator::FitEvaluator(const Dataset& data, Smoother smoother,
                           const BandwidthSearchSpec& spec, const AdditiveTruth* truth)
    : data_(data),
      smoother_(smoother),
      spec_(spec),
      truth_(truth),
      grid_(spec.grid_size),
      trim_(smoother == Smoother::nw ? nw_trim(spec, data.n(), data.d()) : TrimSpec::none()),
      axis_cache_(static_cast<std::size_t>(data.d())) {
  require_unit_cube(data);
  if (truth && static_cast<Eigen::Index>(truth->centered.size()) != data.d())
    throw Error(ErrorCode::invalid_input, "truth needs one centered component per axis");
}

const AxisWeights& FitEvaluator::axis(int j, double h) {
  auto& cache = axis_cache_[j];
  auto it = cache.find(h);
  if (it == cache.end())
    it = cache
             .emplace(h, axis_weights(spec_.backfit.kernel, data_.x.col(j), h, grid_,
                                      spec_.backfit.normalization))
             .first;
  return it->second;
}

const Evaluation& FitEvaluator::evaluate(const Eigen::VectorXd& h, const AdditiveFit* warm) {
  std::vector<double> key(h.data(), h.data() + h.size());
  auto hit = memo_.find(key);
  if (hit != memo_.end()) return hit->second;

  Evaluation e;
  std::vector<AxisWeights> axes;
  axes.reserve(key.size());
  for (std::size_t j = 0; j < key.size(); ++j) axes.push_back(axis(static_cast<int>(j), key[j]));
  try {
    e.fit = smoother_ == Smoother::nw ? backfit_nw(data_, axes, grid_, spec_.backfit, warm)
                                      : backfit_ll(data_, axes, grid_, spec_.backfit, warm);
    ++backfits_;
    Eigen::VectorXd pred = predict_rows(e.fit, data_.x);
    e.rss = rss_from_predictions(data_, pred, {}, trim_).value;
    e.pls = pls(e.rss, h, spec_.backfit.kernel.moments().k0, data_.n()).value;
    if (truth_) {
      const double shift = truth_->intercept ? *truth_->intercept - e.fit.intercept : 0.0;
      double s = 0.0;
      for (Eigen::Index i = 0; i < data_.n(); ++i) {
        auto xi = data_.x.row(i).transpose();
        if (!trim_.keeps(xi)) continue;
        double err = pred[i] + shift - truth_->regression(xi);
        s += err * err;
      }
      e.ase = s / static_cast<double>(data_.n());
      e.ase_j.resize(data_.d());
      for (Eigen::Index j = 0; j < data_.d(); ++j)
        e.ase_j[j] = ase_j(data_, e.fit, static_cast<int>(j), truth_->centered[j]).value;
    }
    e.ok = true;
  } catch (const Error& ex) {
    if (ex.code() != ErrorCode::non_convergence && ex.code() != ErrorCode::empty_neighborhood &&
        ex.code() != ErrorCode::singular_moment)
      throw;
    e.ok = false;
  }
  return memo_.emplace(std::move(key), std::move(e)).first->second;
}

// Coordinate descent ---------------------------------------------------------

SelectionResult coordinate_search(FitEvaluator& eval, const BandwidthSearchSpec& spec,
                                  const EvaluationScore& score, Method method) {
  const Dataset& data = eval.data();
  const auto d = data.d();
  SearchBox box = resolve_box(spec, data.n(), d);

  SelectionResult res;
  res.method = method;
  res.smoother = eval.smoother();
  Eigen::VectorXd h = box.h0;

  auto scored = [&](const Evaluation& e, int axis) {
    return e.ok ? score(e, axis) : inf;
  };
  const Evaluation* current = &eval.evaluate(h);
  res.trace.push_back({h, scored(*current, -1)});

  for (int r = 1; r <= spec.max_outer; ++r) {
    Eigen::VectorXd prev = h;
    for (Eigen::Index j = 0; j < d; ++j) {
      current = &eval.evaluate(h);
      const AdditiveFit* warm = current->ok ? &current->fit : nullptr;
      double best = inf;
      double best_h = -1.0;
      Eigen::VectorXd trial = h;
      for (double c : box.candidates) {
        trial[j] = c;
        const Evaluation& e = eval.evaluate(trial, warm);
        if (!e.ok) {
          ++res.failed_candidates;
          continue;
        }
        double s = score(e, static_cast<int>(j));
        if (s < best) {  // candidates increase, so ties keep the smaller one
          best = s;
          best_h = c;
        }
      }
      if (best_h < 0.0)
        throw Error(ErrorCode::selector_failure,
                    "every candidate bandwidth failed on axis " + std::to_string(j + 1));
      h[j] = best_h;
    }
    current = &eval.evaluate(h);
    double start = res.trace.back().criterion;
    res.trace.push_back({h, scored(*current, -1), start});
    res.outer_iterations = r;
    if (max_relative_change(prev, h) < spec.outer_tol) {
      res.converged = true;
      break;
    }
  }
  res.bandwidths = h;
  return res;
}

SelectionResult select_pls(const Dataset& data, Smoother smoother,
                           const BandwidthSearchSpec& spec) {
  FitEvaluator eval(data, smoother, spec);
  return coordinate_search(
      eval, spec, [](const Evaluation& e, int) { return e.pls; }, Method::pls);
}

SelectionResult oracle_ase_bandwidth(const Dataset& data, const AdditiveTruth& truth,
                                     Smoother smoother, const BandwidthSearchSpec& spec,
                                     OracleCriterion criterion) {
  FitEvaluator eval(data, smoother, spec, &truth);
  if (criterion == OracleCriterion::ase)
    return coordinate_search(
        eval, spec, [](const Evaluation& e, int) { return e.ase; }, Method::ase_oracle);
  return coordinate_search(
      eval, spec,
      [](const Evaluation& e, int axis) { return axis < 0 ? e.ase_j.sum() : e.ase_j[axis]; },
      Method::ase_j_oracle);
}

// Plug-in selectors ------------------------------------------------------------

SelectionResult select_pl(const Dataset& data, const BandwidthSearchSpec& spec, PlMode mode) {
  require_ll(spec, data);
  FitEvaluator eval(data, Smoother::ll, spec);
  const auto d = data.d();
  SearchBox box = resolve_box(spec, data.n(), d);
  const int N = static_cast<int>(box.candidates.size());
  if (mode == PlMode::full_grid && std::pow(static_cast<double>(N), static_cast<double>(d)) > 5e7)
    throw Error(ErrorCode::invalid_input,
                "full-grid plug-in search is too large for this dimension; use coordinate mode");

  SelectionResult res;
  res.method = mode == PlMode::full_grid ? Method::pl_grid : Method::pl_coord;
  res.smoother = Smoother::ll;
  Eigen::VectorXd h = box.h0;
  const AdditiveFit* warm = nullptr;
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(data.n());
  std::vector<Eigen::VectorXd> visited{h};

  for (int r = 1; r <= spec.max_outer; ++r) {
    const Evaluation& e = eval.evaluate(h, warm);
    if (!e.ok)
      throw Error(ErrorCode::selector_failure, "backfit failed at the current plug-in bandwidth");
    warm = &e.fit;
    AaseObjective obj(e.rss, curvature_matrix(data, e.fit, spec), spec.backfit.kernel.moments(),
                      ones);

    Eigen::VectorXd next = h;
    if (mode == PlMode::full_grid) {
      std::vector<int> idx(static_cast<std::size_t>(d), 0);
      Eigen::VectorXd trial(d);
      double best = inf;
      while (true) {
        for (Eigen::Index j = 0; j < d; ++j) trial[j] = box.candidates[idx[j]];
        double v = obj(trial);
        if (v < best) {
          best = v;
          next = trial;
        }
        Eigen::Index k = d - 1;
        while (k >= 0 && ++idx[k] == N) idx[k--] = 0;
        if (k < 0) break;
      }
    } else {
      for (Eigen::Index j = 0; j < d; ++j) {
        Eigen::VectorXd trial = h;
        double best = inf;
        for (double c : box.candidates) {
          trial[j] = c;
          double v = obj(trial);
          if (v < best) {
            best = v;
            next[j] = c;
          }
        }
      }
    }
    res.trace.push_back({next, obj(next), obj(h)});
    res.outer_iterations = r;
    double change = max_relative_change(h, next);
    h = next;
    if (change < spec.outer_tol) {
      res.converged = true;
      break;
    }
    // The update is a deterministic map on the candidate grid, so a repeated
    // state means it has entered a cycle that the tolerance can never stop.
    auto seen = std::find(visited.begin(), visited.end() - 1, next);
    if (seen != visited.end() - 1) {
      res.flags.push_back("grid cycle of length " +
                          std::to_string(visited.end() - seen) +
                          " reached; stopped at the repeated bandwidths");
      break;
    }
    visited.push_back(next);
  }
  res.bandwidths = h;
  return res;
}

std::optional<double> pl_star_update(double rss_value, const Eigen::VectorXd& curvature_at_data,
                                     const Eigen::VectorXd& axis_weights,
                                     const KernelMoments& moments, Eigen::Index n) {
  const double nn = static_cast<double>(n);
  double s = (axis_weights.array() * curvature_at_data.array().square()).sum() / nn;
  s *= moments.mu2 * moments.mu2;
  if (!(s > 0.0) || !std::isfinite(s)) return std::nullopt;
  return std::pow(nn, -0.2) * std::pow(rss_value * moments.r_k, 0.2) * std::pow(s, -0.2);
}

SelectionResult select_pl_star(const Dataset& data, const BandwidthSearchSpec& spec) {
  require_ll(spec, data);
  FitEvaluator eval(data, Smoother::ll, spec);
  const auto d = data.d();
  SearchBox box = resolve_box(spec, data.n(), d);
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(data.n());

  SelectionResult res;
  res.method = Method::pl_star;
  res.smoother = Smoother::ll;
  Eigen::VectorXd h = box.h0;
  const AdditiveFit* warm = nullptr;

  for (int r = 1; r <= spec.max_outer; ++r) {
    const Evaluation& e = eval.evaluate(h, warm);
    if (!e.ok)
      throw Error(ErrorCode::selector_failure, "backfit failed at the current plug-in bandwidth");
    warm = &e.fit;
    Eigen::MatrixXd curv = curvature_matrix(data, e.fit, spec);
    Eigen::VectorXd next(d);
    for (Eigen::Index j = 0; j < d; ++j) {
      auto upd = pl_star_update(e.rss, curv.col(j), ones, spec.backfit.kernel.moments(), data.n());
      if (!upd) {
        res.flags.push_back("axis " + std::to_string(j + 1) +
                            ": curvature vanishes, bandwidth set to box maximum");
        next[j] = box.hi;
      } else {
        next[j] = clamp_flagged(*upd, box, static_cast<int>(j), res);
      }
    }
    res.trace.push_back({next, e.rss});
    res.outer_iterations = r;
    double change = max_relative_change(h, next);
    h = next;
    if (change < spec.outer_tol) {
      res.converged = true;
      break;
    }
  }
  res.bandwidths = h;
  return res;
}

// Single covariate -------------------------------------------------------------

AdditiveFit single_ll_fit(const Dataset& data_1d, double h, const Grid& grid,
                          const BackfitOptions& opts) {
  LocalLinearCurve c = marginal_ll(data_1d, 0, h, grid, opts);
  AdditiveFit fit;
  fit.smoother = Smoother::ll;
  fit.grid = grid;
  fit.intercept = 0.0;
  fit.components = {std::move(c.level)};
  fit.slopes = {std::move(c.slope)};
  fit.bandwidths = Eigen::VectorXd::Constant(1, h);
  fit.iterations = 1;
  fit.converged = true;
  return fit;
}

SelectionResult select_single(const Dataset& data_1d, SingleMethod method,
                              const BandwidthSearchSpec& spec) {
  if (data_1d.d() != 1)
    throw Error(ErrorCode::invalid_input, "single-covariate selectors need d = 1");
  require_unit_cube(data_1d);
  SearchBox box = resolve_box(spec, data_1d.n(), 1);
  Grid grid(spec.grid_size);
  const double k0 = spec.backfit.kernel.moments().k0;
  const auto n = data_1d.n();

  SelectionResult res;
  res.method = method == SingleMethod::pls1 ? Method::pls1 : Method::pl1;
  res.smoother = Smoother::ll;

  auto rss1 = [&](const AdditiveFit& fit) {
    return rss_from_predictions(data_1d, predict_rows(fit, data_1d.x)).value;
  };

  if (method == SingleMethod::pls1) {
    double best = inf, best_h = -1.0;
    for (double c : box.candidates) {
      double v = inf;
      try {
        v = pls(rss1(single_ll_fit(data_1d, c, grid, spec.backfit)), Eigen::VectorXd::Constant(1, c),
                k0, n)
                .value;
      } catch (const Error& ex) {
        if (ex.code() != ErrorCode::singular_moment) throw;
        ++res.failed_candidates;
      }
      res.trace.push_back({Eigen::VectorXd::Constant(1, c), v});
      if (v < best) {
        best = v;
        best_h = c;
      }
    }
    if (best_h < 0.0) throw Error(ErrorCode::selector_failure, "every candidate bandwidth failed");
    res.bandwidths = Eigen::VectorXd::Constant(1, best_h);
    res.outer_iterations = 1;
    res.converged = true;
    return res;
  }

  double h = box.h0[0];
  for (int r = 1; r <= spec.max_outer; ++r) {
    AdditiveFit fit = single_ll_fit(data_1d, h, grid, spec.backfit);
    double rss_value = rss1(fit);
    double g = pilot_bandwidth(h, spec.pilot_factor, spec.pilot_rule);
    Eigen::VectorXd curv =
        column_curvature(grid, fit.components[0], g, spec.backfit.kernel, data_1d.x.col(0));
    auto upd = pl_star_update(rss_value, curv, Eigen::VectorXd::Ones(n),
                              spec.backfit.kernel.moments(), n);
    double next = box.hi;
    if (!upd)
      res.flags.push_back("axis 1: curvature vanishes, bandwidth set to box maximum");
    else
      next = clamp_flagged(*upd, box, 0, res);
    res.trace.push_back({Eigen::VectorXd::Constant(1, next), rss_value});
    res.outer_iterations = r;
    double change = std::abs(next - h) / h;
    h = next;
    if (change < spec.outer_tol) {
      res.converged = true;
      break;
    }
  }
  res.bandwidths = Eigen::VectorXd::Constant(1, h);
  return res;
}

// Closed form ------------------------------------------------------------------

double theoretical_hstar(const std::function<double(double)>& sigma2,
                         const std::function<double(double)>& density,
                         const std::function<double(double)>& second_derivative,
                         const std::function<double(double)>& weight,
                         const KernelMoments& moments, double n) {
  using boost::math::quadrature::gauss_kronrod;
  auto w = [&](double u) { return weight ? weight(u) : 1.0; };
  double variance = gauss_kronrod<double, 61>::integrate(
      [&](double u) { return w(u) * density(u) * sigma2(u); }, 0.0, 1.0, 15, 1e-10);
  double curvature = gauss_kronrod<double, 61>::integrate(
      [&](double u) {
        double m2 = second_derivative(u);
        return m2 * m2 * w(u) * density(u);
      },
      0.0, 1.0, 15, 1e-10);
  if (!(curvature > 0.0)) return inf;
  return std::pow(n, -0.2) * std::pow(variance * moments.r_k, 0.2) *
         std::pow(curvature * moments.mu2 * moments.mu2, -0.2);
}

}  // namespace smoothfit
