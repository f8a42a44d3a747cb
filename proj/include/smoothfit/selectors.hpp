#pragma once

#include <Eigen/Dense>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "smoothfit/additive_fit.hpp"
#include "smoothfit/criteria.hpp"
#include "smoothfit/curvature.hpp"

namespace smoothfit {

/// Bandwidth search configuration. Box ends are in units of n^(-1/5).
struct BandwidthSearchSpec {
  int n_candidates = 25;
  double box_lo = 0.25;
  double box_hi = 2.5;
  /// Initial bandwidth, one value per axis or a single value for all axes.
  Eigen::VectorXd h0 = Eigen::VectorXd::Constant(1, 0.1);
  double outer_tol = 1e-3;
  int max_outer = 25;
  double pilot_factor = 1.5;
  PilotRule pilot_rule = PilotRule::proportional;
  /// NW trimming cut in units of n^(-1/5); negative means min(box_hi, 0.25 n^(1/5)).
  double trim_cut = -1.0;
  int grid_size = Grid::default_size;
  BackfitOptions backfit;
};

/// Candidate bandwidths and box in absolute units for a sample of size n.
struct SearchBox {
  double lo = 0.0, hi = 0.0;
  std::vector<double> candidates;  // log-spaced, increasing
  Eigen::VectorXd h0;              // clamped into [lo, hi]
};

SearchBox resolve_box(const BandwidthSearchSpec& spec, Eigen::Index n, Eigen::Index d);

/// Trim applied to Nadaraya-Watson criteria for these search settings.
TrimSpec nw_trim(const BandwidthSearchSpec& spec, Eigen::Index n, Eigen::Index d);

enum class Method { pls, pl_grid, pl_coord, pl_star, ase_oracle, ase_j_oracle, pls1, pl1 };

const char* to_string(Method m) noexcept;

struct TraceEntry {
  Eigen::VectorXd bandwidths;
  double criterion = 0.0;
  /// The same step's objective at the bandwidths the step started from, when
  /// the step minimizes one; NaN otherwise. A minimizing step has
  /// criterion <= start_criterion.
  double start_criterion = std::numeric_limits<double>::quiet_NaN();
};

struct SelectionResult {
  Method method = Method::pls;
  Smoother smoother = Smoother::ll;
  Eigen::VectorXd bandwidths;
  int outer_iterations = 0;
  bool converged = false;
  std::vector<TraceEntry> trace;
  /// Number of candidate evaluations scored +inf (solver failure).
  int failed_candidates = 0;
  std::vector<std::string> flags;
};

/// Known additive regression function, simulation only.
struct AdditiveTruth {
  TruthFn regression;                                   // m0 + sum_j m_j
  std::vector<std::function<double(double)>> centered;  // m_j minus its centering constant
  /// When set, ASE replaces the fitted intercept by this value, so the
  /// error is sum_j (m_j_hat - centered_j) at every observation.
  std::optional<double> intercept;
};

/// Criteria of one backfit at a bandwidth vector.
struct Evaluation {
  bool ok = false;
  double rss = 0.0;
  double pls = 0.0;
  double ase = 0.0;
  Eigen::VectorXd ase_j;
  AdditiveFit fit;
};

/**
 * Memoized backfit-and-score at arbitrary bandwidth vectors.
 *
 * Kernel weights are cached per (axis, bandwidth). A new backfit is warm
 * started from the fit passed as `warm`; solver failures produce an
 * Evaluation with ok == false.
 */
class FitEvaluator {
 public:
  FitEvaluator(const Dataset& data, Smoother smoother, const BandwidthSearchSpec& spec,
               const AdditiveTruth* truth = nullptr);

  const Evaluation& evaluate(const Eigen::VectorXd& h, const AdditiveFit* warm = nullptr);

  const Dataset& data() const noexcept { return data_; }
  const Grid& grid() const noexcept { return grid_; }
  Smoother smoother() const noexcept { return smoother_; }
  const TrimSpec& trim() const noexcept { return trim_; }
  std::size_t backfits() const noexcept { return backfits_; }

 private:
  const AxisWeights& axis(int j, double h);

  const Dataset& data_;
  Smoother smoother_;
  BandwidthSearchSpec spec_;
  const AdditiveTruth* truth_;
  Grid grid_;
  TrimSpec trim_;
  std::vector<std::map<double, AxisWeights>> axis_cache_;
  std::map<std::vector<double>, Evaluation> memo_;
  std::size_t backfits_ = 0;
};

/// Score used by the coordinate-descent scans.
using EvaluationScore = std::function<double(const Evaluation&, int axis)>;

/// Cyclic coordinate descent over the candidate grid: each axis in turn is
/// set to the candidate minimizing `score` with the other axes at their
/// current values. Ties go to the smaller bandwidth. Stops when a full pass
/// changes no bandwidth by more than outer_tol relatively.
SelectionResult coordinate_search(FitEvaluator& eval, const BandwidthSearchSpec& spec,
                                  const EvaluationScore& score, Method method);

SelectionResult select_pls(const Dataset& data, Smoother smoother,
                           const BandwidthSearchSpec& spec = {});

enum class PlMode { full_grid, coordinate };

/// Plug-in minimizing the estimated ASE; local-linear only.
SelectionResult select_pl(const Dataset& data, const BandwidthSearchSpec& spec = {},
                          PlMode mode = PlMode::full_grid);

/// Closed-form update for one axis. Returns nullopt when the curvature sum
/// vanishes.
std::optional<double> pl_star_update(double rss_value, const Eigen::VectorXd& curvature_at_data,
                                     const Eigen::VectorXd& axis_weights,
                                     const KernelMoments& moments, Eigen::Index n);

/// Component-wise plug-in with the closed-form update; local-linear only.
SelectionResult select_pl_star(const Dataset& data, const BandwidthSearchSpec& spec = {});

enum class SingleMethod { pls1, pl1 };

/// Selectors for a single covariate using the ordinary local-linear fit.
SelectionResult select_single(const Dataset& data_1d, SingleMethod method,
                              const BandwidthSearchSpec& spec = {});

/// Ordinary local-linear fit with intercept folded into the level curve.
AdditiveFit single_ll_fit(const Dataset& data_1d, double h, const Grid& grid,
                          const BackfitOptions& opts);

enum class OracleCriterion { ase, ase_j };

/// Coordinate-descent minimizer of ASE (or of ASE_j on axis j).
SelectionResult oracle_ase_bandwidth(const Dataset& data, const AdditiveTruth& truth,
                                     Smoother smoother, const BandwidthSearchSpec& spec = {},
                                     OracleCriterion criterion = OracleCriterion::ase);

/// Closed-form ASE_j-optimal bandwidth from analytic inputs, integrals over
/// [0, 1] by adaptive Gauss-Kronrod. Returns +inf when the curvature integral
/// is zero.
double theoretical_hstar(const std::function<double(double)>& sigma2,
                         const std::function<double(double)>& density,
                         const std::function<double(double)>& second_derivative,
                         const std::function<double(double)>& weight,
                         const KernelMoments& moments, double n);

}  // namespace smoothfit
