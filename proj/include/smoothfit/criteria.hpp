#pragma once

#include <Eigen/Dense>
#include <functional>

#include "smoothfit/additive_fit.hpp"
#include "smoothfit/dataset.hpp"
#include "smoothfit/kernel.hpp"

namespace smoothfit {

/// Observation weight w(x). An empty function means the indicator of
/// [0, 1]^d, which is one for every admissible observation.
using WeightFn = std::function<double(const Eigen::Ref<const Eigen::VectorXd>&)>;
using AxisWeightFn = std::function<double(double)>;
/// Additive truth m0 + sum_j m_j(x_j) at a covariate vector.
using TruthFn = std::function<double(const Eigen::Ref<const Eigen::VectorXd>&)>;

/// Per-axis interior window; observations outside any window are dropped.
struct TrimSpec {
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;
  bool active = false;

  static TrimSpec none() { return {}; }
  /// [cut, 1 - cut] on every axis. Throws invalid_input if cut >= 0.5.
  static TrimSpec symmetric(int d, double cut);

  bool keeps(const Eigen::Ref<const Eigen::VectorXd>& x) const;
};

struct CriterionValue {
  double value = 0.0;
  Eigen::Index n_used = 0;
};

/// Mean over i of trim * w(X^i) * (Y^i - predict(fit, X^i))^2.
CriterionValue rss(const Dataset& data, const AdditiveFit& fit, const WeightFn& w = {},
                   const TrimSpec& trim = TrimSpec::none());

/// Residual mean square from precomputed predictions.
CriterionValue rss_from_predictions(const Dataset& data, const Eigen::VectorXd& pred,
                                    const WeightFn& w = {},
                                    const TrimSpec& trim = TrimSpec::none());

/// rss * (1 + 2 sum_j K(0) / (n h_j)).
CriterionValue pls(double rss_value, const Eigen::VectorXd& h, double k0, Eigen::Index n);

/// Mean of trim * w * (predict(fit, X^i) - m(X^i))^2.
CriterionValue ase(const Dataset& data, const AdditiveFit& fit, const TruthFn& truth,
                   const WeightFn& w = {}, const TrimSpec& trim = TrimSpec::none());

/// Mean of w_j(X_j^i) (m_j_hat(X_j^i) - m_j_centered(X_j^i))^2 using the
/// interpolated component j of the fit.
CriterionValue ase_j(const Dataset& data, const AdditiveFit& fit, int j,
                     const std::function<double(double)>& truth_centered,
                     const AxisWeightFn& w_j = {});

/**
 * Estimated first-order ASE expansion
 *
 *   rss * R(K) * sum_j 1 / (n h_j)
 *     + (1 / 4n) sum_i w(X^i) (sum_j h_j^2 c_ij)^2 * mu2^2
 *
 * where c_ij is the curvature estimate of component j at observation i.
 * The bias term is stored as the Gram matrix of the weighted curvature
 * columns so a bandwidth vector costs O(d^2) to evaluate.
 */
class AaseObjective {
 public:
  AaseObjective(double rss_value, const Eigen::MatrixXd& curvature_at_data,
                const KernelMoments& moments, const Eigen::VectorXd& obs_weights);

  double operator()(const Eigen::VectorXd& h) const;
  double variance_term(const Eigen::VectorXd& h) const;
  double bias_term(const Eigen::VectorXd& h) const;

 private:
  double variance_coef_;
  Eigen::MatrixXd gram_;  // (1 / 4n) mu2^2 sum_i w_i c_ij c_ik
  Eigen::Index n_;
};

/// One-shot evaluation of the estimated ASE; w given per observation (empty
/// vector means all ones).
CriterionValue aase_hat(const Dataset& data, double rss_value,
                        const Eigen::MatrixXd& curvature_at_data, const Eigen::VectorXd& h,
                        const KernelMoments& moments, const WeightFn& w = {});

/// Evaluates w at every row; empty w gives ones.
Eigen::VectorXd observation_weights(const Dataset& data, const WeightFn& w);

}  // namespace smoothfit
