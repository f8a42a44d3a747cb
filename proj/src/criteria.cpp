#include "smoothfit/criteria.hpp"

#include <cmath>

#include "smoothfit/error.hpp"

namespace smoothfit {

TrimSpec TrimSpec::symmetric(int d, double cut) {
  if (!(cut >= 0.0 && cut < 0.5))
    throw Error(ErrorCode::invalid_input, "trim cut must lie in [0, 0.5)");
  TrimSpec t;
  t.lower = Eigen::VectorXd::Constant(d, cut);
  t.upper = Eigen::VectorXd::Constant(d, 1.0 - cut);
  t.active = true;
  return t;
}

bool TrimSpec::keeps(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  if (!active) return true;
  for (Eigen::Index j = 0; j < x.size(); ++j)
    if (x[j] < lower[j] || x[j] > upper[j]) return false;
  return true;
}

Eigen::VectorXd observation_weights(const Dataset& data, const WeightFn& w) {
  if (!w) return Eigen::VectorXd::Ones(data.n());
  Eigen::VectorXd out(data.n());
  for (Eigen::Index i = 0; i < data.n(); ++i) out[i] = w(data.x.row(i).transpose());
  return out;
}

CriterionValue rss_from_predictions(const Dataset& data, const Eigen::VectorXd& pred,
                                    const WeightFn& w, const TrimSpec& trim) {
  CriterionValue out;
  double s = 0.0;
  for (Eigen::Index i = 0; i < data.n(); ++i) {
    auto xi = data.x.row(i).transpose();
    if (!trim.keeps(xi)) continue;
    double wi = w ? w(xi) : 1.0;
    double r = data.y[i] - pred[i];
    s += wi * r * r;
    ++out.n_used;
  }
  out.value = data.n() > 0 ? s / static_cast<double>(data.n()) : 0.0;
  return out;
}

CriterionValue rss(const Dataset& data, const AdditiveFit& fit, const WeightFn& w,
                   const TrimSpec& trim) {
  return rss_from_predictions(data, predict_rows(fit, data.x), w, trim);
}

CriterionValue pls(double rss_value, const Eigen::VectorXd& h, double k0, Eigen::Index n) {
  if (rss_value < 0.0) throw Error(ErrorCode::invalid_input, "negative RSS");
  double penalty = 0.0;
  for (Eigen::Index j = 0; j < h.size(); ++j) {
    if (!(h[j] > 0.0)) throw Error(ErrorCode::invalid_bandwidth, "bandwidth must be positive");
    penalty += k0 / (static_cast<double>(n) * h[j]);
  }
  return {rss_value * (1.0 + 2.0 * penalty), n};
}

CriterionValue ase(const Dataset& data, const AdditiveFit& fit, const TruthFn& truth,
                   const WeightFn& w, const TrimSpec& trim) {
  CriterionValue out;
  double s = 0.0;
  for (Eigen::Index i = 0; i < data.n(); ++i) {
    auto xi = data.x.row(i).transpose();
    if (!trim.keeps(xi)) continue;
    double wi = w ? w(xi) : 1.0;
    double e = predict(fit, xi) - truth(xi);
    s += wi * e * e;
    ++out.n_used;
  }
  out.value = s / static_cast<double>(data.n());
  return out;
}

CriterionValue ase_j(const Dataset& data, const AdditiveFit& fit, int j,
                     const std::function<double(double)>& truth_centered, const AxisWeightFn& w_j) {
  if (j < 0 || j >= fit.d()) throw Error(ErrorCode::invalid_input, "axis out of range");
  CriterionValue out;
  double s = 0.0;
  for (Eigen::Index i = 0; i < data.n(); ++i) {
    double xj = data.x(i, j);
    double wi = w_j ? w_j(xj) : 1.0;
    double e = fit.grid.interpolate(fit.components[j], xj) - truth_centered(xj);
    s += wi * e * e;
    ++out.n_used;
  }
  out.value = s / static_cast<double>(data.n());
  return out;
}

AaseObjective::AaseObjective(double rss_value, const Eigen::MatrixXd& curvature_at_data,
                             const KernelMoments& moments, const Eigen::VectorXd& obs_weights)
    : variance_coef_(rss_value * moments.r_k), n_(curvature_at_data.rows()) {
  if (obs_weights.size() != n_)
    throw Error(ErrorCode::invalid_input, "weights and curvature rows differ");
  const double n = static_cast<double>(n_);
  gram_ = curvature_at_data.transpose() * obs_weights.asDiagonal() * curvature_at_data;
  gram_ *= moments.mu2 * moments.mu2 / (4.0 * n);
}

double AaseObjective::variance_term(const Eigen::VectorXd& h) const {
  return variance_coef_ * (1.0 / (static_cast<double>(n_) * h.array())).sum();
}

double AaseObjective::bias_term(const Eigen::VectorXd& h) const {
  Eigen::VectorXd h2 = h.array().square();
  return h2.dot(gram_ * h2);
}

double AaseObjective::operator()(const Eigen::VectorXd& h) const {
  return variance_term(h) + bias_term(h);
}

CriterionValue aase_hat(const Dataset& data, double rss_value,
                        const Eigen::MatrixXd& curvature_at_data, const Eigen::VectorXd& h,
                        const KernelMoments& moments, const WeightFn& w) {
  if (curvature_at_data.rows() != data.n() || curvature_at_data.cols() != h.size())
    throw Error(ErrorCode::invalid_input, "curvature matrix must be n x d");
  AaseObjective obj(rss_value, curvature_at_data, moments, observation_weights(data, w));
  return {obj(h), data.n()};
}

}  // namespace smoothfit
