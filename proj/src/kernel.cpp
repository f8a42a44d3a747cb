#include "smoothfit/kernel.hpp"

#include <algorithm>
#include <array>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/legendre.hpp>
#include <cmath>
#include <utility>

#include "smoothfit/error.hpp"

namespace smoothfit {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::invalid_input: return "invalid-input";
    case ErrorCode::invalid_bandwidth: return "invalid-bandwidth";
    case ErrorCode::domain: return "domain";
    case ErrorCode::empty_neighborhood: return "empty-neighborhood";
    case ErrorCode::singular_moment: return "singular-moment";
    case ErrorCode::non_convergence: return "non-convergence";
    case ErrorCode::selector_failure: return "selector-failure";
    case ErrorCode::sampler_degenerate: return "sampler-degenerate";
    case ErrorCode::numeric: return "numeric-error";
    case ErrorCode::io: return "io";
  }
  return "unknown";
}

namespace {

constexpr int gl_points = 64;

struct GaussLegendre {
  std::array<double, gl_points> nodes{};
  std::array<double, gl_points> weights{};

  GaussLegendre() {
    auto zeros = boost::math::legendre_p_zeros<double>(gl_points);  // positive half
    int k = 0;
    for (double x : zeros) {
      double dp = boost::math::legendre_p_prime(gl_points, x);
      double w = 2.0 / ((1.0 - x * x) * dp * dp);
      nodes[k] = x;
      weights[k++] = w;
      nodes[k] = -x;
      weights[k++] = w;
    }
  }
};

const GaussLegendre& gauss_legendre() {
  static const GaussLegendre rule;
  return rule;
}

double biweight_cdf(double t) {
  t = std::clamp(t, -1.0, 1.0);
  double t3 = t * t * t;
  return 0.9375 * (t - 2.0 * t3 / 3.0 + t3 * t * t / 5.0) + 0.5;
}

double epanechnikov_cdf(double t) {
  t = std::clamp(t, -1.0, 1.0);
  return 0.75 * (t - t * t * t / 3.0) + 0.5;
}

double adaptive(const std::function<double(double)>& f) {
  double err = 0.0;
  double v = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, -1.0, 1.0, 15,
                                                                          1e-12, &err);
  if (!std::isfinite(v) || err > 1e-10 * std::max(1.0, std::abs(v)))
    throw Error(ErrorCode::numeric, "kernel quadrature did not converge");
  return v;
}

}  // namespace

Kernel::Kernel(KernelKind kind, std::string name, std::function<double(double)> f)
    : kind_(kind), name_(std::move(name)), custom_(std::move(f)) {}

Kernel Kernel::biweight() {
  Kernel k(KernelKind::biweight, "biweight", {});
  k.moments_ = {15.0 / 16.0, 5.0 / 7.0, 1.0 / 7.0};
  return k;
}

Kernel Kernel::epanechnikov() {
  Kernel k(KernelKind::epanechnikov, "epanechnikov", {});
  k.moments_ = {0.75, 0.6, 0.2};
  return k;
}

Kernel Kernel::custom(std::string name, std::function<double(double)> density) {
  if (!density) throw Error(ErrorCode::invalid_input, "custom kernel without a density");
  Kernel k(KernelKind::custom, std::move(name), std::move(density));
  auto f = [&k](double t) { return k(t); };
  double total = adaptive(f);
  if (std::abs(total - 1.0) > 1e-10)
    throw Error(ErrorCode::invalid_input,
                "custom kernel '" + k.name_ + "' does not integrate to one");
  for (double t : {0.1, 0.33, 0.5, 0.77, 0.95}) {
    if (std::abs(k(t) - k(-t)) > 1e-12 * std::max(1.0, std::abs(k(t))))
      throw Error(ErrorCode::invalid_input, "custom kernel '" + k.name_ + "' is not symmetric");
  }
  k.moments_.k0 = k(0.0);
  k.moments_.r_k = adaptive([&k](double t) { return k(t) * k(t); });
  k.moments_.mu2 = adaptive([&k](double t) { return t * t * k(t); });
  return k;
}

Kernel Kernel::by_name(std::string_view name) {
  if (name == "biweight") return biweight();
  if (name == "epanechnikov") return epanechnikov();
  throw Error(ErrorCode::invalid_input, "unknown kernel '" + std::string(name) + "'");
}

double Kernel::operator()(double t) const noexcept {
  if (t < -1.0 || t > 1.0) return 0.0;
  switch (kind_) {
    case KernelKind::biweight: {
      double s = 1.0 - t * t;
      return 0.9375 * s * s;
    }
    case KernelKind::epanechnikov: return 0.75 * (1.0 - t * t);
    case KernelKind::custom: return custom_(t);
  }
  return 0.0;
}

double Kernel::mass(double a, double b) const {
  a = std::max(a, -1.0);
  b = std::min(b, 1.0);
  if (b <= a) return 0.0;
  switch (kind_) {
    case KernelKind::biweight: return biweight_cdf(b) - biweight_cdf(a);
    case KernelKind::epanechnikov: return epanechnikov_cdf(b) - epanechnikov_cdf(a);
    case KernelKind::custom: break;
  }
  const auto& gl = gauss_legendre();
  double half = 0.5 * (b - a), mid = 0.5 * (a + b), s = 0.0;
  for (int i = 0; i < gl_points; ++i) s += gl.weights[i] * custom_(mid + half * gl.nodes[i]);
  return half * s;
}

KernelMoments kernel_moments(const Kernel& k) { return k.moments(); }

double boundary_weight(const Kernel& k, double h, double u, double v) {
  if (!(h > 0.0) || !std::isfinite(h))
    throw Error(ErrorCode::invalid_bandwidth, "bandwidth must be positive");
  double num = k((v - u) / h);
  if (num == 0.0) return 0.0;
  // integral_0^1 K((v - w) / h) dw = h * integral_{(v-1)/h}^{v/h} K(t) dt
  double denom = h * k.mass((v - 1.0) / h, v / h);
  if (denom <= 0.0) return 0.0;
  return num / denom;
}

}  // namespace smoothfit
