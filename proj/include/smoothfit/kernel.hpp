#pragma once

#include <functional>
#include <string>
#include <string_view>

namespace smoothfit {

enum class KernelKind { biweight, epanechnikov, custom };

struct KernelMoments {
  double k0 = 0.0;   // K(0)
  double r_k = 0.0;  // integral of K^2
  double mu2 = 0.0;  // integral of t^2 K
};

/**
 * Symmetric smoothing kernel supported on [-1, 1].
 *
 * Built-in kernels have closed-form moments and antiderivatives. A custom
 * kernel is any callable that is symmetric, vanishes outside [-1, 1] and
 * integrates to one; its moments are obtained by adaptive quadrature and its
 * partial masses by 64-point Gauss-Legendre.
 */
class Kernel {
 public:
  static Kernel biweight();
  static Kernel epanechnikov();
  static Kernel custom(std::string name, std::function<double(double)> density);
  /// Resolves "biweight" or "epanechnikov"; throws invalid_input otherwise.
  static Kernel by_name(std::string_view name);

  KernelKind kind() const noexcept { return kind_; }
  const std::string& name() const noexcept { return name_; }
  const KernelMoments& moments() const noexcept { return moments_; }

  double operator()(double t) const noexcept;

  /// Integral of K over [a, b] intersected with [-1, 1].
  double mass(double a, double b) const;

 private:
  Kernel(KernelKind kind, std::string name, std::function<double(double)> f);

  KernelKind kind_;
  std::string name_;
  std::function<double(double)> custom_;
  KernelMoments moments_;
};

/// Returns K, K(0), the integral of K^2 and the second moment.
KernelMoments kernel_moments(const Kernel& k);

/// Boundary-corrected kernel on [0, 1]:
///   K((v - u) / h) / integral_0^1 K((v - w) / h) dw.
/// Integrates to one in u for every v in [0, 1]. Returns 0 when the
/// normalizing integral vanishes.
double boundary_weight(const Kernel& k, double h, double u, double v);

}  // namespace smoothfit
