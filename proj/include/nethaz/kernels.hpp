#pragma once

// Kernel functions, the boundary-cutting weight function w, kernel
// smoothing of functions of time, and the kernel constants used by the
// test calibration.

#include <cmath>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "nethaz/core_model.hpp"
#include "nethaz/quadrature.hpp"

namespace nethaz {

enum class KernelShape { uniform, triangular, epanechnikov };

KernelShape parse_kernel_shape(std::string_view name);
std::string to_string(KernelShape shape);

/// Kernel K(u) supported on [-1, 1] with unit mass.
template <typename Scalar>
Scalar kernel_profile(KernelShape shape, Scalar u) {
  using std::abs;
  if (abs(u) > Scalar(1)) return Scalar(0);
  switch (shape) {
    case KernelShape::uniform:
      return Scalar(0.5);
    case KernelShape::triangular:
      return Scalar(1) - abs(u);
    case KernelShape::epanechnikov:
      return Scalar(0.75) * (Scalar(1) - u * u);
  }
  return Scalar(0);
}

struct KernelSpec {
  KernelShape shape = KernelShape::triangular;
  double bandwidth = 1.0;  // hours
};

/// K_{h,t}(s) = K((s - t) / h) / h.
double kernel_at(const KernelSpec& kernel, double t, double s);

/// K2 = int_0^2 (int_{-1}^1 K(u + v) K(u) du)^2 dv.
double k2_constant(KernelShape shape);
inline double k2_constant(const KernelSpec& kernel) { return k2_constant(kernel.shape); }

/// int K(u)^2 du.
double kernel_square_integral(KernelShape shape);

/// Weight w(t): one on `inner`, C1 cubic ramps of width `ramp` on either
/// side, zero beyond. A zero ramp gives the indicator of `inner`.
class WeightFunction {
 public:
  WeightFunction() = default;
  WeightFunction(Interval inner, double ramp);

  /// Default weight on a test range: zero within one bandwidth of either
  /// end, ramping up over the next bandwidth.
  static WeightFunction tapered(const Interval& range, double bandwidth);

  double operator()(double t) const;

  const Interval& inner() const { return inner_; }
  double ramp() const { return ramp_; }
  Interval support() const { return {inner_.lo - ramp_, inner_.hi + ramp_}; }
  std::vector<double> breakpoints() const;
  /// Exact integral of w.
  double integral() const { return inner_.length() + ramp_; }

 private:
  Interval inner_{0.0, 1.0};
  double ramp_ = 0.0;
};

/// f_n(r, s) = int h K_{h,t}(s) K_{h,t}(r) w(t) dt.
double fn_weight(const KernelSpec& kernel, const WeightFunction& weight, double r, double s);

/// Evaluates t -> int_{domain} K_{h,t}(s) f(s) ds for a fixed function f.
///
/// f is sampled once at Gauss-Legendre nodes on pieces formed by the grid
/// cells and the supplied discontinuities of f; pieces cut by the kernel
/// support or its central kink are re-integrated exactly.
class KernelSmoother {
 public:
  KernelSmoother(std::function<double(double)> f, const KernelSpec& kernel, const QuadratureGrid& grid,
                 std::span<const double> breakpoints = {});

  double operator()(double t) const;

 private:
  double piece_integral(double a, double b, double t) const;

  std::function<double(double)> f_;
  KernelSpec kernel_;
  Interval domain_;
  std::vector<double> edges_;
  Matrix nodes_;           // Gauss nodes, one column per piece
  Matrix weighted_values_;  // weight * f(node), one column per piece
};

/// Kernel-smoothed version of f sampled on the grid. Throws
/// std::invalid_argument when the bandwidth exceeds half the grid range.
BaselineCurve smooth_curve(const std::function<double(double)>& f, const KernelSpec& kernel,
                           const QuadratureGrid& grid, std::span<const double> breakpoints = {});

}  // namespace nethaz
