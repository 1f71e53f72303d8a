#pragma once

// Parametric MLE, partial-likelihood estimator, kernel-smoothed
// Nelson-Aalen baseline and the smoothed parametric baseline.

#include <string>
#include <vector>

#include "nethaz/core_model.hpp"
#include "nethaz/kernels.hpp"
#include "nethaz/likelihood.hpp"
#include "nethaz/optimize.hpp"
#include "nethaz/quadrature.hpp"

namespace nethaz {

struct ParametricFit {
  Vector theta_hat;
  Vector beta_hat;
  double loglik = 0.0;
  double gradient_norm = 0.0;
  bool converged = false;
  int iterations = 0;
  std::string status;
  Index event_count = 0;
  Matrix information;  // observed information in (theta, beta)
};

struct PartialFit {
  Vector beta_tilde;
  double partial_loglik = 0.0;
  double gradient_norm = 0.0;
  bool converged = false;
  int iterations = 0;
  bool flat = false;  // no covariate variation: likelihood constant in beta
  std::string status;
  Index event_count = 0;
  Matrix information;
};

/// Maximizes the joint likelihood over `window` starting from zero. Throws
/// NumericalError("degenerate likelihood") without events in the window or
/// when an event falls outside its pair's risk set.
ParametricFit fit_mle(const PairPanel& panel, const BaselineSpec& baseline, const LinkSpec& link,
                      const Interval& window, const OptimizerOptions& options = {});

/// Maximizes the partial likelihood over `window` starting from zero.
PartialFit fit_partial(const PairPanel& panel, const LinkSpec& link, const Interval& window,
                       const OptimizerOptions& options = {});

/// Standard errors from an information matrix (NaN where not invertible).
Vector standard_errors(const Matrix& information);

/// Smoothed Nelson-Aalen estimator
///   alpha_hat(t) = sum_events K_{h,t}(s) C_n(s-) / X_n(s-; beta)
/// with 0/0 := 0, using the events of `window`.
class NelsonAalen {
 public:
  NelsonAalen(const PairPanel& panel, const Vector& beta, const LinkSpec& link, const KernelSpec& kernel,
              const Interval& window);

  double operator()(double t) const;
  BaselineCurve curve(const QuadratureGrid& grid) const;

  const std::vector<double>& event_times() const { return times_; }
  /// C_n(s-) / X_n(s-; beta) at each event.
  const std::vector<double>& increments() const { return increments_; }
  /// X_n(s-; beta) at each event.
  const std::vector<double>& risk() const { return risk_; }
  const KernelSpec& kernel() const { return kernel_; }

 private:
  KernelSpec kernel_;
  std::vector<double> times_;
  std::vector<double> increments_;
  std::vector<double> risk_;
};

BaselineCurve nelson_aalen(const PairPanel& panel, const Vector& beta, const LinkSpec& link,
                           const KernelSpec& kernel, const QuadratureGrid& grid, const Interval& window);

/// alpha_s(theta, t) = int K_{h,t}(s) alpha(theta, s) ds over the grid range.
BaselineCurve smoothed_parametric_baseline(const Vector& theta, const BaselineSpec& baseline,
                                           const KernelSpec& kernel, const QuadratureGrid& grid);

}  // namespace nethaz
