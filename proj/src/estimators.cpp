#include "nethaz/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "nethaz/errors.hpp"

namespace nethaz {

namespace {

// Observed information of the joint likelihood by central differences of
// the analytic gradient.
Matrix numerical_information(const FullLikelihood& likelihood, const Vector& theta, const Vector& beta) {
  const Index d = theta.size();
  const Index n = d + beta.size();
  Matrix hessian(n, n);
  for (Index k = 0; k < n; ++k) {
    const double step = 1e-5 * std::max(1.0, k < d ? std::abs(theta[k]) : std::abs(beta[k - d]));
    Vector tp = theta, tm = theta, bp = beta, bm = beta;
    if (k < d) {
      tp[k] += step;
      tm[k] -= step;
    } else {
      bp[k - d] += step;
      bm[k - d] -= step;
    }
    hessian.col(k) = (likelihood.evaluate(tp, bp).gradient - likelihood.evaluate(tm, bm).gradient) / (2.0 * step);
  }
  return -0.5 * (hessian + hessian.transpose());
}

}  // namespace

ParametricFit fit_mle(const PairPanel& panel, const BaselineSpec& baseline, const LinkSpec& link,
                      const Interval& window, const OptimizerOptions& options) {
  const FullLikelihood likelihood(panel, baseline, link, window);
  if (likelihood.event_count() == 0) throw NumericalError("degenerate likelihood: no events in the fit interval");
  const Index d = likelihood.theta_dimension();
  const Index p = likelihood.beta_dimension();

  auto objective = [&](const Vector& x, Vector& gradient) {
    const auto value = likelihood.evaluate(x.head(d), x.tail(p));
    gradient = value.gradient;
    return value.value;
  };
  const auto start = likelihood.evaluate(Vector::Zero(d), Vector::Zero(p));
  if (start.degenerate) throw NumericalError("degenerate likelihood: event outside its pair's risk set");

  const auto result = maximize_bfgs(objective, Vector::Zero(d + p), options);
  ParametricFit fit;
  fit.theta_hat = result.x.head(d);
  fit.beta_hat = result.x.tail(p);
  fit.loglik = result.value;
  fit.gradient_norm = result.gradient_norm;
  fit.converged = result.converged;
  fit.iterations = result.iterations;
  fit.status = result.status;
  fit.event_count = likelihood.event_count();
  fit.information = numerical_information(likelihood, fit.theta_hat, fit.beta_hat);
  return fit;
}

PartialFit fit_partial(const PairPanel& panel, const LinkSpec& link, const Interval& window,
                       const OptimizerOptions& options) {
  const RiskSetIndex index(panel, link, window);
  if (index.event_count() == 0) throw NumericalError("degenerate likelihood: no events in the fit interval");
  const Index p = panel.covariate_dimension();

  PartialFit fit;
  fit.event_count = index.event_count();
  if (p == 0 || !index.covariates_vary()) {
    const auto value = index.partial(Vector::Zero(p));
    fit.beta_tilde = Vector::Zero(p);
    fit.partial_loglik = value.value;
    fit.gradient_norm = p == 0 ? 0.0 : value.gradient.lpNorm<Eigen::Infinity>();
    fit.converged = true;
    fit.flat = true;
    fit.status = "flat likelihood";
    fit.information = Matrix::Zero(p, p);
    return fit;
  }

  auto objective = [&](const Vector& beta, Vector& gradient) {
    const auto value = index.partial(beta);
    gradient = value.gradient;
    return value.value;
  };
  const auto result = maximize_bfgs(objective, Vector::Zero(p), options);
  fit.beta_tilde = result.x;
  fit.partial_loglik = result.value;
  fit.gradient_norm = result.gradient_norm;
  fit.converged = result.converged;
  fit.iterations = result.iterations;
  fit.status = result.status;
  fit.information = index.partial_information(result.x);
  return fit;
}

Vector standard_errors(const Matrix& information) {
  const Index n = information.rows();
  Vector out = Vector::Constant(n, std::numeric_limits<double>::quiet_NaN());
  if (n == 0) return out;
  Eigen::LDLT<Matrix> ldlt(information);
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) return out;
  const Matrix inverse = ldlt.solve(Matrix::Identity(n, n));
  for (Index k = 0; k < n; ++k) {
    if (inverse(k, k) > 0.0) out[k] = std::sqrt(inverse(k, k));
  }
  return out;
}

// ---------------------------------------------------------------------------

NelsonAalen::NelsonAalen(const PairPanel& panel, const Vector& beta, const LinkSpec& link,
                         const KernelSpec& kernel, const Interval& window)
    : kernel_(kernel) {
  if (!(kernel.bandwidth > 0.0)) throw std::invalid_argument("kernel bandwidth must be positive");
  if (!beta.allFinite()) throw std::invalid_argument("nelson_aalen: beta must be finite");
  const RiskSetIndex index(panel, link, window);
  const Vector risk = index.risk_at_events(beta);
  times_ = index.event_times();
  risk_.assign(risk.data(), risk.data() + risk.size());
  increments_.resize(times_.size());
  for (std::size_t e = 0; e < times_.size(); ++e) {
    increments_[e] = risk_[e] > 0.0 ? 1.0 / risk_[e] : 0.0;
  }
}

double NelsonAalen::operator()(double t) const {
  const double h = kernel_.bandwidth;
  auto first = std::lower_bound(times_.begin(), times_.end(), t - h);
  double total = 0.0;
  for (auto it = first; it != times_.end() && *it <= t + h; ++it) {
    const auto e = static_cast<std::size_t>(it - times_.begin());
    total += kernel_at(kernel_, t, *it) * increments_[e];
  }
  return total;
}

BaselineCurve NelsonAalen::curve(const QuadratureGrid& grid) const {
  return sample_curve(*this, grid, CurveKind::nelson_aalen);
}

BaselineCurve nelson_aalen(const PairPanel& panel, const Vector& beta, const LinkSpec& link,
                           const KernelSpec& kernel, const QuadratureGrid& grid, const Interval& window) {
  return NelsonAalen(panel, beta, link, kernel, window).curve(grid);
}

BaselineCurve smoothed_parametric_baseline(const Vector& theta, const BaselineSpec& baseline,
                                           const KernelSpec& kernel, const QuadratureGrid& grid) {
  const auto cuts = baseline.breakpoints(grid.range());
  auto curve = smooth_curve([&](double s) { return baseline.value(theta, s); }, kernel, grid, cuts);
  curve.kind = CurveKind::parametric_smoothed;
  return curve;
}

}  // namespace nethaz
