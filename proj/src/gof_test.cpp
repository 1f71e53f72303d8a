#include "nethaz/gof_test.hpp"

#include <algorithm>
#include <cmath>

#include "nethaz/errors.hpp"

namespace nethaz {

StepFunction edge_fraction_function(const PairPanel& panel, const Interval& range, bool clamp) {
  const auto counts = edge_count_function(panel, range);
  const double r = static_cast<double>(panel.pair_count());
  if (!(r > 0.0)) throw DataError("panel has no possible pairs");
  const double floor = clamp ? edge_fraction_floor(panel) : 0.0;
  std::vector<double> values(counts.values().size());
  for (std::size_t k = 0; k < values.size(); ++k) values[k] = std::max(counts.values()[k] / r, floor);
  return {counts.knots(), std::move(values)};
}

namespace {

// Throws when the step function is zero on a piece of positive length
// inside the open support.
void require_positive_on(const StepFunction& f, const Interval& support, const char* what) {
  const auto& knots = f.knots();
  for (std::size_t k = 0; k < knots.size(); ++k) {
    const double a = std::max(knots[k], support.lo);
    const double b = std::min(k + 1 < knots.size() ? knots[k + 1] : kInfinity, support.hi);
    if (b > a && !(f.values()[k] > 0.0)) throw DataError(std::string("empty risk region: ") + what);
  }
}

}  // namespace

BaselineCurve compute_xbar(const PairPanel& panel, const Vector& beta, const LinkSpec& link,
                           const QuadratureGrid& grid, const WeightFunction& weight, bool clamp) {
  const auto p = edge_fraction_function(panel, grid.range(), clamp);
  const auto risk = risk_function(panel, beta, link, grid.range());
  const auto support = weight.support();
  require_positive_on(p, support, "edge fraction vanishes on the support of w");
  require_positive_on(risk, support, "no connected pair on the support of w");
  const double r = static_cast<double>(panel.pair_count());
  return sample_curve(
      [&](double t) {
        const double pt = p(t);
        return pt > 0.0 ? risk(t) / (r * pt) : 0.0;
      },
      grid);
}

double compute_a_n(const TimeFunction& p, std::span<const double> p_breakpoints, const KernelSpec& kernel,
                   const WeightFunction& weight, const QuadratureGrid& grid, Index r_n) {
  const double r = static_cast<double>(r_n);
  const KernelSmoother inner([&](double s) { return 1.0 / (r * p(s)); }, kernel, grid, p_breakpoints);
  Vector values = Vector::Zero(grid.size());
  for (Index k = 0; k < grid.size(); ++k) {
    const double t = grid.point(k);
    const double wt = weight(t);
    if (wt > 0.0) values[k] = inner(t) * wt;
  }
  const double total = trapezoid(values, grid);
  if (!(total > 0.0) || !std::isfinite(total)) throw NumericalError("a_n: nonpositive double integral");
  return 1.0 / std::sqrt(total);
}

double compute_T_n(const BaselineCurve& alpha_np, const BaselineCurve& alpha_smoothed, const WeightFunction& weight) {
  if (!(alpha_np.grid == alpha_smoothed.grid)) throw std::invalid_argument("compute_T_n: grid mismatch");
  const auto& grid = alpha_np.grid;
  Vector values(grid.size());
  for (Index k = 0; k < grid.size(); ++k) {
    const double diff = alpha_np.values[k] - alpha_smoothed.values[k];
    values[k] = diff * diff * weight(grid.point(k));
  }
  return trapezoid(values, grid);
}

double compute_A_n(std::span<const double> event_times, std::span<const double> event_risk, double a_hat,
                   const KernelSpec& kernel, const WeightFunction& weight) {
  if (event_times.size() != event_risk.size()) throw std::invalid_argument("compute_A_n: size mismatch");
  const auto support = weight.support();
  const double h = kernel.bandwidth;
  double total = 0.0;
  for (std::size_t e = 0; e < event_times.size(); ++e) {
    const double s = event_times[e];
    if (s <= support.lo - h || s >= support.hi + h) continue;
    const double x = event_risk[e];
    if (!(x > 0.0)) continue;
    total += fn_weight(kernel, weight, s, s) / (x * x);
  }
  return a_hat * a_hat * total;
}

double compute_B(const TimeFunction& xbar, const TimeFunction& alpha, const TimeFunction& gamma,
                 std::span<const double> breakpoints, const KernelSpec& kernel, const WeightFunction& weight,
                 const QuadratureGrid& grid) {
  std::vector<double> cuts(breakpoints.begin(), breakpoints.end());
  for (double b : weight.breakpoints()) cuts.push_back(b);
  const auto support = weight.support();
  const Interval range{std::max(support.lo, grid.lo()), std::min(support.hi, grid.hi())};
  auto integrand = [&](double s) {
    const double w = weight(s);
    if (w == 0.0) return 0.0;
    const double x = xbar(s);
    const double a = alpha(s);
    return w * w * a * a * gamma(s) / (x * x);
  };
  return 4.0 * k2_constant(kernel) * integrate(integrand, range, grid.spacing(), cuts, 4);
}

double local_alternative_drift(const TimeFunction& delta, std::span<const double> breakpoints,
                               const KernelSpec& kernel, const WeightFunction& weight, const QuadratureGrid& grid) {
  const KernelSmoother smoother(delta, kernel, grid, breakpoints);
  Vector values = Vector::Zero(grid.size());
  for (Index k = 0; k < grid.size(); ++k) {
    const double t = grid.point(k);
    const double wt = weight(t);
    if (wt == 0.0) continue;
    const double s = smoother(t);
    values[k] = s * s * wt;
  }
  return trapezoid(values, grid);
}

double default_bandwidth(const PairPanel& panel, const Interval& test) {
  if (!(test.length() > 0.0)) throw ConfigError("test interval is empty");
  const double r = static_cast<double>(panel.pair_count());
  const double p_bar = edge_count_function(panel, test).integral(test.lo, test.hi) / (r * test.length());
  if (!(p_bar > 0.0)) throw DataError("empty risk region: no edges in the test interval");
  return std::pow(r * p_bar, -0.2) * test.length() / 4.0;
}

double standardized_statistic(double T_n, double a_hat, double A_n, double B, double h) {
  const double root_h = std::sqrt(h);
  return (a_hat * a_hat * root_h * T_n - A_n / root_h) / std::sqrt(B);
}

double upper_p_value(double z) { return 0.5 * std::erfc(z / std::sqrt(2.0)); }

TestReport run_test(const PairPanel& input, const StudyDesign& design, const ModelSpec& model,
                    const TestOptions& options) {
  design.validate(input.horizon);
  if (options.grid_size < 2) throw ConfigError("grid size must be at least 2");

  PairPanel panel = input;
  TestReport report;
  report.tie_adjustments = resolve_ties(panel);
  report.fit_interval = design.fit;
  report.test_interval = design.test;
  report.n_events_fit = panel.event_count(design.fit);
  report.n_events_test = panel.event_count(design.test);
  if (report.n_events_fit < options.min_events) {
    throw DataError("insufficient events in the fit interval (" + std::to_string(report.n_events_fit) + ")");
  }
  if (report.n_events_test < options.min_events) {
    throw DataError("insufficient events in the test interval (" + std::to_string(report.n_events_test) + ")");
  }

  report.fit = fit_mle(panel, model.baseline, model.link, design.fit, options.optimizer);
  report.partial = fit_partial(panel, model.link, design.fit, options.optimizer);
  if (!report.fit.converged) warn("parametric fit did not converge: " + report.fit.status);
  if (!report.partial.converged) warn("partial-likelihood fit did not converge: " + report.partial.status);

  KernelSpec kernel = options.kernel;
  if (!(kernel.bandwidth > 0.0)) kernel.bandwidth = default_bandwidth(panel, design.test);
  report.h = kernel.bandwidth;
  report.kernel = kernel.shape;
  report.k2 = k2_constant(kernel);
  if (!(design.test.length() > 4.0 * kernel.bandwidth)) {
    throw ConfigError("test interval must be longer than four bandwidths");
  }
  const WeightFunction weight = options.weight ? *options.weight : WeightFunction::tapered(design.test, kernel.bandwidth);
  report.weight = weight;
  const QuadratureGrid grid(design.test.lo, design.test.hi, options.grid_size);

  const Vector& beta = report.partial.beta_tilde;
  const Vector& theta = report.fit.theta_hat;
  const NelsonAalen estimator(panel, beta, model.link, kernel, design.test);
  report.alpha_np = estimator.curve(grid);
  report.alpha_smoothed = smoothed_parametric_baseline(theta, model.baseline, kernel, grid);
  report.alpha_parametric =
      sample_curve([&](double t) { return model.baseline.value(theta, t); }, grid, CurveKind::parametric_raw);

  auto& plug = report.plug_in;
  plug.grid = grid;
  plug.r_n = panel.pair_count();
  plug.clamp_epsilon = options.clamp ? edge_fraction_floor(panel) : 0.0;
  plug.p_hat = edge_fraction_function(panel, design.test, options.clamp);
  plug.risk = risk_function(panel, beta, model.link, design.test);
  const auto xbar = compute_xbar(panel, beta, model.link, grid, weight, options.clamp);
  const double r = static_cast<double>(plug.r_n);
  const auto p_cuts = plug.p_hat.breakpoints();
  plug.a_hat = compute_a_n(plug.p_hat, p_cuts, kernel, weight, grid, plug.r_n);
  const double a4 = std::pow(plug.a_hat, 4);
  plug.p_values = sample_curve(plug.p_hat, grid).values;
  plug.xbar_values = xbar.values;
  plug.gamma_values = (a4 / (r * r * plug.p_values.array().square())).matrix();
  report.clamp_epsilon = plug.clamp_epsilon;
  report.r_n = plug.r_n;
  report.a_hat = plug.a_hat;

  report.T_n = compute_T_n(report.alpha_np, report.alpha_smoothed, weight);
  report.A_n = compute_A_n(estimator.event_times(), estimator.risk(), plug.a_hat, kernel, weight);

  std::vector<double> cuts = model.baseline.breakpoints(design.test);
  for (double b : plug.risk.breakpoints()) cuts.push_back(b);
  for (double b : p_cuts) cuts.push_back(b);
  const auto& p_hat = plug.p_hat;
  const auto& risk = plug.risk;
  report.B = compute_B([&](double s) { return risk(s) / (r * p_hat(s)); },
                       [&](double s) { return model.baseline.value(theta, s); },
                       [&](double s) {
                         const double p = p_hat(s);
                         return a4 / (r * r * p * p);
                       },
                       cuts, kernel, weight, grid);
  if (!(report.B > 0.0) || !std::isfinite(report.B)) throw NumericalError("B is not a positive finite number");

  report.z = standardized_statistic(report.T_n, report.a_hat, report.A_n, report.B, report.h);
  report.p_value = upper_p_value(report.z);
  for (double level : options.levels) report.reject_at[level] = report.p_value < level;
  return report;
}

}  // namespace nethaz
