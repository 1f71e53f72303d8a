#pragma once

// The L2 goodness-of-fit statistic T_n, its plug-in calibration and the
// end-to-end test on a split study design.

#include <functional>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "nethaz/core_model.hpp"
#include "nethaz/estimators.hpp"
#include "nethaz/kernels.hpp"
#include "nethaz/optimize.hpp"
#include "nethaz/quadrature.hpp"

namespace nethaz {

using TimeFunction = std::function<double(double)>;

/// Plug-in estimates on the test interval.
struct PlugInQuantities {
  QuadratureGrid grid;
  Index r_n = 0;
  double clamp_epsilon = 0.0;  // 0 when clamping is disabled
  StepFunction p_hat;          // edge fraction, clamped
  StepFunction risk;           // X_n(t; beta)
  double a_hat = 0.0;
  Vector p_values;     // p_hat on the grid
  Vector xbar_values;  // X_n / (r_n p_hat) on the grid
  Vector gamma_values;  // a_hat^4 / (r_n^2 p_hat^2) on the grid
};

/// Clamped (or raw) edge fraction p_hat(t) = C(t) / r_n on `range`.
StepFunction edge_fraction_function(const PairPanel& panel, const Interval& range, bool clamp = true);

/// X_bar(t; beta) = X_n(t; beta) / (r_n p_hat(t)) on the grid. Throws
/// DataError("empty risk region") when no pair is connected somewhere on the
/// support of w, or when p_hat vanishes there with clamping disabled.
BaselineCurve compute_xbar(const PairPanel& panel, const Vector& beta, const LinkSpec& link,
                           const QuadratureGrid& grid, const WeightFunction& weight, bool clamp = true);

/// a_n = (int int K_{h,t}(s) / (r_n p(s)) w(t) ds dt)^(-1/2). The inner
/// integral is exact on the pieces of p; the outer uses the grid.
double compute_a_n(const TimeFunction& p, std::span<const double> p_breakpoints, const KernelSpec& kernel,
                   const WeightFunction& weight, const QuadratureGrid& grid, Index r_n);

/// T_n = int (alpha_np - alpha_s)^2 w dt by the trapezoid rule.
double compute_T_n(const BaselineCurve& alpha_np, const BaselineCurve& alpha_smoothed, const WeightFunction& weight);

/// A_n = a^2 sum_events f_n(r, r) (X_bar(r) r_n p(r))^(-2). Since
/// r_n p X_bar = X_n, only the risk at each event enters.
double compute_A_n(std::span<const double> event_times, std::span<const double> event_risk, double a_hat,
                   const KernelSpec& kernel, const WeightFunction& weight);

/// B = 4 K2 int xbar^-2 w^2 alpha^2 gamma ds, composite Gauss-Legendre with
/// pieces no wider than the grid spacing and split at `breakpoints`.
double compute_B(const TimeFunction& xbar, const TimeFunction& alpha, const TimeFunction& gamma,
                 std::span<const double> breakpoints, const KernelSpec& kernel, const WeightFunction& weight,
                 const QuadratureGrid& grid);

/// int (int K_{h,t}(s) Delta(s) ds)^2 w(t) dt.
double local_alternative_drift(const TimeFunction& delta, std::span<const double> breakpoints,
                               const KernelSpec& kernel, const WeightFunction& weight, const QuadratureGrid& grid);

/// h = (r_n p_bar)^(-1/5) L / 4 with p_bar the time-averaged raw edge
/// fraction over the test interval of length L.
double default_bandwidth(const PairPanel& panel, const Interval& test);

/// z = (a^2 sqrt(h) T_n - A_n / sqrt(h)) / sqrt(B).
double standardized_statistic(double T_n, double a_hat, double A_n, double B, double h);
/// One-sided upper-tail p-value 1 - Phi(z).
double upper_p_value(double z);

struct TestOptions {
  KernelSpec kernel{KernelShape::triangular, 0.0};  // bandwidth <= 0 selects the default rule
  Index grid_size = 4096;
  bool clamp = true;
  Index min_events = 10;
  std::optional<WeightFunction> weight;  // default: WeightFunction::tapered
  OptimizerOptions optimizer;
  std::vector<double> levels{0.10, 0.05, 0.01};
};

struct TestReport {
  double T_n = 0.0;
  double a_hat = 0.0;
  double A_n = 0.0;
  double B = 0.0;
  double z = 0.0;
  double p_value = 1.0;
  std::map<double, bool> reject_at;
  double h = 0.0;
  KernelShape kernel = KernelShape::triangular;
  WeightFunction weight;
  Interval fit_interval;
  Interval test_interval;
  Index n_events_fit = 0;
  Index n_events_test = 0;
  Index tie_adjustments = 0;
  double clamp_epsilon = 0.0;
  Index r_n = 0;
  double k2 = 0.0;

  ParametricFit fit;
  PartialFit partial;
  PlugInQuantities plug_in;
  BaselineCurve alpha_np;
  BaselineCurve alpha_smoothed;
  BaselineCurve alpha_parametric;
};

/// Fits on the fit interval, then computes the statistic and its
/// calibration from the test interval only.
TestReport run_test(const PairPanel& panel, const StudyDesign& design, const ModelSpec& model,
                    const TestOptions& options = {});

}  // namespace nethaz
