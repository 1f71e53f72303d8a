#pragma once

// Data model for network event panels: per-pair edge indicators, covariate
// paths and event times, the model specification (link and baseline feature
// map) and the risk-set aggregates every estimator consumes.
//
// Time is measured in hours since the study origin throughout.

#include <Eigen/Dense>

#include <cmath>
#include <compare>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace nethaz {

using Index = Eigen::Index;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  double length() const { return hi - lo; }
  bool contains(double t) const { return t >= lo && t <= hi; }
  bool operator==(const Interval&) const = default;
};

/// Events are attributed to the half-open window (lo, hi]; the origin t = 0
/// is included when lo = 0. Adjacent windows therefore never share an event.
inline bool in_event_window(double t, const Interval& window) {
  return (t > window.lo || (window.lo == 0.0 && t == 0.0)) && t <= window.hi;
}

/// Right-continuous step function of time with vector values. Segment k
/// covers [breakpoints[k], breakpoints[k+1]); the last segment extends to the
/// horizon. Values are stored column-wise, one column per segment.
class PiecewisePath {
 public:
  PiecewisePath() = default;
  PiecewisePath(std::vector<double> breakpoints, Matrix values);

  static PiecewisePath constant(const Vector& value);
  static PiecewisePath constant(double value);
  /// 0/1 indicator that is on over the given (sorted, disjoint) intervals.
  static PiecewisePath indicator(std::span<const Interval> on_intervals);
  /// As indicator(), but an interval reaching `horizon` stays open.
  static PiecewisePath edge_indicator(std::span<const Interval> on_intervals, double horizon);

  Index dimension() const { return values_.rows(); }
  Index segment_count() const { return values_.cols(); }
  const std::vector<double>& breakpoints() const { return breakpoints_; }
  const Matrix& values() const { return values_; }

  /// Segment containing t (right-continuous convention).
  Index segment_at(double t) const;
  /// Segment holding the left limit at t; the left limit at the first
  /// breakpoint is the first value.
  Index segment_left_of(double t) const;

  auto value(double t) const { return values_.col(segment_at(t)); }
  auto left_limit(double t) const { return values_.col(segment_left_of(t)); }
  double scalar(double t) const { return values_(0, segment_at(t)); }
  double scalar_left_limit(double t) const { return values_(0, segment_left_of(t)); }

  /// End of segment k, with the last segment ending at `horizon`.
  double segment_end(Index k, double horizon) const {
    return k + 1 < segment_count() ? breakpoints_[static_cast<std::size_t>(k + 1)] : horizon;
  }

  /// Copy with adjacent equal-valued segments merged.
  PiecewisePath canonical() const;

  bool operator==(const PiecewisePath& other) const;

 private:
  std::vector<double> breakpoints_;
  Matrix values_;
};

struct PairKey {
  int i = 0;
  int j = 0;
  auto operator<=>(const PairKey&) const = default;
};

/// Undirected keys are stored with i < j.
inline PairKey canonical_key(PairKey key, bool directed) {
  if (!directed && key.i > key.j) return {key.j, key.i};
  return key;
}

struct PairRecord {
  PairKey key;
  PiecewisePath edge;        // values in {0, 1}
  PiecewisePath covariates;  // values in R^p
  std::vector<double> events;
};

struct PairPanel {
  int n_vertices = 0;
  bool directed = false;
  double horizon = 0.0;
  std::vector<PairRecord> pairs;

  /// Number of possible pairs r_n: n(n-1)/2 undirected, n(n-1) directed.
  Index pair_count() const {
    const Index n = n_vertices;
    return directed ? n * (n - 1) : n * (n - 1) / 2;
  }
  Index covariate_dimension() const { return pairs.empty() ? 0 : pairs.front().covariates.dimension(); }
  Index event_count() const;
  Index event_count(const Interval& window) const;
};

// ---------------------------------------------------------------------------
// Model specification

enum class LinkKind { exp_linear };

struct LinkSpec {
  LinkKind kind = LinkKind::exp_linear;
  Index dimension = 0;
};

/// Relative risk Psi(x; beta). For exp_linear this is exp(beta'x).
template <typename DerivedX, typename DerivedB>
double evaluate_link(const Eigen::MatrixBase<DerivedX>& x, const Eigen::MatrixBase<DerivedB>& beta,
                     const LinkSpec& link);

/// System-wide covariates Z(t), identical for all pairs.
struct SystemCovariates {
  PiecewisePath path;

  Index dimension() const { return path.dimension(); }
};

/// Calendar used for the weekend indicator W(t).
struct WeekendCalendar {
  int origin_weekday = 0;    // weekday of the origin, 0 = Monday ... 6 = Sunday
  double origin_hour = 0.0;  // clock hour of the origin within its day

  bool is_weekend(double t) const;
  /// Day boundaries in (lo, hi) where W(t) may switch.
  std::vector<double> day_boundaries(double lo, double hi) const;
};

struct BaselineFeature {
  enum class Kind { constant, system, sine, cosine };

  Kind kind = Kind::constant;
  int column = 0;        // system covariate column (Kind::system)
  int power = 1;         // exponent applied to the column (Kind::system)
  int multiple = 1;      // harmonic multiple k in sin(k 2 pi t / period)
  double period = 24.0;  // hours
  bool weekend_only = false;

  static BaselineFeature intercept() { return {}; }
  static BaselineFeature system_column(int column, int power = 1);
  static BaselineFeature harmonic(Kind kind, int multiple, double period = 24.0, bool weekend_only = false);
};

/// Log-linear baseline alpha(theta, t) = exp(theta' phi(t)).
class BaselineSpec {
 public:
  std::vector<BaselineFeature> features;
  SystemCovariates system;
  WeekendCalendar calendar;
  double horizon = kInfinity;

  Index dimension() const { return static_cast<Index>(features.size()); }

  void features_at(double t, Eigen::Ref<Vector> out) const;
  Vector features_at(double t) const;
  /// exp(theta' phi(t)) without domain checks.
  double value(const Vector& theta, double t) const;
  /// Points in (lo, hi) where phi may jump.
  std::vector<double> breakpoints(const Interval& range) const;

  static BaselineSpec constant();
  /// Intercept plus sin/cos pairs for multiples 1..harmonics.
  static BaselineSpec diurnal(int harmonics, double period = 24.0);
};

double evaluate_baseline(const Vector& theta, double t, const BaselineSpec& spec);

struct ModelSpec {
  LinkSpec link;
  BaselineSpec baseline;
};

struct StudyDesign {
  Interval fit;
  Interval test;
  bool split = true;

  /// Throws ConfigError on intervals outside [0, horizon] or overlapping
  /// intervals when splitting is enabled.
  void validate(double horizon) const;
};

// ---------------------------------------------------------------------------
// Risk-set aggregates

/// X_n(t; beta) = sum over pairs of C_ij(t) Psi(X_ij(t); beta).
double aggregate_risk(const PairPanel& panel, double t, const Vector& beta, const LinkSpec& link,
                      bool left_limit = false);

/// Clamp floor 1 / (2 r_n) applied to edge fractions.
double edge_fraction_floor(const PairPanel& panel);

/// (1 / r_n) sum C_ij(t), optionally floored at edge_fraction_floor.
double empirical_edge_fraction(const PairPanel& panel, double t, bool clamp = true);

struct PooledEvent {
  double time = 0.0;
  PairKey key;
  Index pair = 0;  // index into panel.pairs
};

struct PooledEvents {
  std::vector<PooledEvent> events;
  Index tie_adjustments = 0;
};

/// Shift applied per duplicate when breaking timestamp ties.
inline constexpr double kTieJitter = 1e-9;

/// Merged event stream, strictly increasing. Duplicate timestamps are moved
/// forward by multiples of kTieJitter in input order.
PooledEvents pooled_event_times(const PairPanel& panel);

/// Applies the tie rule of pooled_event_times to the panel itself and
/// returns the number of adjusted events.
Index resolve_ties(PairPanel& panel);

struct Violation {
  std::string kind;
  PairKey key;
  double time = 0.0;
  std::string message;
};

struct ValidationReport {
  std::vector<Violation> violations;

  bool ok() const { return violations.empty(); }
  std::string summary(std::size_t max_lines = 10) const;
};

/// Checks every structural invariant of the panel. Never throws.
ValidationReport validate_panel(const PairPanel& panel);

/// Scalar right-continuous step function on [knots[0], end).
class StepFunction {
 public:
  StepFunction() = default;
  StepFunction(std::vector<double> knots, std::vector<double> values);

  double operator()(double t) const;
  double left_limit(double t) const;
  const std::vector<double>& knots() const { return knots_; }
  const std::vector<double>& values() const { return values_; }
  /// Interior jump locations.
  std::vector<double> breakpoints() const;
  /// Exact integral over [a, b].
  double integral(double a, double b) const;

  StepFunction transformed(double (*op)(double)) const;

 private:
  std::vector<double> knots_;
  std::vector<double> values_;
};

/// Maximal sub-interval of `range` on which a pair is connected and its
/// covariates are constant.
struct OnSegment {
  double start = 0.0;
  double end = 0.0;
  Index pair = 0;
  Index covariate_segment = 0;
};

/// On-segments of all pairs within `range`, sorted by (start, end,
/// covariate values) so downstream sums do not depend on vertex labels.
std::vector<OnSegment> on_segments(const PairPanel& panel, const Interval& range);

/// t -> number of connected pairs on `range`.
StepFunction edge_count_function(const PairPanel& panel, const Interval& range);

/// t -> X_n(t; beta) on `range`.
StepFunction risk_function(const PairPanel& panel, const Vector& beta, const LinkSpec& link,
                           const Interval& range);

// ---------------------------------------------------------------------------

template <typename DerivedX, typename DerivedB>
double evaluate_link(const Eigen::MatrixBase<DerivedX>& x, const Eigen::MatrixBase<DerivedB>& beta,
                     const LinkSpec& link) {
  if (x.size() != beta.size() || x.size() != link.dimension) {
    throw std::invalid_argument("evaluate_link: dimension mismatch");
  }
  switch (link.kind) {
    case LinkKind::exp_linear:
      return std::exp(x.dot(beta));
  }
  return 0.0;
}

}  // namespace nethaz
