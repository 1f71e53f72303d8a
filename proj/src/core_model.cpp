#include "nethaz/core_model.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <numbers>
#include <set>
#include <sstream>

#include "nethaz/errors.hpp"

namespace nethaz {

namespace {
bool g_warnings_enabled = true;
}

void warn(const std::string& message) {
  if (g_warnings_enabled) std::cerr << "warning: " << message << '\n';
}

void set_warnings_enabled(bool enabled) { g_warnings_enabled = enabled; }

// ---------------------------------------------------------------------------
// PiecewisePath

PiecewisePath::PiecewisePath(std::vector<double> breakpoints, Matrix values)
    : breakpoints_(std::move(breakpoints)), values_(std::move(values)) {
  if (static_cast<Index>(breakpoints_.size()) != values_.cols()) {
    throw std::invalid_argument("PiecewisePath: one value column per breakpoint required");
  }
}

PiecewisePath PiecewisePath::constant(const Vector& value) { return PiecewisePath({0.0}, Matrix(value)); }

PiecewisePath PiecewisePath::constant(double value) {
  return PiecewisePath({0.0}, Matrix::Constant(1, 1, value));
}

PiecewisePath PiecewisePath::indicator(std::span<const Interval> on_intervals) {
  std::vector<double> knots{0.0};
  std::vector<double> vals{0.0};
  for (const auto& iv : on_intervals) {
    if (!(iv.hi > iv.lo)) continue;
    if (iv.lo <= knots.back()) {
      // Starts at (or before) the current knot: switch the current segment on.
      if (vals.back() == 0.0 && iv.lo == knots.back()) vals.back() = 1.0;
      else if (vals.back() == 0.0) throw std::invalid_argument("PiecewisePath::indicator: intervals must be sorted");
    } else {
      knots.push_back(iv.lo);
      vals.push_back(1.0);
    }
    knots.push_back(iv.hi);
    vals.push_back(0.0);
  }
  Matrix values(1, static_cast<Index>(vals.size()));
  for (std::size_t k = 0; k < vals.size(); ++k) values(0, static_cast<Index>(k)) = vals[k];
  return PiecewisePath(std::move(knots), std::move(values)).canonical();
}

PiecewisePath PiecewisePath::edge_indicator(std::span<const Interval> on_intervals, double horizon) {
  auto path = indicator(on_intervals);
  auto knots = path.breakpoints();
  if (knots.size() > 1 && knots.back() >= horizon) {
    knots.pop_back();
    Matrix values = path.values().leftCols(static_cast<Index>(knots.size()));
    return PiecewisePath(std::move(knots), std::move(values));
  }
  return path;
}

Index PiecewisePath::segment_at(double t) const {
  const auto it = std::upper_bound(breakpoints_.begin(), breakpoints_.end(), t);
  return std::max<Index>(0, static_cast<Index>(it - breakpoints_.begin()) - 1);
}

Index PiecewisePath::segment_left_of(double t) const {
  const auto it = std::lower_bound(breakpoints_.begin(), breakpoints_.end(), t);
  return std::max<Index>(0, static_cast<Index>(it - breakpoints_.begin()) - 1);
}

PiecewisePath PiecewisePath::canonical() const {
  if (segment_count() == 0) return *this;
  std::vector<double> knots{breakpoints_.front()};
  std::vector<Index> keep{0};
  for (Index k = 1; k < segment_count(); ++k) {
    if (values_.col(k) != values_.col(keep.back())) {
      knots.push_back(breakpoints_[static_cast<std::size_t>(k)]);
      keep.push_back(k);
    }
  }
  Matrix vals(dimension(), static_cast<Index>(keep.size()));
  for (std::size_t k = 0; k < keep.size(); ++k) vals.col(static_cast<Index>(k)) = values_.col(keep[k]);
  return PiecewisePath(std::move(knots), std::move(vals));
}

bool PiecewisePath::operator==(const PiecewisePath& other) const {
  return breakpoints_ == other.breakpoints_ && values_.rows() == other.values_.rows() &&
         values_.cols() == other.values_.cols() && values_ == other.values_;
}

Index PairPanel::event_count() const {
  Index total = 0;
  for (const auto& p : pairs) total += static_cast<Index>(p.events.size());
  return total;
}

Index PairPanel::event_count(const Interval& window) const {
  Index total = 0;
  for (const auto& p : pairs) {
    total += std::count_if(p.events.begin(), p.events.end(),
                           [&](double t) { return in_event_window(t, window); });
  }
  return total;
}

// ---------------------------------------------------------------------------
// Baseline specification

bool WeekendCalendar::is_weekend(double t) const {
  const auto day = static_cast<long long>(std::floor((origin_hour + t) / 24.0));
  const long long weekday = ((origin_weekday + day) % 7 + 7) % 7;
  return weekday >= 5;
}

std::vector<double> WeekendCalendar::day_boundaries(double lo, double hi) const {
  std::vector<double> out;
  const double first = std::floor((origin_hour + lo) / 24.0) + 1.0;
  for (double k = first;; k += 1.0) {
    const double t = 24.0 * k - origin_hour;
    if (t >= hi) break;
    if (t > lo) out.push_back(t);
  }
  return out;
}

BaselineFeature BaselineFeature::system_column(int column, int power) {
  BaselineFeature f;
  f.kind = Kind::system;
  f.column = column;
  f.power = power;
  return f;
}

BaselineFeature BaselineFeature::harmonic(Kind kind, int multiple, double period, bool weekend_only) {
  BaselineFeature f;
  f.kind = kind;
  f.multiple = multiple;
  f.period = period;
  f.weekend_only = weekend_only;
  return f;
}

void BaselineSpec::features_at(double t, Eigen::Ref<Vector> out) const {
  const bool weekend = calendar.is_weekend(t);
  Index system_segment = -1;
  for (std::size_t k = 0; k < features.size(); ++k) {
    const auto& f = features[k];
    double v = 1.0;
    switch (f.kind) {
      case BaselineFeature::Kind::constant:
        v = 1.0;
        break;
      case BaselineFeature::Kind::system: {
        if (f.column < 0 || f.column >= system.dimension()) {
          throw std::out_of_range("baseline feature refers to a missing system covariate column");
        }
        if (system_segment < 0) system_segment = system.path.segment_at(t);
        v = std::pow(system.path.values()(f.column, system_segment), f.power);
        break;
      }
      case BaselineFeature::Kind::sine:
        v = std::sin(f.multiple * 2.0 * std::numbers::pi * t / f.period);
        break;
      case BaselineFeature::Kind::cosine:
        v = std::cos(f.multiple * 2.0 * std::numbers::pi * t / f.period);
        break;
    }
    if (f.weekend_only && !weekend) v = 0.0;
    out[static_cast<Index>(k)] = v;
  }
}

Vector BaselineSpec::features_at(double t) const {
  Vector out(dimension());
  features_at(t, out);
  return out;
}

double BaselineSpec::value(const Vector& theta, double t) const { return std::exp(theta.dot(features_at(t))); }

std::vector<double> BaselineSpec::breakpoints(const Interval& range) const {
  bool uses_system = false;
  bool uses_weekend = false;
  for (const auto& f : features) {
    uses_system = uses_system || f.kind == BaselineFeature::Kind::system;
    uses_weekend = uses_weekend || f.weekend_only;
  }
  std::vector<double> out;
  if (uses_system) {
    for (double b : system.path.breakpoints()) {
      if (b > range.lo && b < range.hi) out.push_back(b);
    }
  }
  if (uses_weekend) {
    const auto days = calendar.day_boundaries(range.lo, range.hi);
    out.insert(out.end(), days.begin(), days.end());
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

BaselineSpec BaselineSpec::constant() {
  BaselineSpec spec;
  spec.features.push_back(BaselineFeature::intercept());
  return spec;
}

BaselineSpec BaselineSpec::diurnal(int harmonics, double period) {
  BaselineSpec spec = constant();
  for (int k = 1; k <= harmonics; ++k) {
    spec.features.push_back(BaselineFeature::harmonic(BaselineFeature::Kind::sine, k, period));
    spec.features.push_back(BaselineFeature::harmonic(BaselineFeature::Kind::cosine, k, period));
  }
  return spec;
}

double evaluate_baseline(const Vector& theta, double t, const BaselineSpec& spec) {
  if (theta.size() != spec.dimension()) throw std::invalid_argument("evaluate_baseline: dimension mismatch");
  if (!(t >= 0.0 && t <= spec.horizon)) {
    throw std::out_of_range("evaluate_baseline: time outside the study horizon");
  }
  return spec.value(theta, t);
}

void StudyDesign::validate(double horizon) const {
  auto check = [&](const Interval& iv, const char* name) {
    if (!(iv.lo < iv.hi) || iv.lo < 0.0 || iv.hi > horizon) {
      std::ostringstream msg;
      msg << name << " interval [" << iv.lo << ", " << iv.hi << "] must be a nonempty subset of [0, " << horizon
          << "]";
      throw ConfigError(msg.str());
    }
  };
  check(fit, "fit");
  check(test, "test");
  if (split && fit.hi > test.lo && test.hi > fit.lo) {
    throw ConfigError("fit and test intervals overlap while data splitting is enabled");
  }
}

// ---------------------------------------------------------------------------
// Aggregates

double aggregate_risk(const PairPanel& panel, double t, const Vector& beta, const LinkSpec& link,
                      bool left_limit) {
  double total = 0.0;
  for (const auto& p : panel.pairs) {
    const double on = left_limit ? p.edge.scalar_left_limit(t) : p.edge.scalar(t);
    if (on == 0.0) continue;
    total += left_limit ? evaluate_link(p.covariates.left_limit(t), beta, link)
                        : evaluate_link(p.covariates.value(t), beta, link);
  }
  return total;
}

double edge_fraction_floor(const PairPanel& panel) {
  return 1.0 / (2.0 * static_cast<double>(panel.pair_count()));
}

double empirical_edge_fraction(const PairPanel& panel, double t, bool clamp) {
  const Index r = panel.pair_count();
  if (r <= 0) throw std::invalid_argument("empirical_edge_fraction: panel has no possible pairs");
  Index on = 0;
  for (const auto& p : panel.pairs) on += p.edge.scalar(t) != 0.0 ? 1 : 0;
  const double fraction = static_cast<double>(on) / static_cast<double>(r);
  return clamp ? std::max(fraction, edge_fraction_floor(panel)) : fraction;
}

PooledEvents pooled_event_times(const PairPanel& panel) {
  PooledEvents out;
  for (std::size_t k = 0; k < panel.pairs.size(); ++k) {
    for (double t : panel.pairs[k].events) {
      out.events.push_back({t, panel.pairs[k].key, static_cast<Index>(k)});
    }
  }
  std::stable_sort(out.events.begin(), out.events.end(),
                   [](const PooledEvent& a, const PooledEvent& b) { return a.time < b.time; });
  double previous = -kInfinity;
  for (auto& e : out.events) {
    if (e.time <= previous) {
      e.time = previous + kTieJitter;
      ++out.tie_adjustments;
    }
    previous = e.time;
  }
  if (out.tie_adjustments > 0) {
    warn(std::to_string(out.tie_adjustments) + " tied event timestamp(s) shifted by multiples of 1e-9 h");
  }
  return out;
}

Index resolve_ties(PairPanel& panel) {
  const auto pooled = pooled_event_times(panel);
  if (pooled.tie_adjustments == 0) return 0;
  for (auto& p : panel.pairs) p.events.clear();
  for (const auto& e : pooled.events) panel.pairs[static_cast<std::size_t>(e.pair)].events.push_back(e.time);
  return pooled.tie_adjustments;
}

// ---------------------------------------------------------------------------
// Validation

std::string ValidationReport::summary(std::size_t max_lines) const {
  std::ostringstream out;
  out << violations.size() << " violation(s)";
  for (std::size_t k = 0; k < violations.size() && k < max_lines; ++k) {
    const auto& v = violations[k];
    out << "\n  " << v.kind << " (" << v.key.i << "," << v.key.j << ") t=" << v.time << ": " << v.message;
  }
  if (violations.size() > max_lines) out << "\n  ...";
  return out.str();
}

namespace {

void check_path(const PiecewisePath& path, const PairKey& key, const char* what, ValidationReport& report) {
  const auto& knots = path.breakpoints();
  if (knots.empty()) {
    report.violations.push_back({"malformed path", key, 0.0, std::string(what) + " path has no segments"});
    return;
  }
  if (knots.front() != 0.0) {
    report.violations.push_back(
        {"malformed path", key, knots.front(), std::string(what) + " path must start at t = 0"});
  }
  for (std::size_t k = 1; k < knots.size(); ++k) {
    if (!(knots[k] > knots[k - 1])) {
      report.violations.push_back(
          {"malformed path", key, knots[k], std::string(what) + " breakpoints not strictly increasing"});
    }
  }
  if (!path.values().allFinite()) {
    report.violations.push_back({"malformed path", key, 0.0, std::string(what) + " path has non-finite values"});
  }
}

}  // namespace

ValidationReport validate_panel(const PairPanel& panel) {
  ValidationReport report;
  if (panel.n_vertices < 2) {
    report.violations.push_back({"panel", {}, 0.0, "at least two vertices required"});
  }
  if (!(panel.horizon > 0.0) || !std::isfinite(panel.horizon)) {
    report.violations.push_back({"panel", {}, panel.horizon, "horizon must be positive and finite"});
  }
  const Index p = panel.covariate_dimension();
  std::set<PairKey> seen;
  std::vector<std::pair<double, PairKey>> all_events;

  for (const auto& pair : panel.pairs) {
    const auto& key = pair.key;
    if (key.i == key.j) report.violations.push_back({"self-pair", key, 0.0, "self-interactions are excluded"});
    if (key.i < 0 || key.j < 0 || key.i >= panel.n_vertices || key.j >= panel.n_vertices) {
      report.violations.push_back({"vertex out of range", key, 0.0, "vertex id outside [0, n_vertices)"});
    }
    if (!panel.directed && key.i > key.j) {
      report.violations.push_back({"non-canonical key", key, 0.0, "undirected keys must satisfy i < j"});
    }
    if (!seen.insert(canonical_key(key, panel.directed)).second) {
      report.violations.push_back({"duplicate pair", key, 0.0, "pair listed more than once"});
    }

    check_path(pair.edge, key, "edge", report);
    check_path(pair.covariates, key, "covariate", report);
    if (pair.edge.dimension() != 1) {
      report.violations.push_back({"malformed path", key, 0.0, "edge path must be scalar"});
    } else if (((pair.edge.values().array() != 0.0) && (pair.edge.values().array() != 1.0)).any()) {
      report.violations.push_back({"malformed path", key, 0.0, "edge values must be 0 or 1"});
    }
    if (pair.covariates.dimension() != p) {
      report.violations.push_back({"malformed path", key, 0.0, "covariate dimension differs across pairs"});
    }

    for (std::size_t k = 0; k < pair.events.size(); ++k) {
      const double t = pair.events[k];
      if (!(t >= 0.0 && t <= panel.horizon)) {
        report.violations.push_back({"event outside horizon", key, t, "event time outside [0, T]"});
      }
      if (k > 0 && !(t > pair.events[k - 1])) {
        report.violations.push_back({"unsorted events", key, t, "event times must be strictly increasing"});
      }
      if (pair.edge.segment_count() > 0 && pair.edge.dimension() == 1 && pair.edge.scalar_left_limit(t) != 1.0) {
        report.violations.push_back({"event outside risk set", key, t, "event while the edge is off"});
      }
      all_events.emplace_back(t, key);
    }
  }

  std::sort(all_events.begin(), all_events.end());
  for (std::size_t k = 1; k < all_events.size(); ++k) {
    if (all_events[k].first == all_events[k - 1].first) {
      report.violations.push_back(
          {"duplicate timestamp", all_events[k].second, all_events[k].first, "two events share a timestamp"});
    }
  }
  return report;
}

// ---------------------------------------------------------------------------
// Step functions and risk-set sweeps

StepFunction::StepFunction(std::vector<double> knots, std::vector<double> values)
    : knots_(std::move(knots)), values_(std::move(values)) {
  if (knots_.empty() || knots_.size() != values_.size()) {
    throw std::invalid_argument("StepFunction: knots and values must be nonempty and of equal length");
  }
}

double StepFunction::operator()(double t) const {
  const auto it = std::upper_bound(knots_.begin(), knots_.end(), t);
  const auto k = std::max<std::ptrdiff_t>(0, (it - knots_.begin()) - 1);
  return values_[static_cast<std::size_t>(k)];
}

double StepFunction::left_limit(double t) const {
  const auto it = std::lower_bound(knots_.begin(), knots_.end(), t);
  const auto k = std::max<std::ptrdiff_t>(0, (it - knots_.begin()) - 1);
  return values_[static_cast<std::size_t>(k)];
}

std::vector<double> StepFunction::breakpoints() const { return {knots_.begin() + 1, knots_.end()}; }

double StepFunction::integral(double a, double b) const {
  if (b <= a) return 0.0;
  double total = 0.0;
  for (std::size_t k = 0; k < knots_.size(); ++k) {
    const double lo = k == 0 ? -kInfinity : knots_[k];
    const double hi = k + 1 < knots_.size() ? knots_[k + 1] : kInfinity;
    const double l = std::max(lo, a);
    const double h = std::min(hi, b);
    if (h > l) total += values_[k] * (h - l);
  }
  return total;
}

StepFunction StepFunction::transformed(double (*op)(double)) const {
  std::vector<double> vals(values_.size());
  std::transform(values_.begin(), values_.end(), vals.begin(), op);
  return {knots_, std::move(vals)};
}

std::vector<OnSegment> on_segments(const PairPanel& panel, const Interval& range) {
  std::vector<OnSegment> out;
  for (std::size_t pi = 0; pi < panel.pairs.size(); ++pi) {
    const auto& pair = panel.pairs[pi];
    std::vector<double> cuts{range.lo, range.hi};
    for (double b : pair.edge.breakpoints()) {
      if (b > range.lo && b < range.hi) cuts.push_back(b);
    }
    for (double b : pair.covariates.breakpoints()) {
      if (b > range.lo && b < range.hi) cuts.push_back(b);
    }
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
    for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
      const double a = cuts[k];
      const double b = cuts[k + 1];
      if (pair.edge.scalar(a) == 0.0) continue;
      const Index cov = pair.covariates.segment_at(a);
      if (!out.empty() && out.back().pair == static_cast<Index>(pi) && out.back().end == a &&
          out.back().covariate_segment == cov) {
        out.back().end = b;
      } else {
        out.push_back({a, b, static_cast<Index>(pi), cov});
      }
    }
  }
  auto covariate = [&](const OnSegment& s) {
    return panel.pairs[static_cast<std::size_t>(s.pair)].covariates.values().col(s.covariate_segment);
  };
  std::stable_sort(out.begin(), out.end(), [&](const OnSegment& a, const OnSegment& b) {
    if (a.start != b.start) return a.start < b.start;
    if (a.end != b.end) return a.end < b.end;
    const auto xa = covariate(a);
    const auto xb = covariate(b);
    return std::lexicographical_compare(xa.data(), xa.data() + xa.size(), xb.data(), xb.data() + xb.size());
  });
  return out;
}

namespace {

// Sweeps segment start/end changes in time order, recording the running sum
// after all changes at each distinct time. The sum is reset to exactly zero
// whenever no segment is active.
StepFunction sweep_segments(const std::vector<OnSegment>& segments, const std::vector<double>& weights,
                            const Interval& range) {
  struct Change {
    double time;
    int sign;
    std::size_t segment;
  };
  std::vector<Change> changes;
  changes.reserve(2 * segments.size());
  for (std::size_t s = 0; s < segments.size(); ++s) {
    changes.push_back({segments[s].start, +1, s});
    if (segments[s].end < range.hi) changes.push_back({segments[s].end, -1, s});
  }
  std::stable_sort(changes.begin(), changes.end(), [](const Change& a, const Change& b) {
    if (a.time != b.time) return a.time < b.time;
    return a.sign < b.sign;
  });
  std::vector<double> knots{range.lo};
  std::vector<double> values{0.0};
  double sum = 0.0;
  long active = 0;
  std::size_t k = 0;
  while (k < changes.size()) {
    const double t = changes[k].time;
    for (; k < changes.size() && changes[k].time == t; ++k) {
      sum += changes[k].sign * weights[changes[k].segment];
      active += changes[k].sign;
    }
    if (active == 0) sum = 0.0;
    if (t == knots.back()) {
      values.back() = sum;
    } else {
      knots.push_back(t);
      values.push_back(sum);
    }
  }
  return {std::move(knots), std::move(values)};
}

}  // namespace

StepFunction edge_count_function(const PairPanel& panel, const Interval& range) {
  // Covariate changes split on-segments; merge them per pair first so counts
  // only move when an edge switches.
  auto segments = on_segments(panel, range);
  std::vector<double> weights(segments.size(), 1.0);
  auto raw = sweep_segments(segments, weights, range);
  std::vector<double> knots{raw.knots().front()};
  std::vector<double> values{raw.values().front()};
  for (std::size_t k = 1; k < raw.knots().size(); ++k) {
    if (raw.values()[k] != values.back()) {
      knots.push_back(raw.knots()[k]);
      values.push_back(raw.values()[k]);
    }
  }
  return {std::move(knots), std::move(values)};
}

StepFunction risk_function(const PairPanel& panel, const Vector& beta, const LinkSpec& link,
                           const Interval& range) {
  auto segments = on_segments(panel, range);
  std::vector<double> weights(segments.size());
  for (std::size_t s = 0; s < segments.size(); ++s) {
    const auto& pair = panel.pairs[static_cast<std::size_t>(segments[s].pair)];
    weights[s] = evaluate_link(pair.covariates.values().col(segments[s].covariate_segment), beta, link);
  }
  return sweep_segments(segments, weights, range);
}

}  // namespace nethaz
