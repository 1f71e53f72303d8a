#pragma once

// Log-likelihoods of the proportional-hazards counting-process model.
//
// Both classes precompute everything that does not depend on the
// parameters (segment decomposition of the risk set, event covariates at
// their left limits, feature values on a quadrature mesh) so repeated
// evaluation inside an optimizer is cheap.

#include <vector>

#include "nethaz/core_model.hpp"

namespace nethaz {

struct LikelihoodValue {
  double value = 0.0;
  Vector gradient;
  bool degenerate = false;  // an event fell outside its pair's risk set
};

/// Risk-set bookkeeping for the events of one window. Events see the risk
/// set at their left limit: a segment [start, end) is at risk at event time
/// s when start < s <= end.
class RiskSetIndex {
 public:
  RiskSetIndex(const PairPanel& panel, const LinkSpec& link, const Interval& window);

  Index event_count() const { return static_cast<Index>(event_times_.size()); }
  const std::vector<double>& event_times() const { return event_times_; }
  const Matrix& event_covariates() const { return event_covariates_; }
  /// True when every event occurred while its own edge was on.
  bool events_at_risk() const { return events_at_risk_; }
  const Interval& window() const { return window_; }

  /// X_n(s-; beta) at each event.
  Vector risk_at_events(const Vector& beta) const;

  /// Partial log-likelihood and its gradient. Throws NumericalError when an
  /// event has an empty risk set.
  LikelihoodValue partial(const Vector& beta) const;

  /// Observed information of the partial likelihood (negated Hessian).
  Matrix partial_information(const Vector& beta) const;

  /// Whether the risk-set covariates ever differ from the event covariate.
  bool covariates_vary() const { return covariates_vary_; }

 private:
  struct Op {
    double time;
    int kind;  // 0 event, 1 segment end, 2 segment start
    Index index;
  };

  template <typename Visit>
  void sweep(const Vector& beta, bool with_second_moment, Visit&& visit) const;

  LinkSpec link_;
  Interval window_;
  std::vector<double> event_times_;
  Matrix event_covariates_;    // p x events
  Matrix segment_covariates_;  // p x segments
  std::vector<Op> ops_;
  bool events_at_risk_ = true;
  bool covariates_vary_ = false;
};

/// Joint log-likelihood in (theta, beta) with baseline exp(theta' phi(t)):
///   sum_events [theta' phi(s) + log Psi(x(s-); beta)] - int alpha(theta, t) X_n(t; beta) dt.
/// The time integral splits exactly over on-segments; within each segment
/// the baseline is integrated by Gauss-Legendre on a mesh aligned with every
/// discontinuity of phi.
class FullLikelihood {
 public:
  FullLikelihood(const PairPanel& panel, const BaselineSpec& baseline, const LinkSpec& link,
                 const Interval& window, double max_cell = 0.5);

  Index event_count() const { return event_count_; }
  Index theta_dimension() const { return d_; }
  Index beta_dimension() const { return p_; }

  /// Gradient is ordered (theta, beta).
  LikelihoodValue evaluate(const Vector& theta, const Vector& beta) const;

 private:
  Index d_ = 0;
  Index p_ = 0;
  Index event_count_ = 0;
  bool events_at_risk_ = true;
  Index mesh_nodes_ = 0;
  Matrix node_features_;  // d x (cells * nodes per cell)
  Vector node_weights_;
  Index nodes_per_cell_ = 0;
  std::vector<Index> segment_start_;
  std::vector<Index> segment_end_;
  Matrix segment_covariates_;  // p x segments
  Vector event_feature_sum_;
  Vector event_covariate_sum_;
};

LikelihoodValue log_likelihood(const PairPanel& panel, const Vector& theta, const Vector& beta,
                               const BaselineSpec& baseline, const LinkSpec& link, const Interval& window);

LikelihoodValue partial_log_likelihood(const PairPanel& panel, const Vector& beta, const LinkSpec& link,
                                       const Interval& window);

}  // namespace nethaz
