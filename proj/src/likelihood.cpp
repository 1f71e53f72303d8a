#include "nethaz/likelihood.hpp"

#include <algorithm>
#include <cmath>

#include "nethaz/errors.hpp"
#include "nethaz/quadrature.hpp"

namespace nethaz {

namespace {

constexpr int kMeshNodes = 5;

void require_exp_linear(const LinkSpec& link, Index p) {
  if (link.kind != LinkKind::exp_linear) throw std::invalid_argument("unsupported link function");
  if (link.dimension != p) throw std::invalid_argument("link dimension differs from the panel covariates");
}

}  // namespace

// ---------------------------------------------------------------------------
// RiskSetIndex

RiskSetIndex::RiskSetIndex(const PairPanel& panel, const LinkSpec& link, const Interval& window)
    : link_(link), window_(window) {
  const Index p = panel.covariate_dimension();
  require_exp_linear(link, p);

  const auto segments = on_segments(panel, window);
  segment_covariates_.resize(p, static_cast<Index>(segments.size()));
  for (std::size_t s = 0; s < segments.size(); ++s) {
    const auto& seg = segments[s];
    const auto& pair = panel.pairs[static_cast<std::size_t>(seg.pair)];
    segment_covariates_.col(static_cast<Index>(s)) = pair.covariates.values().col(seg.covariate_segment);
    // Paths start at t = 0, where the left limit is the initial value.
    const double start = seg.start == 0.0 ? -1.0 : seg.start;
    ops_.push_back({start, 2, static_cast<Index>(s)});
    if (seg.end < window.hi) ops_.push_back({seg.end, 1, static_cast<Index>(s)});
  }

  struct PendingEvent {
    double time;
    std::size_t pair;
  };
  std::vector<PendingEvent> pending;
  for (std::size_t k = 0; k < panel.pairs.size(); ++k) {
    for (double t : panel.pairs[k].events) {
      if (in_event_window(t, window)) pending.push_back({t, k});
    }
  }
  std::stable_sort(pending.begin(), pending.end(),
                   [](const PendingEvent& a, const PendingEvent& b) { return a.time < b.time; });
  event_covariates_.resize(p, static_cast<Index>(pending.size()));
  for (std::size_t e = 0; e < pending.size(); ++e) {
    const auto& pair = panel.pairs[pending[e].pair];
    const double t = pending[e].time;
    event_times_.push_back(t);
    event_covariates_.col(static_cast<Index>(e)) = pair.covariates.left_limit(t);
    if (pair.edge.scalar_left_limit(t) != 1.0) events_at_risk_ = false;
    ops_.push_back({t, 0, static_cast<Index>(e)});
  }
  std::stable_sort(ops_.begin(), ops_.end(), [](const Op& a, const Op& b) {
    if (a.time != b.time) return a.time < b.time;
    return a.kind < b.kind;
  });

  if (p > 0) {
    Vector reference = segment_covariates_.cols() > 0 ? Vector(segment_covariates_.col(0))
                       : event_covariates_.cols() > 0 ? Vector(event_covariates_.col(0))
                                                      : Vector::Zero(p);
    covariates_vary_ = !(segment_covariates_.colwise() - reference).isZero(0.0) ||
                       !(event_covariates_.colwise() - reference).isZero(0.0);
  }
}

template <typename Visit>
void RiskSetIndex::sweep(const Vector& beta, bool with_second_moment, Visit&& visit) const {
  const Index p = segment_covariates_.rows();
  if (beta.size() != p) throw std::invalid_argument("beta dimension differs from the covariates");
  const Vector psi = (segment_covariates_.transpose() * beta).array().exp().matrix();
  double s0 = 0.0;
  Vector s1 = Vector::Zero(p);
  Matrix s2 = Matrix::Zero(with_second_moment ? p : 0, with_second_moment ? p : 0);
  long active = 0;
  for (const auto& op : ops_) {
    if (op.kind == 0) {
      visit(op.index, s0, s1, s2);
      continue;
    }
    const double sign = op.kind == 2 ? 1.0 : -1.0;
    const double w = sign * psi[op.index];
    const auto x = segment_covariates_.col(op.index);
    s0 += w;
    s1 += w * x;
    if (with_second_moment) s2 += w * x * x.transpose();
    active += op.kind == 2 ? 1 : -1;
    if (active == 0) {
      s0 = 0.0;
      s1.setZero();
      s2.setZero();
    }
  }
}

Vector RiskSetIndex::risk_at_events(const Vector& beta) const {
  Vector out(event_count());
  sweep(beta, false, [&](Index e, double s0, const Vector&, const Matrix&) { out[e] = s0; });
  return out;
}

LikelihoodValue RiskSetIndex::partial(const Vector& beta) const {
  LikelihoodValue out;
  out.gradient = Vector::Zero(beta.size());
  double value = 0.0;
  sweep(beta, false, [&](Index e, double s0, const Vector& s1, const Matrix&) {
    if (!(s0 > 0.0)) throw NumericalError("partial likelihood: event with an empty risk set");
    const auto x = event_covariates_.col(e);
    value += x.dot(beta) - std::log(s0);
    out.gradient += x - s1 / s0;
  });
  out.value = value;
  out.degenerate = !events_at_risk_;
  return out;
}

Matrix RiskSetIndex::partial_information(const Vector& beta) const {
  const Index p = beta.size();
  Matrix info = Matrix::Zero(p, p);
  sweep(beta, true, [&](Index, double s0, const Vector& s1, const Matrix& s2) {
    if (!(s0 > 0.0)) throw NumericalError("partial likelihood: event with an empty risk set");
    const Vector mean = s1 / s0;
    info += s2 / s0 - mean * mean.transpose();
  });
  return info;
}

// ---------------------------------------------------------------------------
// FullLikelihood

FullLikelihood::FullLikelihood(const PairPanel& panel, const BaselineSpec& baseline, const LinkSpec& link,
                               const Interval& window, double max_cell)
    : d_(baseline.dimension()), p_(panel.covariate_dimension()) {
  require_exp_linear(link, p_);

  const auto segments = on_segments(panel, window);
  std::vector<double> cuts = baseline.breakpoints(window);
  for (const auto& seg : segments) {
    cuts.push_back(seg.start);
    cuts.push_back(seg.end);
  }
  const auto mesh = piece_edges(window, max_cell, cuts);
  mesh_nodes_ = static_cast<Index>(mesh.size());
  const Index cells = mesh_nodes_ - 1;

  const auto& rule = gauss_legendre(kMeshNodes);
  nodes_per_cell_ = kMeshNodes;
  node_features_.resize(d_, cells * kMeshNodes);
  node_weights_.resize(cells * kMeshNodes);
  for (Index c = 0; c < cells; ++c) {
    const double a = mesh[static_cast<std::size_t>(c)];
    const double b = mesh[static_cast<std::size_t>(c + 1)];
    const double half = 0.5 * (b - a);
    const double mid = 0.5 * (b + a);
    for (Index q = 0; q < kMeshNodes; ++q) {
      const Index k = c * kMeshNodes + q;
      baseline.features_at(mid + half * rule.nodes[q], node_features_.col(k));
      node_weights_[k] = half * rule.weights[q];
    }
  }

  auto node_of = [&](double t) {
    return static_cast<Index>(std::lower_bound(mesh.begin(), mesh.end(), t) - mesh.begin());
  };
  segment_covariates_.resize(p_, static_cast<Index>(segments.size()));
  for (std::size_t s = 0; s < segments.size(); ++s) {
    const auto& seg = segments[s];
    segment_start_.push_back(node_of(seg.start));
    segment_end_.push_back(node_of(seg.end));
    segment_covariates_.col(static_cast<Index>(s)) =
        panel.pairs[static_cast<std::size_t>(seg.pair)].covariates.values().col(seg.covariate_segment);
  }

  event_feature_sum_ = Vector::Zero(d_);
  event_covariate_sum_ = Vector::Zero(p_);
  std::vector<std::pair<double, std::size_t>> events;
  for (std::size_t k = 0; k < panel.pairs.size(); ++k) {
    for (double t : panel.pairs[k].events) {
      if (in_event_window(t, window)) events.emplace_back(t, k);
    }
  }
  std::stable_sort(events.begin(), events.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });
  Vector phi(d_);
  for (const auto& [t, k] : events) {
    const auto& pair = panel.pairs[k];
    baseline.features_at(t, phi);
    event_feature_sum_ += phi;
    event_covariate_sum_ += pair.covariates.left_limit(t);
    if (pair.edge.scalar_left_limit(t) != 1.0) events_at_risk_ = false;
  }
  event_count_ = static_cast<Index>(events.size());
}

LikelihoodValue FullLikelihood::evaluate(const Vector& theta, const Vector& beta) const {
  if (theta.size() != d_ || beta.size() != p_) throw std::invalid_argument("FullLikelihood: dimension mismatch");
  const Index cells = mesh_nodes_ - 1;

  // Cumulative integrals of alpha and phi * alpha at mesh nodes.
  const Vector weighted = ((node_features_.transpose() * theta).array().exp() * node_weights_.array()).matrix();
  Vector cum0(mesh_nodes_);
  Matrix cum1(d_, mesh_nodes_);
  cum0[0] = 0.0;
  cum1.col(0).setZero();
  for (Index c = 0; c < cells; ++c) {
    const auto block = weighted.segment(c * nodes_per_cell_, nodes_per_cell_);
    cum0[c + 1] = cum0[c] + block.sum();
    cum1.col(c + 1) = cum1.col(c) + node_features_.middleCols(c * nodes_per_cell_, nodes_per_cell_) * block;
  }

  const Index segments = segment_covariates_.cols();
  const Vector psi = (segment_covariates_.transpose() * beta).array().exp().matrix();
  Vector node_mass = Vector::Zero(mesh_nodes_);
  Vector exposure(segments);
  for (Index s = 0; s < segments; ++s) {
    const auto a = segment_start_[static_cast<std::size_t>(s)];
    const auto b = segment_end_[static_cast<std::size_t>(s)];
    exposure[s] = psi[s] * (cum0[b] - cum0[a]);
    node_mass[b] += psi[s];
    node_mass[a] -= psi[s];
  }

  LikelihoodValue out;
  out.value = theta.dot(event_feature_sum_) + beta.dot(event_covariate_sum_) - exposure.sum();
  out.gradient.resize(d_ + p_);
  out.gradient.head(d_) = event_feature_sum_ - cum1 * node_mass;
  out.gradient.tail(p_) = event_covariate_sum_ - segment_covariates_ * exposure;
  if (!events_at_risk_) {
    out.value = -kInfinity;
    out.degenerate = true;
  }
  return out;
}

LikelihoodValue log_likelihood(const PairPanel& panel, const Vector& theta, const Vector& beta,
                               const BaselineSpec& baseline, const LinkSpec& link, const Interval& window) {
  return FullLikelihood(panel, baseline, link, window).evaluate(theta, beta);
}

LikelihoodValue partial_log_likelihood(const PairPanel& panel, const Vector& beta, const LinkSpec& link,
                                       const Interval& window) {
  return RiskSetIndex(panel, link, window).partial(beta);
}

}  // namespace nethaz
