#pragma once

#include <random>
#include <vector>

#include "nethaz/core_model.hpp"

namespace nethaz::testing {

inline PairRecord make_pair_record(int i, int j, std::vector<Interval> on, const Vector& x,
                                   std::vector<double> events, double horizon) {
  PairRecord r;
  r.key = {i, j};
  r.edge = PiecewisePath::edge_indicator(on, horizon);
  r.covariates = PiecewisePath::constant(x);
  r.events = std::move(events);
  return r;
}

inline Vector vec(std::initializer_list<double> values) {
  Vector v(static_cast<Index>(values.size()));
  Index k = 0;
  for (double x : values) v[k++] = x;
  return v;
}

/// Small random panel with time-varying edges and covariates; events are
/// placed only while edges are on.
inline PairPanel random_panel(std::uint64_t seed, int n = 5, Index p = 2, double horizon = 10.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  PairPanel panel;
  panel.n_vertices = n;
  panel.horizon = horizon;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      PairRecord r;
      r.key = {i, j};
      const double a = horizon * unit(rng) * 0.3;
      const double b = horizon * (0.6 + 0.4 * unit(rng));
      r.edge = PiecewisePath::edge_indicator(std::vector<Interval>{{a, b}}, horizon);
      const double cut = horizon * unit(rng);
      Matrix values(p, 2);
      for (Index k = 0; k < p; ++k) {
        values(k, 0) = 2.0 * unit(rng) - 1.0;
        values(k, 1) = 2.0 * unit(rng) - 1.0;
      }
      r.covariates = PiecewisePath({0.0, cut}, values);
      const int count = static_cast<int>(unit(rng) * 4.0);
      for (int e = 0; e < count; ++e) r.events.push_back(a + (b - a) * unit(rng));
      std::sort(r.events.begin(), r.events.end());
      r.events.erase(std::remove(r.events.begin(), r.events.end(), a), r.events.end());
      panel.pairs.push_back(std::move(r));
    }
  }
  resolve_ties(panel);
  return panel;
}

}  // namespace nethaz::testing
