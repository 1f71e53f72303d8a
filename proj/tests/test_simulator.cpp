#include <doctest.h>

#include <cmath>
#include <numeric>

#include "fixtures.hpp"
#include "nethaz/errors.hpp"
#include "nethaz/simulator.hpp"

using namespace nethaz;
using nethaz::testing::vec;

namespace {

SimConfig base_config() {
  SimConfig c;
  c.n_vertices = 10;
  c.horizon = 100.0;
  c.covariates = {1, 0.1, -1.0, 1.0};
  c.beta0 = vec({0.4});
  c.theta0 = vec({std::log(0.5)});
  return c;
}

double on_fraction(const PiecewisePath& edge, double horizon) {
  double on = 0.0;
  for (Index k = 0; k < edge.segment_count(); ++k) {
    if (edge.values()(0, k) == 1.0) on += edge.segment_end(k, horizon) - edge.breakpoints()[static_cast<std::size_t>(k)];
  }
  return on / horizon;
}

}  // namespace

TEST_CASE("seeds and random streams") {
  CHECK(mix_seed(1) != mix_seed(2));
  CHECK(pair_seed(7, {0, 1}, 1) != pair_seed(7, {0, 1}, 2));
  CHECK(pair_seed(7, {0, 1}, 1) != pair_seed(7, {1, 0}, 1));
  Rng rng(3);
  for (int k = 0; k < 1000; ++k) {
    const double u = uniform01(rng);
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
  }
}

TEST_CASE("edge processes") {
  auto c = base_config();
  c.edge_on_rate = 1.0;
  c.edge_off_rate = 1.0;
  c.horizon = 400.0;
  double total = 0.0;
  int pairs = 0;
  for (int j = 1; j < 10; ++j, ++pairs) total += on_fraction(simulate_edges(c, {0, j}), c.horizon);
  CHECK(std::abs(total / pairs - 0.5) < 0.05);

  c.edge_off_rate = 1e6;
  CHECK(on_fraction(simulate_edges(c, {0, 1}), c.horizon) < 1e-3);
  c.edge_off_rate = 0.0;
  CHECK(simulate_edges(c, {0, 1}).scalar(50.0) == 1.0);
  c.edge_on_rate = 0.0;
  c.edge_off_rate = 1.0;
  CHECK(simulate_edges(c, {0, 1}).scalar(50.0) == 0.0);
  c.edge_off_rate = 0.0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
}

TEST_CASE("covariate processes") {
  auto c = base_config();
  c.covariates.jump_rate = 0.0;
  CHECK(simulate_covariates(c, {0, 1}).segment_count() == 1);

  c.covariates = {2, 0.2, -0.5, 1.5};
  c.beta0 = vec({0.0, 0.0});
  double jumps = 0.0;
  int pairs = 0;
  for (int i = 0; i < 10; ++i) {
    for (int j = i + 1; j < 10; ++j, ++pairs) {
      const auto path = simulate_covariates(c, {i, j});
      CHECK(path.dimension() == 2);
      CHECK((path.values().array() >= -0.5).all());
      CHECK((path.values().array() <= 1.5).all());
      jumps += static_cast<double>(path.segment_count() - 1);
    }
  }
  const double mean = 0.2 * 100.0;
  CHECK(std::abs(jumps / pairs - mean) < 4.0 * std::sqrt(mean / pairs));
}

TEST_CASE("thinning sampler") {
  Rng rng(5);
  CHECK(simulate_events([](double) { return 0.0; }, 1.0, 10.0, rng).empty());
  CHECK_THROWS_AS(simulate_events([](double) { return 3.0; }, 1.0, 10.0, rng), NumericalError);

  const int reps = 2000;
  std::vector<double> counts;
  std::vector<int> bins(10, 0);
  for (int r = 0; r < reps; ++r) {
    const auto events = simulate_events([](double) { return 2.0; }, 2.5, 10.0, rng);
    counts.push_back(static_cast<double>(events.size()));
    for (double t : events) ++bins[static_cast<std::size_t>(std::min(9.0, t))];
  }
  const double mean = std::accumulate(counts.begin(), counts.end(), 0.0) / reps;
  double var = 0.0;
  for (double x : counts) var += (x - mean) * (x - mean);
  var /= reps - 1;
  CHECK(std::abs(mean - 20.0) < 4.0 * std::sqrt(20.0 / reps));
  CHECK(std::abs(var / 20.0 - 1.0) < 0.15);
  // Uniform event times: chi-square with 9 degrees of freedom at 1%.
  const double expected = mean * reps / 10.0;
  double chi2 = 0.0;
  for (int b : bins) chi2 += (b - expected) * (b - expected) / expected;
  CHECK(chi2 < 21.666);
}

TEST_CASE("study totals and structure") {
  auto c = base_config();
  c.edge_off_rate = 0.0;
  c.beta0 = vec({0.0});
  const auto sim = simulate_study(c);
  const double expected = 45.0 * 0.5 * 100.0;
  CHECK(std::abs(static_cast<double>(sim.panel.event_count()) - expected) < 4.0 * std::sqrt(expected));
  CHECK(sim.truth.intensity_bound >= 0.5);

  auto varying = base_config();
  varying.edge_on_rate = 0.2;
  varying.edge_off_rate = 0.3;
  const auto v = simulate_study(varying);
  CHECK(validate_panel(v.panel).ok());
}

TEST_CASE("determinism across thread counts") {
  auto c = base_config();
  c.edge_on_rate = 0.2;
  c.edge_off_rate = 0.3;
  c.threads = 1;
  const auto a = simulate_study(c);
  c.threads = 4;
  const auto b = simulate_study(c);
  REQUIRE(a.panel.pairs.size() == b.panel.pairs.size());
  for (std::size_t k = 0; k < a.panel.pairs.size(); ++k) {
    CHECK(a.panel.pairs[k].key == b.panel.pairs[k].key);
    CHECK(a.panel.pairs[k].edge == b.panel.pairs[k].edge);
    CHECK(a.panel.pairs[k].covariates == b.panel.pairs[k].covariates);
    CHECK(a.panel.pairs[k].events == b.panel.pairs[k].events);
  }
  c.seed = 2;
  CHECK(simulate_study(c).panel.event_count() != a.panel.event_count());
}

TEST_CASE("perturbations") {
  PerturbationSpec bump;
  bump.kind = PerturbationSpec::Kind::half_sine;
  bump.amplitude = 2.0;
  bump.start = 10.0;
  bump.width = 4.0;
  CHECK(bump(12.0) == doctest::Approx(2.0));
  CHECK(bump(9.0) == 0.0);
  CHECK(bump(15.0) == 0.0);
  CHECK(parse_perturbation_kind(to_string(PerturbationSpec::Kind::sinusoid)) == PerturbationSpec::Kind::sinusoid);

  // A zero-scaled alternative reproduces the null panel exactly.
  auto c = base_config();
  const auto null = simulate_study(c);
  c.perturbation = bump;
  c.perturbation.c = 0.0;
  const auto zero = simulate_study(c);
  for (std::size_t k = 0; k < null.panel.pairs.size(); ++k) CHECK(null.panel.pairs[k].events == zero.panel.pairs[k].events);

  c.perturbation.kind = PerturbationSpec::Kind::constant;
  c.perturbation.c = -10.0;
  CHECK_THROWS_AS(simulate_study(c), ConfigError);

  c.perturbation = bump;
  c.perturbation.c = 1.0;
  CHECK(true_baseline(c, 1.0, 12.0) == doctest::Approx(0.5 + 2.0));
}

TEST_CASE("property: event counts of distinct pairs are uncorrelated") {
  auto c = base_config();
  c.n_vertices = 3;
  c.horizon = 20.0;
  c.edge_off_rate = 0.0;
  std::vector<double> a, b;
  for (std::uint64_t seed = 1; seed <= 300; ++seed) {
    c.seed = seed;
    const auto sim = simulate_study(c);
    a.push_back(static_cast<double>(sim.panel.pairs[0].events.size()));
    b.push_back(static_cast<double>(sim.panel.pairs[1].events.size()));
  }
  const double ma = std::accumulate(a.begin(), a.end(), 0.0) / a.size();
  const double mb = std::accumulate(b.begin(), b.end(), 0.0) / b.size();
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    sab += (a[k] - ma) * (b[k] - mb);
    saa += (a[k] - ma) * (a[k] - ma);
    sbb += (b[k] - mb) * (b[k] - mb);
  }
  CHECK(std::abs(sab / std::sqrt(saa * sbb)) < 0.2);
}
