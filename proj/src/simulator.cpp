#include "nethaz/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <thread>

#include "nethaz/errors.hpp"
#include "nethaz/gof_test.hpp"

namespace nethaz {

namespace {

constexpr std::uint64_t kEdgeStream = 1;
constexpr std::uint64_t kCovariateStream = 2;
constexpr std::uint64_t kEventStream = 3;
constexpr std::uint64_t kPilotSalt = 0x5bd1e9955bd1e995ULL;

std::vector<PairKey> all_pairs(int n, bool directed) {
  std::vector<PairKey> keys;
  for (int i = 0; i < n; ++i) {
    for (int j = directed ? 0 : i + 1; j < n; ++j) {
      if (i != j) keys.push_back({i, j});
    }
  }
  return keys;
}

// Largest Psi over the covariate box.
double link_bound(const SimConfig& config) {
  double total = 0.0;
  for (Index k = 0; k < config.beta0.size(); ++k) {
    total += std::max(config.beta0[k] * config.covariates.lower, config.beta0[k] * config.covariates.upper);
  }
  return std::exp(total);
}

// Points at which the baseline is scanned for its supremum and sign.
std::vector<double> scan_points(const SimConfig& config) {
  const double T = config.horizon;
  const double step = std::min(0.01, T / 1e5);
  std::vector<double> pts;
  const auto n = static_cast<Index>(std::ceil(T / step));
  pts.reserve(static_cast<std::size_t>(n) + 1);
  for (Index k = 0; k <= n; ++k) pts.push_back(std::min(T, static_cast<double>(k) * step));
  auto add = [&](double b) {
    for (double x : {b - 1e-12, b, b + 1e-12}) {
      if (x >= 0.0 && x <= T) pts.push_back(x);
    }
  };
  for (double b : config.baseline.breakpoints({0.0, T})) add(b);
  for (double b : config.perturbation.breakpoints()) add(b);
  return pts;
}

double detection_rate_scale(const SimConfig& config, TruthRecord& truth) {
  SimConfig pilot = config;
  pilot.perturbation = {};
  pilot.seed = mix_seed(config.seed ^ kPilotSalt);
  const auto sim = simulate_study(pilot);
  const Interval test = config.test_interval;
  KernelSpec kernel = config.kernel;
  if (!(kernel.bandwidth > 0.0)) kernel.bandwidth = default_bandwidth(sim.panel, test);
  const auto weight = WeightFunction::tapered(test, kernel.bandwidth);
  const QuadratureGrid grid(test.lo, test.hi, config.grid_size);
  const auto p = edge_fraction_function(sim.panel, test, true);
  const auto cuts = p.breakpoints();
  truth.pilot_h = kernel.bandwidth;
  truth.pilot_a_hat = compute_a_n(p, cuts, kernel, weight, grid, sim.panel.pair_count());
  return config.perturbation.c / truth.pilot_a_hat * std::pow(kernel.bandwidth, -0.25);
}

}  // namespace

std::uint64_t mix_seed(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t pair_seed(std::uint64_t master, PairKey key, std::uint64_t stream) {
  const auto packed = (static_cast<std::uint64_t>(static_cast<std::uint32_t>(key.i)) << 32) |
                      static_cast<std::uint32_t>(key.j);
  return mix_seed(mix_seed(mix_seed(master) ^ packed) ^ stream);
}

double PerturbationSpec::operator()(double t) const {
  switch (kind) {
    case Kind::none:
      return 0.0;
    case Kind::half_sine:
      if (t < start || t > start + width) return 0.0;
      return amplitude * std::sin(std::numbers::pi * (t - start) / width);
    case Kind::sinusoid:
      return amplitude * std::sin(2.0 * std::numbers::pi * t / period + phase);
    case Kind::constant:
      return amplitude;
  }
  return 0.0;
}

std::vector<double> PerturbationSpec::breakpoints() const {
  if (kind == Kind::half_sine) return {start, start + width};
  return {};
}

PerturbationSpec::Kind parse_perturbation_kind(const std::string& name) {
  if (name == "none") return PerturbationSpec::Kind::none;
  if (name == "half_sine") return PerturbationSpec::Kind::half_sine;
  if (name == "sinusoid") return PerturbationSpec::Kind::sinusoid;
  if (name == "constant") return PerturbationSpec::Kind::constant;
  throw ConfigError("unknown perturbation '" + name + "'");
}

std::string to_string(PerturbationSpec::Kind kind) {
  switch (kind) {
    case PerturbationSpec::Kind::none:
      return "none";
    case PerturbationSpec::Kind::half_sine:
      return "half_sine";
    case PerturbationSpec::Kind::sinusoid:
      return "sinusoid";
    case PerturbationSpec::Kind::constant:
      return "constant";
  }
  return "none";
}

void SimConfig::validate() const {
  if (n_vertices < 2) throw ConfigError("simulation needs at least two vertices");
  if (!(horizon > 0.0) || !std::isfinite(horizon)) throw ConfigError("horizon must be positive and finite");
  if (edge_on_rate < 0.0 || edge_off_rate < 0.0 || !std::isfinite(edge_on_rate) || !std::isfinite(edge_off_rate)) {
    throw ConfigError("edge rates must be finite and nonnegative");
  }
  if (edge_on_rate == 0.0 && edge_off_rate == 0.0) throw ConfigError("edge on and off rates cannot both be zero");
  if (covariates.dimension < 0 || covariates.jump_rate < 0.0) throw ConfigError("invalid covariate settings");
  if (!(covariates.upper >= covariates.lower) || !std::isfinite(covariates.lower) ||
      !std::isfinite(covariates.upper)) {
    throw ConfigError("covariate bounds must be finite with lower <= upper");
  }
  if (beta0.size() != covariates.dimension) throw ConfigError("beta0 dimension differs from the covariate dimension");
  if (theta0.size() != baseline.dimension()) throw ConfigError("theta0 dimension differs from the baseline features");
  if (perturbation.kind == PerturbationSpec::Kind::half_sine && !(perturbation.width > 0.0)) {
    throw ConfigError("half-sine perturbation needs a positive width");
  }
  if (perturbation.kind == PerturbationSpec::Kind::sinusoid && !(perturbation.period > 0.0)) {
    throw ConfigError("sinusoid perturbation needs a positive period");
  }
}

PiecewisePath simulate_edges(const SimConfig& config, PairKey key) {
  const double on = config.edge_on_rate;
  const double off = config.edge_off_rate;
  if (off == 0.0) return PiecewisePath::constant(1.0);
  if (on == 0.0) return PiecewisePath::constant(0.0);
  Rng rng(pair_seed(config.seed, key, kEdgeStream));
  bool state = uniform01(rng) < on / (on + off);
  std::vector<Interval> intervals;
  double t = 0.0;
  while (t < config.horizon) {
    const double next = t + exponential(rng, state ? off : on);
    if (state) intervals.push_back({t, std::min(next, config.horizon)});
    t = next;
    state = !state;
  }
  return PiecewisePath::edge_indicator(intervals, config.horizon);
}

PiecewisePath simulate_covariates(const SimConfig& config, PairKey key) {
  const auto& cov = config.covariates;
  const Index p = cov.dimension;
  Rng rng(pair_seed(config.seed, key, kCovariateStream));
  auto draw = [&] {
    Vector v(p);
    for (Index k = 0; k < p; ++k) v[k] = cov.lower + (cov.upper - cov.lower) * uniform01(rng);
    return v;
  };
  std::vector<double> knots{0.0};
  std::vector<Vector> values{draw()};
  if (cov.jump_rate > 0.0 && p > 0) {
    for (double t = exponential(rng, cov.jump_rate); t < config.horizon; t += exponential(rng, cov.jump_rate)) {
      knots.push_back(t);
      values.push_back(draw());
    }
  }
  Matrix m(p, static_cast<Index>(values.size()));
  for (std::size_t k = 0; k < values.size(); ++k) m.col(static_cast<Index>(k)) = values[k];
  return {std::move(knots), std::move(m)};
}

std::vector<double> simulate_events(const std::function<double(double)>& intensity, double bound, double horizon,
                                    Rng& rng) {
  std::vector<double> events;
  if (!(bound > 0.0)) return events;
  for (double t = exponential(rng, bound); t <= horizon; t += exponential(rng, bound)) {
    const double lambda = intensity(t);
    if (lambda > bound) throw NumericalError("intensity bound violated");
    if (uniform01(rng) * bound < lambda) events.push_back(t);
  }
  return events;
}

double true_baseline(const SimConfig& config, double c, double t) {
  return config.baseline.value(config.theta0, t) + c * config.perturbation(t);
}

void parallel_for(Index count, int threads, const std::function<void(Index)>& body) {
  const auto workers = static_cast<Index>(std::max(1, std::min<int>(threads, static_cast<int>(std::max<Index>(1, count)))));
  if (workers <= 1) {
    for (Index k = 0; k < count; ++k) body(k);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(workers));
  for (Index w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (Index k = w; k < count; k += workers) body(k);
      } catch (...) {
        errors[static_cast<std::size_t>(w)] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

Simulation simulate_study(const SimConfig& config) {
  config.validate();
  Simulation sim;
  auto& truth = sim.truth;
  truth.theta0 = config.theta0;
  truth.beta0 = config.beta0;
  truth.seed = config.seed;

  double c = 0.0;
  if (config.perturbation.kind != PerturbationSpec::Kind::none) {
    c = config.perturbation.scale == PerturbationSpec::Scale::fixed ? config.perturbation.c
                                                                    : detection_rate_scale(config, truth);
  }
  truth.c = c;

  double sup_alpha = 0.0;
  for (double t : scan_points(config)) {
    const double a = true_baseline(config, c, t);
    if (a < 0.0) throw ConfigError("invalid alternative: the perturbed baseline is negative at t = " + std::to_string(t));
    sup_alpha = std::max(sup_alpha, a);
  }
  const double bound = 1.05 * sup_alpha * link_bound(config);
  truth.intensity_bound = bound;
  truth.alpha0 = sample_curve([&](double t) { return true_baseline(config, c, t); },
                              QuadratureGrid(0.0, config.horizon, config.grid_size), CurveKind::true_sim);

  const auto keys = all_pairs(config.n_vertices, config.directed);
  auto& panel = sim.panel;
  panel.n_vertices = config.n_vertices;
  panel.directed = config.directed;
  panel.horizon = config.horizon;
  panel.pairs.resize(keys.size());
  parallel_for(static_cast<Index>(keys.size()), config.threads, [&](Index k) {
    const auto key = keys[static_cast<std::size_t>(k)];
    auto& record = panel.pairs[static_cast<std::size_t>(k)];
    record.key = key;
    record.edge = simulate_edges(config, key);
    record.covariates = simulate_covariates(config, key);
    Rng rng(pair_seed(config.seed, key, kEventStream));
    const auto& edge = record.edge;
    const auto& cov = record.covariates;
    record.events = simulate_events(
        [&](double t) {
          if (edge.scalar_left_limit(t) == 0.0) return 0.0;
          return true_baseline(config, c, t) * std::exp(cov.left_limit(t).dot(config.beta0));
        },
        bound, config.horizon, rng);
  });
  const auto ties = resolve_ties(panel);
  if (ties > 0) warn("simulation produced " + std::to_string(ties) + " tied event times");
  return sim;
}

}  // namespace nethaz
