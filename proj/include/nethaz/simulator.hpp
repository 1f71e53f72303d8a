#pragma once

// Synthetic panels from a known proportional-hazards model: Markov edge
// processes, piecewise-constant covariates and events by thinning, under
// the null, fixed alternatives or scaled (local) alternatives.

#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "nethaz/core_model.hpp"
#include "nethaz/kernels.hpp"
#include "nethaz/quadrature.hpp"

namespace nethaz {

/// splitmix64 finalizer; used to derive independent sub-seeds.
std::uint64_t mix_seed(std::uint64_t x);
/// Seed for one pair and one random stream, independent of scheduling.
std::uint64_t pair_seed(std::uint64_t master, PairKey key, std::uint64_t stream);

using Rng = std::mt19937_64;

/// Uniform on [0, 1) from the top 53 bits.
inline double uniform01(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }
inline double exponential(Rng& rng, double rate) { return -std::log1p(-uniform01(rng)) / rate; }

struct CovariateConfig {
  Index dimension = 0;
  double jump_rate = 0.0;  // per hour
  double lower = -1.0;     // box bounds, same for every coordinate
  double upper = 1.0;
};

/// Baseline perturbation Delta(t) for alternatives.
struct PerturbationSpec {
  enum class Kind { none, half_sine, sinusoid, constant };
  enum class Scale { fixed, detection_rate };

  Kind kind = Kind::none;
  double amplitude = 1.0;
  double start = 0.0;    // half_sine: left end of the bump
  double width = 24.0;   // half_sine: length of the bump
  double period = 24.0;  // sinusoid
  double phase = 0.0;    // sinusoid
  Scale scale = Scale::fixed;
  double c = 1.0;  // fixed: the scale; detection_rate: multiplier of a^-1 h^-1/4

  double operator()(double t) const;
  std::vector<double> breakpoints() const;
};

PerturbationSpec::Kind parse_perturbation_kind(const std::string& name);
std::string to_string(PerturbationSpec::Kind kind);

struct SimConfig {
  int n_vertices = 10;
  bool directed = false;
  double horizon = 168.0;
  double edge_on_rate = 0.1;   // off -> on, per hour
  double edge_off_rate = 0.1;  // on -> off; zero keeps edges on throughout
  CovariateConfig covariates;
  BaselineSpec baseline = BaselineSpec::constant();
  Vector theta0 = Vector::Zero(1);
  Vector beta0;
  PerturbationSpec perturbation;
  std::uint64_t seed = 1;
  int threads = 1;

  // Used only to compute the detection-rate scale from a pilot run.
  Interval test_interval{84.0, 168.0};
  KernelSpec kernel{KernelShape::triangular, 0.0};
  Index grid_size = 4096;

  LinkSpec link() const { return {LinkKind::exp_linear, covariates.dimension}; }
  /// Throws ConfigError on inconsistent settings.
  void validate() const;
};

/// Two-state Markov chain started from its stationary law.
PiecewisePath simulate_edges(const SimConfig& config, PairKey key);

/// Uniform values on the covariate box, redrawn at Poisson(jump_rate) times.
PiecewisePath simulate_covariates(const SimConfig& config, PairKey key);

/// Thinning of a homogeneous Poisson(bound) process on [0, horizon]. Throws
/// NumericalError("intensity bound violated") if a proposal exceeds it.
std::vector<double> simulate_events(const std::function<double(double)>& intensity, double bound, double horizon,
                                    Rng& rng);

struct TruthRecord {
  Vector theta0;
  Vector beta0;
  double c = 0.0;
  double pilot_a_hat = 0.0;  // detection-rate scale only
  double pilot_h = 0.0;
  double intensity_bound = 0.0;
  BaselineCurve alpha0;  // true baseline on a grid over [0, T]
  std::uint64_t seed = 0;
};

struct Simulation {
  PairPanel panel;
  TruthRecord truth;
};

/// alpha0(t) = alpha(theta0, t) + c Delta(t).
double true_baseline(const SimConfig& config, double c, double t);

/// Simulates a full panel. Identical config and seed give an identical
/// panel regardless of the thread count.
Simulation simulate_study(const SimConfig& config);

/// Runs body(k) for k in [0, count) on up to `threads` workers.
void parallel_for(Index count, int threads, const std::function<void(Index)>& body);

}  // namespace nethaz
