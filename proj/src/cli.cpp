#include "nethaz/cli.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>
#include <set>
#include <sstream>

#include "nethaz/errors.hpp"
#include "nethaz/estimators.hpp"
#include "nethaz/gof_test.hpp"
#include "nethaz/ingest.hpp"
#include "nethaz/panel_io.hpp"
#include "nethaz/report_io.hpp"
#include "nethaz/simulator.hpp"

namespace nethaz {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct CommonOptions {
  std::string out;
  std::string config;
  std::uint64_t seed = 1;
  double bandwidth = 0.0;
  std::string kernel = "triangular";
  Index grid_size = 4096;
  int threads = 1;
  bool directed = false;
  std::string fit_interval;
  std::string test_interval;
};

struct SimOptions {
  int vertices = 10;
  double horizon = 168.0;
  double on_rate = 0.1;
  double off_rate = 0.1;
  Index covariate_dim = 2;
  double jump_rate = 0.05;
  std::string covariate_bounds = "-1,1";
  std::string beta0 = "0.5,-0.3";
  std::string theta0 = "-2";
  int harmonics = 0;
  double period = 24.0;
  std::string perturbation = "none";
  double amplitude = 1.0;
  double bump_start = 0.0;
  double bump_width = 24.0;
  double scale = 1.0;
  bool detection_rate = false;
};

struct TestFlags {
  bool no_clamp = false;
  Index min_events = 10;
};

std::vector<double> parse_list(const std::string& text, const std::string& what) {
  std::vector<double> out;
  if (text.empty()) return out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    try {
      out.push_back(parse_double(item, what));
    } catch (const DataError& e) {
      throw ConfigError(e.what());
    }
  }
  return out;
}

Interval parse_interval(const std::string& text, const std::string& what) {
  const auto v = parse_list(text, what);
  if (v.size() != 2) throw ConfigError(what + " must be given as a,b");
  return {v[0], v[1]};
}

Vector to_vector(const std::vector<double>& v) {
  Vector out(static_cast<Index>(v.size()));
  for (std::size_t k = 0; k < v.size(); ++k) out[static_cast<Index>(k)] = v[k];
  return out;
}

KernelShape kernel_shape(const std::string& name) {
  try {
    return parse_kernel_shape(name);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

StudyDesign design_for(const CommonOptions& common, double horizon) {
  StudyDesign design;
  design.fit = common.fit_interval.empty() ? Interval{0.0, horizon / 2.0}
                                           : parse_interval(common.fit_interval, "--fit-interval");
  design.test = common.test_interval.empty() ? Interval{horizon / 2.0, horizon}
                                             : parse_interval(common.test_interval, "--test-interval");
  design.validate(horizon);
  return design;
}

TestOptions test_options(const CommonOptions& common, const TestFlags& flags) {
  TestOptions options;
  options.kernel = {kernel_shape(common.kernel), common.bandwidth};
  options.grid_size = common.grid_size;
  options.clamp = !flags.no_clamp;
  options.min_events = flags.min_events;
  return options;
}

SimConfig sim_config(const CommonOptions& common, const SimOptions& sim) {
  SimConfig config;
  config.n_vertices = sim.vertices;
  config.directed = common.directed;
  config.horizon = sim.horizon;
  config.edge_on_rate = sim.on_rate;
  config.edge_off_rate = sim.off_rate;
  config.covariates.dimension = sim.covariate_dim;
  config.covariates.jump_rate = sim.jump_rate;
  const auto bounds = parse_list(sim.covariate_bounds, "--covariate-bounds");
  if (bounds.size() != 2) throw ConfigError("--covariate-bounds must be given as lo,hi");
  config.covariates.lower = bounds[0];
  config.covariates.upper = bounds[1];
  config.beta0 = to_vector(parse_list(sim.beta0, "--beta0"));
  if (sim.covariate_dim == 0) config.beta0 = Vector(0);
  config.baseline = sim.harmonics > 0 ? BaselineSpec::diurnal(sim.harmonics, sim.period) : BaselineSpec::constant();
  config.baseline.horizon = sim.horizon;
  config.theta0 = to_vector(parse_list(sim.theta0, "--theta0"));
  config.perturbation.kind = parse_perturbation_kind(sim.perturbation);
  config.perturbation.amplitude = sim.amplitude;
  config.perturbation.start = sim.bump_start;
  config.perturbation.width = sim.bump_width;
  config.perturbation.period = sim.period;
  config.perturbation.c = sim.scale;
  config.perturbation.scale =
      sim.detection_rate ? PerturbationSpec::Scale::detection_rate : PerturbationSpec::Scale::fixed;
  config.seed = common.seed;
  config.threads = common.threads;
  config.kernel = {kernel_shape(common.kernel), common.bandwidth};
  config.grid_size = common.grid_size;
  config.test_interval = design_for(common, sim.horizon).test;
  config.validate();
  return config;
}

void add_common(CLI::App& cmd, CommonOptions& common, bool needs_out) {
  cmd.add_option("--config", common.config, "TOML/INI file of option values; command-line flags take precedence");
  auto* out = cmd.add_option("--out", common.out, "Output directory");
  if (needs_out) out->required();
  cmd.add_option("--seed", common.seed, "Random seed");
  cmd.add_option("--bandwidth-hours", common.bandwidth, "Kernel bandwidth in hours (default: rule of thumb)");
  cmd.add_option("--kernel", common.kernel, "Kernel shape")
      ->check(CLI::IsMember({"uniform", "triangular", "epanechnikov"}));
  cmd.add_option("--grid-size", common.grid_size, "Quadrature grid size")->check(CLI::Range(Index{2}, Index{1} << 24));
  cmd.add_option("--threads", common.threads, "Worker threads (results do not depend on it)")
      ->check(CLI::Range(1, 1024));
  cmd.add_flag("--directed", common.directed, "Directed network");
  cmd.add_option("--fit-interval", common.fit_interval, "Fit interval a,b in hours");
  cmd.add_option("--test-interval", common.test_interval, "Test interval c,d in hours");
}

void add_sim(CLI::App& cmd, SimOptions& sim) {
  cmd.add_option("--vertices", sim.vertices, "Number of vertices");
  cmd.add_option("--horizon-hours", sim.horizon, "Study horizon T in hours");
  cmd.add_option("--edge-on-rate", sim.on_rate, "Edge formation rate per hour");
  cmd.add_option("--edge-off-rate", sim.off_rate, "Edge dissolution rate per hour (0: always on)");
  cmd.add_option("--covariate-dim", sim.covariate_dim, "Pair covariate dimension");
  cmd.add_option("--covariate-jump-rate", sim.jump_rate, "Covariate jump rate per hour");
  cmd.add_option("--covariate-bounds", sim.covariate_bounds, "Covariate box lo,hi");
  cmd.add_option("--beta0", sim.beta0, "True beta, comma separated");
  cmd.add_option("--theta0", sim.theta0, "True theta, comma separated");
  cmd.add_option("--harmonics", sim.harmonics, "Daily harmonics in the log-linear baseline");
  cmd.add_option("--period", sim.period, "Harmonic period in hours");
  cmd.add_option("--perturbation", sim.perturbation, "Baseline perturbation")
      ->check(CLI::IsMember({"none", "half_sine", "sinusoid", "constant"}));
  cmd.add_option("--amplitude", sim.amplitude, "Perturbation amplitude");
  cmd.add_option("--bump-start", sim.bump_start, "Half-sine bump start in hours");
  cmd.add_option("--bump-width", sim.bump_width, "Half-sine bump width in hours");
  cmd.add_option("--scale", sim.scale, "Perturbation scale c (multiplier with --detection-rate)");
  cmd.add_flag("--detection-rate", sim.detection_rate, "Scale the perturbation by a^-1 h^-1/4 from a pilot run");
}

// Numbers and booleans are echoed as such; anything else stays a string.
json typed_value(const std::string& text) {
  auto parsed = json::parse(text, nullptr, false);
  if (!parsed.is_discarded() && (parsed.is_number() || parsed.is_boolean())) return parsed;
  return text;
}

// Resolved option values of a command, excluding those that cannot change
// the results.
json resolved_config(const CLI::App& cmd) {
  static const std::set<std::string> skip{"help", "config", "threads", "out"};
  json out = json::object();
  out["command"] = cmd.get_name();
  for (const auto* opt : cmd.get_options()) {
    const auto& names = opt->get_lnames();
    if (names.empty() || skip.count(names.front())) continue;
    const auto& name = names.front();
    if (opt->get_expected_max() == 0) {
      out[name] = opt->count() > 0;
    } else if (opt->count() > 0) {
      const auto& results = opt->results();
      if (results.size() == 1) {
        out[name] = typed_value(results.front());
      } else {
        json list = json::array();
        for (const auto& r : results) list.push_back(typed_value(r));
        out[name] = list;
      }
    } else {
      out[name] = typed_value(opt->get_default_str());
    }
  }
  return out;
}

fs::path output_dir(const CommonOptions& common) {
  const fs::path dir(common.out.empty() ? "." : common.out);
  fs::create_directories(dir);
  return dir;
}

void report_panel(const PairPanel& panel) {
  const auto report = validate_panel(panel);
  if (!report.ok()) throw DataError("invalid panel:\n" + report.summary());
}

// Kernel density of event times on [0, T], reflected at both ends so the
// estimate integrates to one.
Vector event_density(const PairPanel& panel, const KernelSpec& kernel, const QuadratureGrid& grid) {
  std::vector<double> times;
  for (const auto& pair : panel.pairs) times.insert(times.end(), pair.events.begin(), pair.events.end());
  Vector density = Vector::Zero(grid.size());
  if (times.empty()) return density;
  const double T = panel.horizon;
  for (Index k = 0; k < grid.size(); ++k) {
    const double t = grid.point(k);
    double total = 0.0;
    for (double s : times) {
      total += kernel_at(kernel, t, s) + kernel_at(kernel, t, -s) + kernel_at(kernel, t, 2.0 * T - s);
    }
    density[k] = total / static_cast<double>(times.size());
  }
  return density;
}

// ---------------------------------------------------------------------------

void cmd_simulate(const CLI::App& cmd, const CommonOptions& common, const SimOptions& sim) {
  const auto config = sim_config(common, sim);
  const auto result = simulate_study(config);
  const auto dir = output_dir(common);
  ModelSpec model{config.link(), config.baseline};
  write_panel(dir, result.panel, model);
  auto truth = to_json(result.truth);
  truth["config"] = resolved_config(cmd);
  truth["n_events"] = result.panel.event_count();
  write_json(dir / "truth.json", truth);
  std::cout << "simulated " << result.panel.event_count() << " events on " << result.panel.pairs.size()
            << " pairs into " << dir.string() << '\n';
}

void cmd_ingest(const CLI::App& cmd, const CommonOptions& common, const std::string& trips_path,
                const std::string& weather_path, const std::string& distances_path, const std::string& origin_text,
                double horizon, const std::string& ref_start, const std::string& ref_end, int min_trips,
                const WeatherOptions& weather_options) {
  auto trips = load_trips(trips_path);
  auto weather = load_weather(weather_path);
  auto distances = load_distances(distances_path);
  std::ostringstream errors;
  std::size_t error_count = 0;
  auto collect = [&](const std::string& file, const std::vector<RowError>& rows) {
    for (const auto& e : rows) {
      if (++error_count <= 20) errors << file << ":" << e.line << ": " << e.message << '\n';
    }
  };
  collect(trips_path, trips.errors);
  collect(weather_path, weather.errors);
  collect(distances_path, distances.errors);
  if (error_count > 0) throw DataError(std::to_string(error_count) + " malformed rows\n" + errors.str());

  const double origin = parse_timestamp(origin_text);
  const StationIndex stations(trips.records);
  const NetworkRule rule{parse_timestamp(ref_start), parse_timestamp(ref_end), min_trips};
  const auto network = build_active_network(trips.records, rule, stations);
  auto build = build_pair_panel(trips.records, network, distance_table(distances.records), stations, origin, horizon);
  auto baseline = build_baseline_features(weather.records, origin, horizon, weather_options);
  build.panel.directed = true;
  report_panel(build.panel);

  const auto dir = output_dir(common);
  ModelSpec model{{LinkKind::exp_linear, 2}, baseline};
  write_panel(dir, build.panel, model);
  {
    std::ofstream out(dir / "stations.csv");
    out << "vertex,station\n";
    for (int v = 0; v < stations.size(); ++v) out << v << ',' << stations.name(v) << '\n';
  }
  json summary{{"config", resolved_config(cmd)},
               {"n_stations", stations.size()},
               {"n_active_pairs", network.size()},
               {"n_events", build.panel.event_count()},
               {"dropped_inactive", build.dropped_inactive},
               {"dropped_outside", build.dropped_outside},
               {"tie_adjustments", build.tie_adjustments}};
  write_json(dir / "ingest.json", summary);
  std::cout << "ingested " << build.panel.event_count() << " events on " << network.size() << " active pairs\n";
}

void cmd_fit(const CLI::App& cmd, const CommonOptions& common, const std::string& panel_dir) {
  Index ties = 0;
  const auto bundle = read_panel(panel_dir, &ties);
  report_panel(bundle.panel);
  const auto design = design_for(common, bundle.panel.horizon);
  const auto fit = fit_mle(bundle.panel, bundle.model.baseline, bundle.model.link, design.fit);
  const auto partial = fit_partial(bundle.panel, bundle.model.link, design.fit);
  json out{{"config", resolved_config(cmd)},
           {"fit_interval", json::array({design.fit.lo, design.fit.hi})},
           {"tie_adjustments", ties},
           {"parametric_fit", to_json(fit)},
           {"partial_fit", to_json(partial)}};
  const auto dir = output_dir(common);
  write_json(dir / "fit.json", out);
  std::cout << "fit converged: " << (fit.converged ? "yes" : "no") << ", partial converged: "
            << (partial.converged ? "yes" : "no") << '\n';
}

void write_test_outputs(const fs::path& dir, const TestReport& report, const json& config) {
  auto j = to_json(report);
  j["config"] = config;
  write_json(dir / "test_report.json", j);
  const auto& grid = report.plug_in.grid;
  Vector weight(grid.size());
  for (Index k = 0; k < grid.size(); ++k) weight[k] = report.weight(grid.point(k));
  write_curves_csv(dir / "curves.csv", grid,
                   {{"nonparametric", report.alpha_np.values},
                    {"parametric_smoothed", report.alpha_smoothed.values},
                    {"parametric", report.alpha_parametric.values},
                    {"p_hat", report.plug_in.p_values},
                    {"xbar", report.plug_in.xbar_values},
                    {"gamma", report.plug_in.gamma_values},
                    {"weight", weight}});
}

void cmd_test(const CLI::App& cmd, const CommonOptions& common, const TestFlags& flags, const std::string& panel_dir) {
  const auto bundle = read_panel(panel_dir);
  report_panel(bundle.panel);
  const auto design = design_for(common, bundle.panel.horizon);
  const auto report = run_test(bundle.panel, design, bundle.model, test_options(common, flags));
  write_test_outputs(output_dir(common), report, resolved_config(cmd));
  std::cout << "T_n = " << report.T_n << ", z = " << report.z << ", p = " << report.p_value << '\n';
}

void cmd_power(const CLI::App& cmd, const CommonOptions& common, const SimOptions& sim, const TestFlags& flags,
               int replications, const std::string& c_grid_text, double level) {
  if (replications <= 0) throw ConfigError("--replications must be positive");
  auto c_grid = parse_list(c_grid_text, "--c-grid");
  if (c_grid.empty()) c_grid.push_back(sim.scale);
  const auto base = sim_config(common, sim);
  const auto design = design_for(common, sim.horizon);
  const auto options = test_options(common, flags);

  struct Outcome {
    bool ok = false;
    bool reject = false;
    double z = 0.0;
  };
  const auto jobs = static_cast<Index>(c_grid.size()) * replications;
  std::vector<Outcome> outcomes(static_cast<std::size_t>(jobs));
  set_warnings_enabled(false);
  parallel_for(jobs, common.threads, [&](Index job) {
    const auto ci = static_cast<std::size_t>(job / replications);
    const auto rep = static_cast<std::uint64_t>(job % replications);
    SimConfig config = base;
    config.threads = 1;
    config.perturbation.c = c_grid[ci];
    // Common random numbers across the c grid.
    config.seed = mix_seed(base.seed + rep);
    auto& outcome = outcomes[static_cast<std::size_t>(job)];
    try {
      const auto simulated = simulate_study(config);
      const auto report = run_test(simulated.panel, design, {config.link(), config.baseline}, options);
      outcome = {true, report.p_value < level, report.z};
    } catch (const Error&) {
      outcome.ok = false;
    }
  });
  set_warnings_enabled(true);

  const auto dir = output_dir(common);
  std::ofstream csv(dir / "power.csv");
  csv << "c,replications,rejections,rejection_rate,failures,mean_z,sd_z\n";
  json rows = json::array();
  for (std::size_t ci = 0; ci < c_grid.size(); ++ci) {
    Index rejections = 0, ok = 0;
    double sum = 0.0, sum_sq = 0.0;
    for (int rep = 0; rep < replications; ++rep) {
      const auto& o = outcomes[ci * static_cast<std::size_t>(replications) + static_cast<std::size_t>(rep)];
      if (!o.ok) continue;
      ++ok;
      rejections += o.reject ? 1 : 0;
      sum += o.z;
      sum_sq += o.z * o.z;
    }
    const double rate = ok > 0 ? static_cast<double>(rejections) / static_cast<double>(ok) : 0.0;
    const double mean = ok > 0 ? sum / static_cast<double>(ok) : 0.0;
    const double sd = ok > 1 ? std::sqrt(std::max(0.0, (sum_sq - static_cast<double>(ok) * mean * mean) /
                                                           static_cast<double>(ok - 1)))
                             : 0.0;
    csv << format_double(c_grid[ci]) << ',' << ok << ',' << rejections << ',' << format_double(rate) << ','
        << (replications - ok) << ',' << format_double(mean) << ',' << format_double(sd) << '\n';
    rows.push_back({{"c", c_grid[ci]},
                    {"replications", ok},
                    {"rejections", rejections},
                    {"rejection_rate", rate},
                    {"failures", replications - ok},
                    {"mean_z", mean},
                    {"sd_z", sd}});
    std::cout << "c = " << c_grid[ci] << ": rejection rate " << rate << " (" << rejections << "/" << ok << ")\n";
  }
  write_json(dir / "power.json", {{"config", resolved_config(cmd)}, {"level", level}, {"rows", rows}});
}

void cmd_export_plots(const CLI::App& cmd, const CommonOptions& common, const TestFlags& flags,
                      const std::string& panel_dir, bool density_only) {
  const auto bundle = read_panel(panel_dir);
  const auto& panel = bundle.panel;
  const auto dir = output_dir(common);
  const QuadratureGrid grid(0.0, panel.horizon, common.grid_size);
  const Index events = panel.event_count();

  KernelSpec kernel{kernel_shape(common.kernel), common.bandwidth};
  if (!(kernel.bandwidth > 0.0)) {
    // Normal-reference bandwidth for the event-time density.
    double mean = 0.0, sq = 0.0;
    for (const auto& pair : panel.pairs) {
      for (double t : pair.events) {
        mean += t;
        sq += t * t;
      }
    }
    const double n = static_cast<double>(std::max<Index>(events, 1));
    mean /= n;
    const double sd = std::sqrt(std::max(0.0, sq / n - mean * mean));
    kernel.bandwidth = std::min(panel.horizon / 2.0, std::max(1e-3, 1.06 * sd * std::pow(n, -0.2)));
  }
  json summary{{"config", resolved_config(cmd)}, {"density_bandwidth_hours", kernel.bandwidth}};
  if (events == 0) {
    warn("panel has no events; writing empty curves");
    std::ofstream(dir / "density.csv") << "t,density\n";
    std::ofstream(dir / "curves.csv") << "t,nonparametric,parametric_smoothed,parametric\n";
    write_json(dir / "plots.json", summary);
    return;
  }
  write_curves_csv(dir / "density.csv", grid, {{"density", event_density(panel, kernel, grid)}});
  if (!density_only) {
    const auto design = design_for(common, panel.horizon);
    const auto report = run_test(panel, design, bundle.model, test_options(common, flags));
    const auto& test_grid = report.plug_in.grid;
    write_curves_csv(dir / "curves.csv", test_grid,
                     {{"nonparametric", report.alpha_np.values},
                      {"parametric_smoothed", report.alpha_smoothed.values},
                      {"parametric", report.alpha_parametric.values}});
    summary["test_bandwidth_hours"] = report.h;
  }
  write_json(dir / "plots.json", summary);
}

// Splices the entries of a --config file into the argument list as
// "--key=value" for every key not already given on the command line. Keys
// may sit at the top level or under a section named after the subcommand.
std::vector<std::string> expand_config(std::vector<std::string> args) {
  const auto it = std::find_if(args.begin(), args.end(),
                               [](const std::string& a) { return a == "--config" || a.rfind("--config=", 0) == 0; });
  if (it == args.end()) return args;
  std::string path;
  if (*it == "--config") {
    if (std::next(it) == args.end()) return args;
    path = *std::next(it);
  } else {
    path = it->substr(9);
  }
  if (!fs::exists(path)) throw ConfigError("config file not found: " + path);
  std::string subcommand;
  for (std::size_t k = 1; k < args.size(); ++k) {
    if (!args[k].empty() && args[k][0] != '-') {
      subcommand = args[k];
      break;
    }
  }
  std::vector<CLI::ConfigItem> items;
  try {
    items = CLI::ConfigTOML().from_file(path);
  } catch (const std::exception& e) {
    throw ConfigError("cannot parse config file " + path + ": " + e.what());
  }
  std::vector<std::string> extra;
  for (const auto& item : items) {
    if (item.name.empty() || item.name == "++" || item.name == "--") continue;
    if (!item.parents.empty() && !(item.parents.size() == 1 && item.parents.front() == subcommand)) continue;
    const std::string flag = "--" + item.name;
    const bool given = std::any_of(args.begin(), args.end(), [&](const std::string& a) {
      return a == flag || a.rfind(flag + "=", 0) == 0;
    });
    if (given) continue;
    std::string value;
    for (const auto& v : item.inputs) value += (value.empty() ? "" : ",") + v;
    extra.push_back(flag + "=" + value);
  }
  args.insert(args.end(), extra.begin(), extra.end());
  return args;
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
  std::vector<std::string> raw(argv, argv + argc);
  try {
    raw = expand_config(std::move(raw));
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  std::vector<const char*> expanded;
  for (const auto& a : raw) expanded.push_back(a.c_str());
  argc = static_cast<int>(expanded.size());
  argv = expanded.data();

  CLI::App app{"Goodness-of-fit testing for proportional-hazards models on dynamic networks", "nethaz"};
  app.require_subcommand(1);
  app.option_defaults()->always_capture_default();

  CommonOptions common;
  SimOptions sim;
  TestFlags flags;

  auto* simulate = app.add_subcommand("simulate", "Simulate a panel from a known model");
  add_common(*simulate, common, true);
  add_sim(*simulate, sim);

  std::string trips, weather, distances, origin = "2018-05-13T00:00:00", ref_start = "2018-04-01T00:00:00",
                                         ref_end = "2018-05-01T00:00:00";
  double ingest_horizon = 336.0;
  int min_trips = 10;
  WeatherOptions weather_options;
  auto* ingest = app.add_subcommand("ingest", "Build a panel from trip, weather and distance files");
  add_common(*ingest, common, true);
  ingest->add_option("--trips", trips, "trips.csv")->required();
  ingest->add_option("--weather", weather, "weather.csv")->required();
  ingest->add_option("--distances", distances, "distances.csv")->required();
  ingest->add_option("--origin", origin, "Study origin (ISO-8601)");
  ingest->add_option("--horizon-hours", ingest_horizon, "Study length in hours");
  ingest->add_option("--reference-start", ref_start, "Start of the network reference window");
  ingest->add_option("--reference-end", ref_end, "End of the network reference window");
  ingest->add_option("--min-trips", min_trips, "Trips needed in the reference window");
  ingest->add_option("--temperature-offset", weather_options.temperature_offset, "Added to temperature before log");
  ingest->add_option("--max-weather-gap", weather_options.max_gap_hours, "Longest weather gap filled forward");

  std::string panel_dir;
  auto* fit = app.add_subcommand("fit", "Fit the parametric and partial-likelihood estimators");
  add_common(*fit, common, false);
  fit->add_option("--panel", panel_dir, "Panel directory")->required();

  auto* test = app.add_subcommand("test", "Run the goodness-of-fit test");
  add_common(*test, common, false);
  test->add_option("--panel", panel_dir, "Panel directory")->required();
  test->add_flag("--no-clamp", flags.no_clamp, "Do not floor the edge fraction");
  test->add_option("--min-events", flags.min_events, "Minimum events per interval");

  int replications = 0;
  std::string c_grid;
  double level = 0.05;
  auto* power = app.add_subcommand("power", "Monte Carlo level and power of the test");
  add_common(*power, common, false);
  add_sim(*power, sim);
  power->add_option("--replications", replications, "Replications per scale")->required();
  power->add_option("--c-grid", c_grid, "Perturbation scales, comma separated");
  power->add_option("--level", level, "Nominal level")->check(CLI::Range(0.0, 1.0));
  power->add_flag("--no-clamp", flags.no_clamp, "Do not floor the edge fraction");
  power->add_option("--min-events", flags.min_events, "Minimum events per interval");

  bool density_only = false;
  auto* plots = app.add_subcommand("export-plots", "Write density and baseline curves as CSV");
  add_common(*plots, common, false);
  plots->add_option("--panel", panel_dir, "Panel directory")->required();
  plots->add_flag("--density-only", density_only, "Only write the event-time density");
  plots->add_flag("--no-clamp", flags.no_clamp, "Do not floor the edge fraction");
  plots->add_option("--min-events", flags.min_events, "Minimum events per interval");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*simulate) cmd_simulate(*simulate, common, sim);
    if (*ingest) {
      cmd_ingest(*ingest, common, trips, weather, distances, origin, ingest_horizon, ref_start, ref_end, min_trips,
                 weather_options);
    }
    if (*fit) cmd_fit(*fit, common, panel_dir);
    if (*test) cmd_test(*test, common, flags, panel_dir);
    if (*power) cmd_power(*power, common, sim, flags, replications, c_grid, level);
    if (*plots) cmd_export_plots(*plots, common, flags, panel_dir, density_only);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return 2;
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return 3;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
  return 0;
}

int run_cli(const std::vector<std::string>& args) {
  std::vector<const char*> argv{"nethaz"};
  for (const auto& a : args) argv.push_back(a.c_str());
  return run_cli(static_cast<int>(argv.size()), argv.data());
}

}  // namespace nethaz
