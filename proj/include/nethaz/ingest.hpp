#pragma once

// Bike-share ingestion: trips, hourly weather and pairwise biking times
// become a directed PairPanel with distance covariates and a 17-feature
// weather/diurnal baseline.

#include <cstddef>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "nethaz/core_model.hpp"

namespace nethaz {

/// Parses "YYYY-MM-DD[T| ]HH:MM[:SS[.fff]][Z]" (or a bare date) to hours
/// since 1970-01-01 00:00. Throws DataError on malformed input.
double parse_timestamp(const std::string& text);
/// Day of week of a timestamp in hours since 1970, 0 = Monday.
int weekday_of(double epoch_hours);

struct RowError {
  std::size_t line = 0;
  std::string message;
};

struct TripRecord {
  std::string start_station;
  std::string end_station;
  double start_time = 0.0;  // hours since 1970
};

struct WeatherRecord {
  double hour_start = 0.0;  // hours since 1970
  double temperature = 0.0;
  double precipitation = 0.0;
};

template <typename Record>
struct LoadResult {
  std::vector<Record> records;
  std::vector<RowError> errors;
};

using StationPair = std::pair<std::string, std::string>;
using DistanceTable = std::map<StationPair, double>;  // biking minutes

/// trips.csv: start_station,end_station,start_time
LoadResult<TripRecord> load_trips(const std::filesystem::path& path);
/// weather.csv: hour_start,temperature,precipitation
LoadResult<WeatherRecord> load_weather(const std::filesystem::path& path);
/// distances.csv: i,j,minutes
LoadResult<std::pair<StationPair, double>> load_distances(const std::filesystem::path& path);
DistanceTable distance_table(const std::vector<std::pair<StationPair, double>>& rows);

struct NetworkRule {
  double window_start = 0.0;  // hours since 1970
  double window_end = 0.0;
  int min_trips = 10;
};

/// Sorted station ids mapped to vertices 0..n-1.
class StationIndex {
 public:
  StationIndex() = default;
  explicit StationIndex(const std::vector<TripRecord>& trips);

  int size() const { return static_cast<int>(names_.size()); }
  int vertex(const std::string& station) const;  // -1 if unknown
  const std::string& name(int vertex) const { return names_.at(static_cast<std::size_t>(vertex)); }

 private:
  std::vector<std::string> names_;
  std::map<std::string, int> ids_;
};

/// Directed pairs (i != j) with at least `min_trips` trips starting within
/// [window_start, window_end).
std::set<PairKey> build_active_network(const std::vector<TripRecord>& trips, const NetworkRule& rule,
                                       const StationIndex& stations);

struct PanelBuild {
  PairPanel panel;
  Index dropped_inactive = 0;  // trips on pairs outside the network
  Index dropped_outside = 0;   // trips outside [0, T]
  Index tie_adjustments = 0;
};

/// Static network panel: edges on throughout, covariates (d, d^2) with d
/// the log biking minutes, events the trip start times in [0, horizon].
PanelBuild build_pair_panel(const std::vector<TripRecord>& trips, const std::set<PairKey>& network,
                            const DistanceTable& distances, const StationIndex& stations, double origin,
                            double horizon);

struct WeatherOptions {
  double temperature_offset = 0.0;  // added before taking the log
  double max_gap_hours = 3.0;       // longest gap filled forward
};

/// The 17-feature baseline: intercept, log temperature and its square,
/// precipitation and its square, sin/cos of three daily harmonics, and the
/// same six harmonics switched on only at weekends.
BaselineSpec build_baseline_features(const std::vector<WeatherRecord>& weather, double origin, double horizon,
                                     const WeatherOptions& options = {});

}  // namespace nethaz
