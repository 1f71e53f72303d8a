#include "nethaz/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>

#include "nethaz/errors.hpp"
#include "nethaz/panel_io.hpp"

namespace nethaz {

namespace fs = std::filesystem;

namespace {

int digits(const std::string& s, std::size_t pos, std::size_t count) {
  if (pos + count > s.size()) throw DataError("malformed timestamp '" + s + "'");
  int value = 0;
  const auto result = std::from_chars(s.data() + pos, s.data() + pos + count, value);
  if (result.ec != std::errc() || result.ptr != s.data() + pos + count) {
    throw DataError("malformed timestamp '" + s + "'");
  }
  return value;
}

void require_char(const std::string& s, std::size_t pos, const char* allowed) {
  if (pos >= s.size() || std::string_view(allowed).find(s[pos]) == std::string_view::npos) {
    throw DataError("malformed timestamp '" + s + "'");
  }
}

}  // namespace

double parse_timestamp(const std::string& raw) {
  std::string s(raw);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\r')) s.pop_back();
  while (!s.empty() && s.front() == ' ') s.erase(0, 1);
  if (!s.empty() && s.front() == '"' && s.back() == '"' && s.size() >= 2) s = s.substr(1, s.size() - 2);
  if (!s.empty() && s.back() == 'Z') s.pop_back();

  const int year = digits(s, 0, 4);
  require_char(s, 4, "-");
  const int month = digits(s, 5, 2);
  require_char(s, 7, "-");
  const int day = digits(s, 8, 2);
  int hour = 0, minute = 0;
  double second = 0.0;
  if (s.size() > 10) {
    require_char(s, 10, "T ");
    hour = digits(s, 11, 2);
    require_char(s, 13, ":");
    minute = digits(s, 14, 2);
    if (s.size() > 16) {
      require_char(s, 16, ":");
      second = parse_double(std::string_view(s).substr(17), "timestamp '" + s + "'");
    }
  }
  using namespace std::chrono;
  const year_month_day ymd{std::chrono::year{year}, std::chrono::month{static_cast<unsigned>(month)},
                           std::chrono::day{static_cast<unsigned>(day)}};
  if (!ymd.ok() || hour > 23 || minute > 59 || second < 0.0 || second >= 61.0) {
    throw DataError("invalid timestamp '" + raw + "'");
  }
  const auto days = sys_days(ymd).time_since_epoch().count();
  return 24.0 * static_cast<double>(days) + hour + minute / 60.0 + second / 3600.0;
}

int weekday_of(double epoch_hours) {
  const auto days = static_cast<long long>(std::floor(epoch_hours / 24.0));
  // 1970-01-01 was a Thursday.
  return static_cast<int>(((days + 3) % 7 + 7) % 7);
}

namespace {

template <typename Record, typename Parse>
LoadResult<Record> load_rows(const fs::path& path, const std::vector<std::string>& header, Parse parse) {
  const auto table = read_csv(path);
  if (table.header != header) {
    std::string expected;
    for (const auto& h : header) expected += (expected.empty() ? "" : ",") + h;
    throw DataError(path.string() + ": header must be " + expected);
  }
  LoadResult<Record> result;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    try {
      result.records.push_back(parse(table.rows[r]));
    } catch (const DataError& e) {
      result.errors.push_back({table.line_numbers[r], e.what()});
    }
  }
  if (table.rows.empty()) warn(path.string() + " contains no rows");
  return result;
}

}  // namespace

LoadResult<TripRecord> load_trips(const fs::path& path) {
  return load_rows<TripRecord>(path, {"start_station", "end_station", "start_time"}, [](const auto& row) {
    if (row[0].empty() || row[1].empty()) throw DataError("empty station id");
    return TripRecord{row[0], row[1], parse_timestamp(row[2])};
  });
}

LoadResult<WeatherRecord> load_weather(const fs::path& path) {
  return load_rows<WeatherRecord>(path, {"hour_start", "temperature", "precipitation"}, [](const auto& row) {
    WeatherRecord w{parse_timestamp(row[0]), parse_double(row[1], "temperature"),
                    parse_double(row[2], "precipitation")};
    if (w.precipitation < 0.0) throw DataError("negative precipitation");
    return w;
  });
}

LoadResult<std::pair<StationPair, double>> load_distances(const fs::path& path) {
  return load_rows<std::pair<StationPair, double>>(path, {"i", "j", "minutes"}, [](const auto& row) {
    const double minutes = parse_double(row[2], "minutes");
    if (!(minutes > 0.0)) throw DataError("biking minutes must be positive");
    return std::pair{StationPair{row[0], row[1]}, minutes};
  });
}

DistanceTable distance_table(const std::vector<std::pair<StationPair, double>>& rows) {
  DistanceTable table;
  for (const auto& [key, minutes] : rows) table[key] = minutes;
  return table;
}

StationIndex::StationIndex(const std::vector<TripRecord>& trips) {
  std::set<std::string> names;
  for (const auto& trip : trips) {
    names.insert(trip.start_station);
    names.insert(trip.end_station);
  }
  names_.assign(names.begin(), names.end());
  for (std::size_t k = 0; k < names_.size(); ++k) ids_[names_[k]] = static_cast<int>(k);
}

int StationIndex::vertex(const std::string& station) const {
  const auto it = ids_.find(station);
  return it == ids_.end() ? -1 : it->second;
}

std::set<PairKey> build_active_network(const std::vector<TripRecord>& trips, const NetworkRule& rule,
                                       const StationIndex& stations) {
  std::map<PairKey, int> counts;
  for (const auto& trip : trips) {
    if (trip.start_time < rule.window_start || trip.start_time >= rule.window_end) continue;
    const PairKey key{stations.vertex(trip.start_station), stations.vertex(trip.end_station)};
    if (key.i < 0 || key.j < 0 || key.i == key.j) continue;
    ++counts[key];
  }
  std::set<PairKey> network;
  for (const auto& [key, count] : counts) {
    if (count >= rule.min_trips) network.insert(key);
  }
  return network;
}

PanelBuild build_pair_panel(const std::vector<TripRecord>& trips, const std::set<PairKey>& network,
                            const DistanceTable& distances, const StationIndex& stations, double origin,
                            double horizon) {
  PanelBuild build;
  auto& panel = build.panel;
  panel.n_vertices = stations.size();
  panel.directed = true;
  panel.horizon = horizon;

  std::map<PairKey, std::size_t> slot;
  for (const auto& key : network) {
    const auto it = distances.find({stations.name(key.i), stations.name(key.j)});
    if (it == distances.end()) {
      throw DataError("missing distance for active pair " + stations.name(key.i) + " -> " + stations.name(key.j));
    }
    const double d = std::log(it->second);
    PairRecord record;
    record.key = key;
    record.edge = PiecewisePath::constant(1.0);
    Vector x(2);
    x << d, d * d;
    record.covariates = PiecewisePath::constant(x);
    slot[key] = panel.pairs.size();
    panel.pairs.push_back(std::move(record));
  }

  for (const auto& trip : trips) {
    const double t = trip.start_time - origin;
    if (t < 0.0 || t > horizon) {
      ++build.dropped_outside;
      continue;
    }
    const PairKey key{stations.vertex(trip.start_station), stations.vertex(trip.end_station)};
    const auto it = slot.find(key);
    if (it == slot.end()) {
      ++build.dropped_inactive;
      continue;
    }
    panel.pairs[it->second].events.push_back(t);
  }
  for (auto& pair : panel.pairs) std::sort(pair.events.begin(), pair.events.end());
  build.tie_adjustments = resolve_ties(panel);
  if (build.tie_adjustments > 0) warn("adjusted " + std::to_string(build.tie_adjustments) + " tied trip times");
  return build;
}

BaselineSpec build_baseline_features(const std::vector<WeatherRecord>& weather, double origin, double horizon,
                                     const WeatherOptions& options) {
  std::vector<WeatherRecord> rows = weather;
  std::stable_sort(rows.begin(), rows.end(),
                   [](const WeatherRecord& a, const WeatherRecord& b) { return a.hour_start < b.hour_start; });

  // Last record at or before the origin supplies the value at t = 0.
  auto first = std::upper_bound(rows.begin(), rows.end(), origin,
                                [](double t, const WeatherRecord& w) { return t < w.hour_start; });
  if (first == rows.begin()) throw DataError("weather data starts after the study origin");
  --first;

  std::vector<double> knots;
  std::vector<Vector> values;
  double previous = first->hour_start;
  for (auto it = first; it != rows.end() && it->hour_start - origin < horizon; ++it) {
    if (it->hour_start - previous > 1.0 + options.max_gap_hours) {
      throw DataError("weather gap longer than " + std::to_string(options.max_gap_hours) + " hours");
    }
    previous = it->hour_start;
    const double temperature = it->temperature + options.temperature_offset;
    if (!(temperature > 0.0)) {
      throw DataError("log-temperature undefined for temperature " + std::to_string(it->temperature) +
                      "; set a temperature offset that makes all values positive");
    }
    Vector z(2);
    z << std::log(temperature), it->precipitation;
    const double t = std::max(0.0, it->hour_start - origin);
    if (!knots.empty() && knots.back() == t) {
      values.back() = z;
    } else {
      knots.push_back(t);
      values.push_back(z);
    }
  }
  if (origin + horizon - previous > 1.0 + options.max_gap_hours) {
    throw DataError("weather data ends before the study horizon");
  }
  Matrix m(2, static_cast<Index>(values.size()));
  for (std::size_t k = 0; k < values.size(); ++k) m.col(static_cast<Index>(k)) = values[k];

  BaselineSpec spec;
  spec.system.path = PiecewisePath(std::move(knots), std::move(m));
  spec.horizon = horizon;
  spec.calendar.origin_weekday = weekday_of(origin);
  spec.calendar.origin_hour = origin - 24.0 * std::floor(origin / 24.0);
  using Kind = BaselineFeature::Kind;
  spec.features.push_back(BaselineFeature::intercept());
  spec.features.push_back(BaselineFeature::system_column(0, 1));
  spec.features.push_back(BaselineFeature::system_column(0, 2));
  spec.features.push_back(BaselineFeature::system_column(1, 1));
  spec.features.push_back(BaselineFeature::system_column(1, 2));
  for (bool weekend : {false, true}) {
    for (Kind kind : {Kind::sine, Kind::cosine}) {
      for (int k = 1; k <= 3; ++k) spec.features.push_back(BaselineFeature::harmonic(kind, k, 24.0, weekend));
    }
  }
  return spec;
}

}  // namespace nethaz
