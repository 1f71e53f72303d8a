#include "nethaz/panel_io.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <sstream>

#include "nethaz/errors.hpp"

namespace nethaz {

namespace fs = std::filesystem;
using nlohmann::json;

std::string format_double(double x) {
  char buffer[64];
  const auto result = std::to_chars(buffer, buffer + sizeof(buffer), x);
  return {buffer, result.ptr};
}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

}  // namespace

double parse_double(std::string_view text, const std::string& context) {
  text = trim(text);
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  double value = 0.0;
  const auto result = std::from_chars(text.data(), text.data() + text.size(), value);
  if (text.empty() || result.ec != std::errc() || result.ptr != text.data() + text.size() || !std::isfinite(value)) {
    throw DataError(context + ": expected a number, got '" + std::string(text) + "'");
  }
  return value;
}

long long parse_integer(std::string_view text, const std::string& context) {
  text = trim(text);
  long long value = 0;
  const auto result = std::from_chars(text.data(), text.data() + text.size(), value);
  if (text.empty() || result.ec != std::errc() || result.ptr != text.data() + text.size()) {
    throw DataError(context + ": expected an integer, got '" + std::string(text) + "'");
  }
  return value;
}

CsvTable read_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  CsvTable table;
  std::string line;
  std::size_t number = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++number;
    if (trim(line).empty()) continue;
    std::vector<std::string> fields;
    std::size_t begin = 0;
    while (true) {
      const auto comma = line.find(',', begin);
      fields.emplace_back(trim(std::string_view(line).substr(begin, comma - begin)));
      if (comma == std::string::npos) break;
      begin = comma + 1;
    }
    if (!have_header) {
      if (!fields.empty() && fields[0].starts_with("\xEF\xBB\xBF")) fields[0].erase(0, 3);
      table.header = std::move(fields);
      have_header = true;
      continue;
    }
    if (fields.size() != table.header.size()) {
      throw DataError(path.string() + ":" + std::to_string(number) + ": expected " +
                      std::to_string(table.header.size()) + " fields, found " + std::to_string(fields.size()));
    }
    table.rows.push_back(std::move(fields));
    table.line_numbers.push_back(number);
  }
  if (!have_header) throw DataError(path.string() + ": missing header line");
  return table;
}

// ---------------------------------------------------------------------------
// model.json

namespace {

std::string feature_kind_name(BaselineFeature::Kind kind) {
  switch (kind) {
    case BaselineFeature::Kind::constant:
      return "constant";
    case BaselineFeature::Kind::system:
      return "system";
    case BaselineFeature::Kind::sine:
      return "sine";
    case BaselineFeature::Kind::cosine:
      return "cosine";
  }
  return "constant";
}

BaselineFeature::Kind parse_feature_kind(const std::string& name) {
  if (name == "constant") return BaselineFeature::Kind::constant;
  if (name == "system") return BaselineFeature::Kind::system;
  if (name == "sine") return BaselineFeature::Kind::sine;
  if (name == "cosine") return BaselineFeature::Kind::cosine;
  throw ConfigError("unknown baseline feature kind '" + name + "'");
}

void require_header(const CsvTable& table, const std::vector<std::string>& prefix, const fs::path& path) {
  if (table.header.size() < prefix.size() || !std::equal(prefix.begin(), prefix.end(), table.header.begin())) {
    std::string expected;
    for (const auto& p : prefix) expected += (expected.empty() ? "" : ",") + p;
    throw DataError(path.string() + ": header must start with " + expected);
  }
}

std::string where(const fs::path& path, const CsvTable& table, std::size_t row) {
  return path.filename().string() + ":" + std::to_string(table.line_numbers[row]);
}

}  // namespace

json baseline_to_json(const BaselineSpec& baseline) {
  json features = json::array();
  for (const auto& f : baseline.features) {
    json item{{"kind", feature_kind_name(f.kind)}};
    if (f.kind == BaselineFeature::Kind::system) {
      item["column"] = f.column;
      item["power"] = f.power;
    }
    if (f.kind == BaselineFeature::Kind::sine || f.kind == BaselineFeature::Kind::cosine) {
      item["multiple"] = f.multiple;
      item["period"] = f.period;
    }
    if (f.weekend_only) item["weekend_only"] = true;
    features.push_back(item);
  }
  return {{"features", features},
          {"calendar", {{"origin_weekday", baseline.calendar.origin_weekday},
                        {"origin_hour", baseline.calendar.origin_hour}}}};
}

BaselineSpec baseline_from_json(const json& j) {
  BaselineSpec spec;
  try {
    for (const auto& item : j.at("features")) {
      BaselineFeature f;
      f.kind = parse_feature_kind(item.at("kind").get<std::string>());
      f.column = item.value("column", 0);
      f.power = item.value("power", 1);
      f.multiple = item.value("multiple", 1);
      f.period = item.value("period", 24.0);
      f.weekend_only = item.value("weekend_only", false);
      spec.features.push_back(f);
    }
    if (j.contains("calendar")) {
      spec.calendar.origin_weekday = j["calendar"].value("origin_weekday", 0);
      spec.calendar.origin_hour = j["calendar"].value("origin_hour", 0.0);
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("invalid baseline description: ") + e.what());
  }
  return spec;
}

json model_to_json(const PairPanel& panel, const ModelSpec& model) {
  return {{"n_vertices", panel.n_vertices},
          {"directed", panel.directed},
          {"horizon", panel.horizon},
          {"link", {{"kind", "exp_linear"}, {"dimension", model.link.dimension}}},
          {"baseline", baseline_to_json(model.baseline)}};
}

// ---------------------------------------------------------------------------

void write_panel(const fs::path& dir, const PairPanel& panel, const ModelSpec& model) {
  fs::create_directories(dir);
  auto open = [&](const char* name) {
    std::ofstream out(dir / name);
    if (!out) throw DataError("cannot write " + (dir / name).string());
    return out;
  };
  const auto T = panel.horizon;

  {
    std::vector<std::pair<double, PairKey>> events;
    for (const auto& pair : panel.pairs) {
      for (double t : pair.events) events.emplace_back(t, pair.key);
    }
    std::stable_sort(events.begin(), events.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    auto out = open("events.csv");
    out << "t,i,j\n";
    for (const auto& [t, key] : events) out << format_double(t) << ',' << key.i << ',' << key.j << '\n';
  }
  {
    auto out = open("edges.csv");
    out << "i,j,t_on,t_off\n";
    for (const auto& pair : panel.pairs) {
      const auto& edge = pair.edge;
      for (Index k = 0; k < edge.segment_count(); ++k) {
        if (edge.values()(0, k) != 1.0) continue;
        const double lo = edge.breakpoints()[static_cast<std::size_t>(k)];
        const double hi = edge.segment_end(k, T);
        out << pair.key.i << ',' << pair.key.j << ',' << format_double(lo) << ',' << format_double(hi) << '\n';
      }
    }
  }
  {
    const Index p = panel.covariate_dimension();
    auto out = open("pair_covariates.csv");
    out << "i,j,t";
    for (Index k = 0; k < p; ++k) out << ",x" << k + 1;
    out << '\n';
    for (const auto& pair : panel.pairs) {
      const auto& cov = pair.covariates;
      for (Index k = 0; k < cov.segment_count(); ++k) {
        out << pair.key.i << ',' << pair.key.j << ',' << format_double(cov.breakpoints()[static_cast<std::size_t>(k)]);
        for (Index c = 0; c < p; ++c) out << ',' << format_double(cov.values()(c, k));
        out << '\n';
      }
    }
  }
  {
    const auto& path = model.baseline.system.path;
    auto out = open("system_covariates.csv");
    out << 't';
    for (Index k = 0; k < path.dimension(); ++k) out << ",z" << k + 1;
    out << '\n';
    for (Index k = 0; k < path.segment_count(); ++k) {
      out << format_double(path.breakpoints()[static_cast<std::size_t>(k)]);
      for (Index c = 0; c < path.dimension(); ++c) out << ',' << format_double(path.values()(c, k));
      out << '\n';
    }
  }
  {
    auto out = open("model.json");
    out << model_to_json(panel, model).dump(2) << '\n';
  }
}

namespace {

PiecewisePath path_from_rows(std::vector<std::pair<double, Vector>> rows, Index dimension, const std::string& what) {
  std::stable_sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  if (rows.empty() || rows.front().first != 0.0) throw DataError(what + ": path must start at t = 0");
  std::vector<double> knots;
  Matrix values(dimension, static_cast<Index>(rows.size()));
  for (std::size_t k = 0; k < rows.size(); ++k) {
    if (k > 0 && rows[k].first == rows[k - 1].first) throw DataError(what + ": duplicate step time");
    knots.push_back(rows[k].first);
    values.col(static_cast<Index>(k)) = rows[k].second;
  }
  return {std::move(knots), std::move(values)};
}

}  // namespace

PanelBundle read_panel(const fs::path& dir, Index* tie_adjustments) {
  PanelBundle bundle;
  auto& panel = bundle.panel;
  json meta;
  {
    std::ifstream in(dir / "model.json");
    if (!in) throw DataError("cannot open " + (dir / "model.json").string());
    try {
      meta = json::parse(in);
      panel.n_vertices = meta.at("n_vertices").get<int>();
      panel.directed = meta.at("directed").get<bool>();
      panel.horizon = meta.at("horizon").get<double>();
      bundle.model.link.dimension = meta.at("link").at("dimension").get<Index>();
      if (meta.at("link").value("kind", "exp_linear") != "exp_linear") throw ConfigError("unsupported link kind");
    } catch (const json::exception& e) {
      throw DataError(std::string("model.json: ") + e.what());
    }
    bundle.model.baseline = baseline_from_json(meta.at("baseline"));
    bundle.model.baseline.horizon = panel.horizon;
  }
  const Index p = bundle.model.link.dimension;
  const double T = panel.horizon;

  auto key_of = [&](const std::string& i, const std::string& j, const std::string& ctx) {
    const auto a = parse_integer(i, ctx);
    const auto b = parse_integer(j, ctx);
    if (a < 0 || b < 0 || a >= panel.n_vertices || b >= panel.n_vertices) {
      throw DataError(ctx + ": vertex id out of range");
    }
    return canonical_key({static_cast<int>(a), static_cast<int>(b)}, panel.directed);
  };

  std::map<PairKey, std::vector<std::pair<double, Vector>>> covariate_rows;
  {
    const auto path = dir / "pair_covariates.csv";
    const auto table = read_csv(path);
    require_header(table, {"i", "j", "t"}, path);
    if (static_cast<Index>(table.header.size()) != 3 + p) {
      throw DataError(path.string() + ": covariate columns differ from the link dimension");
    }
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
      const auto ctx = where(path, table, r);
      const auto& row = table.rows[r];
      Vector x(p);
      for (Index c = 0; c < p; ++c) x[c] = parse_double(row[static_cast<std::size_t>(3 + c)], ctx);
      covariate_rows[key_of(row[0], row[1], ctx)].emplace_back(parse_double(row[2], ctx), x);
    }
  }
  std::map<PairKey, std::vector<Interval>> edge_rows;
  {
    const auto path = dir / "edges.csv";
    const auto table = read_csv(path);
    require_header(table, {"i", "j", "t_on", "t_off"}, path);
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
      const auto ctx = where(path, table, r);
      const auto& row = table.rows[r];
      const Interval iv{parse_double(row[2], ctx), parse_double(row[3], ctx)};
      if (!(iv.lo < iv.hi) || iv.lo < 0.0) throw DataError(ctx + ": on-interval must satisfy 0 <= t_on < t_off");
      edge_rows[key_of(row[0], row[1], ctx)].push_back(iv);
    }
  }
  std::map<PairKey, std::vector<double>> event_rows;
  {
    const auto path = dir / "events.csv";
    const auto table = read_csv(path);
    require_header(table, {"t", "i", "j"}, path);
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
      const auto ctx = where(path, table, r);
      const auto& row = table.rows[r];
      event_rows[key_of(row[1], row[2], ctx)].push_back(parse_double(row[0], ctx));
    }
  }
  {
    const auto path = dir / "system_covariates.csv";
    if (fs::exists(path)) {
      const auto table = read_csv(path);
      require_header(table, {"t"}, path);
      const auto d = static_cast<Index>(table.header.size()) - 1;
      std::vector<std::pair<double, Vector>> rows;
      for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const auto ctx = where(path, table, r);
        Vector z(d);
        for (Index c = 0; c < d; ++c) z[c] = parse_double(table.rows[r][static_cast<std::size_t>(1 + c)], ctx);
        rows.emplace_back(parse_double(table.rows[r][0], ctx), z);
      }
      if (!rows.empty()) bundle.model.baseline.system.path = path_from_rows(std::move(rows), d, path.string());
    }
  }

  std::map<PairKey, PairRecord> records;
  auto record = [&](PairKey key) -> PairRecord& {
    auto [it, inserted] = records.try_emplace(key);
    if (inserted) it->second.key = key;
    return it->second;
  };
  for (auto& [key, rows] : covariate_rows) {
    record(key).covariates = path_from_rows(std::move(rows), p, "pair_covariates.csv");
  }
  for (auto& [key, intervals] : edge_rows) {
    std::sort(intervals.begin(), intervals.end(), [](const Interval& a, const Interval& b) { return a.lo < b.lo; });
    record(key).edge = PiecewisePath::edge_indicator(intervals, T);
  }
  for (auto& [key, times] : event_rows) {
    std::sort(times.begin(), times.end());
    record(key).events = std::move(times);
  }
  for (auto& [key, rec] : records) {
    if (rec.edge.segment_count() == 0) rec.edge = PiecewisePath::constant(0.0);
    if (rec.covariates.segment_count() == 0) {
      if (p > 0) throw DataError("pair (" + std::to_string(key.i) + "," + std::to_string(key.j) + ") has no covariates");
      rec.covariates = PiecewisePath::constant(Vector(0));
    }
    panel.pairs.push_back(std::move(rec));
  }
  const auto ties = resolve_ties(panel);
  if (ties > 0) warn("adjusted " + std::to_string(ties) + " tied event times");
  if (tie_adjustments) *tie_adjustments = ties;
  return bundle;
}

}  // namespace nethaz
