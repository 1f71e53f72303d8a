#pragma once

// Four-file CSV panel format plus model.json:
//   events.csv            t,i,j
//   edges.csv             i,j,t_on,t_off        one row per on-interval
//   pair_covariates.csv   i,j,t,x1..xp          one row per covariate step
//   system_covariates.csv t,z1..zd
//   model.json            panel metadata, link and baseline feature map

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "nethaz/core_model.hpp"

namespace nethaz {

/// Shortest decimal representation that parses back to the same double.
std::string format_double(double x);
/// Strict double parser; throws DataError naming `context` on failure.
double parse_double(std::string_view text, const std::string& context);
long long parse_integer(std::string_view text, const std::string& context);

/// Minimal CSV table: header plus rows of raw fields.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> line_numbers;  // 1-based source line of each row
};

/// Reads a comma-separated file with a header line. Blank lines are
/// skipped; rows whose width differs from the header raise DataError.
CsvTable read_csv(const std::filesystem::path& path);

struct PanelBundle {
  PairPanel panel;
  ModelSpec model;
};

nlohmann::json baseline_to_json(const BaselineSpec& baseline);
BaselineSpec baseline_from_json(const nlohmann::json& j);
nlohmann::json model_to_json(const PairPanel& panel, const ModelSpec& model);

/// Writes the five panel files into `dir`, creating it if needed.
void write_panel(const std::filesystem::path& dir, const PairPanel& panel, const ModelSpec& model);

/// Reads a panel written by write_panel (or assembled by hand). Events are
/// tie-adjusted; the number of adjustments is returned in `tie_adjustments`.
PanelBundle read_panel(const std::filesystem::path& dir, Index* tie_adjustments = nullptr);

}  // namespace nethaz
