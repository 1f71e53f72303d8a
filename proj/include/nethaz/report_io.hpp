#pragma once

// JSON and CSV serialization of fits, test reports and simulation truth.

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "nethaz/estimators.hpp"
#include "nethaz/gof_test.hpp"
#include "nethaz/simulator.hpp"

namespace nethaz {

nlohmann::json vector_to_json(const Vector& v);
Vector vector_from_json(const nlohmann::json& j);

nlohmann::json to_json(const ParametricFit& fit);
nlohmann::json to_json(const PartialFit& fit);
nlohmann::json to_json(const TestReport& report);
nlohmann::json to_json(const TruthRecord& truth);

/// Writes `t` followed by one column per named curve. All curves must share
/// the grid.
void write_curves_csv(const std::filesystem::path& path, const QuadratureGrid& grid,
                      const std::vector<std::pair<std::string, Vector>>& columns);

void write_json(const std::filesystem::path& path, const nlohmann::json& j);
nlohmann::json read_json(const std::filesystem::path& path);

}  // namespace nethaz
