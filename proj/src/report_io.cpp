#include "nethaz/report_io.hpp"

#include <cstdio>
#include <fstream>

#include "nethaz/errors.hpp"
#include "nethaz/panel_io.hpp"

namespace nethaz {

using nlohmann::json;

json vector_to_json(const Vector& v) {
  json out = json::array();
  for (Index k = 0; k < v.size(); ++k) out.push_back(v[k]);
  return out;
}

Vector vector_from_json(const json& j) {
  Vector v(static_cast<Index>(j.size()));
  for (std::size_t k = 0; k < j.size(); ++k) v[static_cast<Index>(k)] = j[k].get<double>();
  return v;
}

namespace {

json interval_json(const Interval& iv) { return json::array({iv.lo, iv.hi}); }

json matrix_json(const Matrix& m) {
  json out = json::array();
  for (Index r = 0; r < m.rows(); ++r) out.push_back(vector_to_json(m.row(r).transpose()));
  return out;
}

std::string level_key(double level) {
  char buffer[32];
  std::snprintf(buffer, sizeof(buffer), "%.2f", level);
  return buffer;
}

}  // namespace

json to_json(const ParametricFit& fit) {
  return {{"theta_hat", vector_to_json(fit.theta_hat)},
          {"beta_hat", vector_to_json(fit.beta_hat)},
          {"loglik", fit.loglik},
          {"gradient_norm", fit.gradient_norm},
          {"converged", fit.converged},
          {"iterations", fit.iterations},
          {"status", fit.status},
          {"n_events", fit.event_count},
          {"standard_errors", vector_to_json(standard_errors(fit.information))},
          {"information", matrix_json(fit.information)}};
}

json to_json(const PartialFit& fit) {
  return {{"beta_tilde", vector_to_json(fit.beta_tilde)},
          {"partial_loglik", fit.partial_loglik},
          {"gradient_norm", fit.gradient_norm},
          {"converged", fit.converged},
          {"iterations", fit.iterations},
          {"flat", fit.flat},
          {"status", fit.status},
          {"n_events", fit.event_count},
          {"standard_errors", vector_to_json(standard_errors(fit.information))},
          {"information", matrix_json(fit.information)}};
}

json to_json(const TestReport& report) {
  json decisions = json::object();
  for (const auto& [level, reject] : report.reject_at) decisions[level_key(level)] = reject;
  return {{"t_n", report.T_n},
          {"a_hat", report.a_hat},
          {"A_n", report.A_n},
          {"B", report.B},
          {"h_hours", report.h},
          {"z", report.z},
          {"p_value", report.p_value},
          {"decisions", decisions},
          {"fit_interval", interval_json(report.fit_interval)},
          {"test_interval", interval_json(report.test_interval)},
          {"n_events_fit", report.n_events_fit},
          {"n_events_test", report.n_events_test},
          {"tie_adjustments", report.tie_adjustments},
          {"clamp_epsilon", report.clamp_epsilon},
          {"r_n", report.r_n},
          {"kernel", to_string(report.kernel)},
          {"k2", report.k2},
          {"weight", {{"inner", interval_json(report.weight.inner())}, {"ramp", report.weight.ramp()}}},
          {"grid_size", report.plug_in.grid.size()},
          {"parametric_fit", to_json(report.fit)},
          {"partial_fit", to_json(report.partial)}};
}

json to_json(const TruthRecord& truth) {
  return {{"theta0", vector_to_json(truth.theta0)},
          {"beta0", vector_to_json(truth.beta0)},
          {"c", truth.c},
          {"pilot_a_hat", truth.pilot_a_hat},
          {"pilot_h", truth.pilot_h},
          {"intensity_bound", truth.intensity_bound},
          {"seed", truth.seed},
          {"alpha0", {{"t", vector_to_json(truth.alpha0.grid.points())}, {"value", vector_to_json(truth.alpha0.values)}}}};
}

void write_curves_csv(const std::filesystem::path& path, const QuadratureGrid& grid,
                      const std::vector<std::pair<std::string, Vector>>& columns) {
  for (const auto& [name, values] : columns) {
    if (values.size() != grid.size()) throw std::invalid_argument("write_curves_csv: column '" + name + "' size mismatch");
  }
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << 't';
  for (const auto& column : columns) out << ',' << column.first;
  out << '\n';
  for (Index k = 0; k < grid.size(); ++k) {
    out << format_double(grid.point(k));
    for (const auto& column : columns) out << ',' << format_double(column.second[k]);
    out << '\n';
  }
}

void write_json(const std::filesystem::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

}  // namespace nethaz
