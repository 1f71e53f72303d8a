#pragma once

// BFGS ascent with backtracking line search for smooth log-likelihoods.

#include <Eigen/Dense>

#include <cmath>
#include <string>

#include "nethaz/core_model.hpp"

namespace nethaz {

struct OptimizerOptions {
  double gradient_tolerance = 1e-8;  // on the sup norm of the gradient
  int max_iterations = 200;
  double armijo = 1e-4;
  double backtrack = 0.5;
  int max_backtracks = 60;
};

struct OptimizerResult {
  Vector x;
  double value = 0.0;
  Vector gradient;
  double gradient_norm = 0.0;
  bool converged = false;
  int iterations = 0;
  std::string status;
};

/// Maximizes `objective(x, gradient)`, which returns the value and writes the
/// gradient. Steps satisfy the Armijo condition; when the value stops
/// resolving changes (near the optimum, in floating point) a step is also
/// accepted if it keeps the value within rounding and shrinks the
/// directional derivative.
template <typename Objective>
OptimizerResult maximize_bfgs(const Objective& objective, Vector x, const OptimizerOptions& options = {}) {
  const Index n = x.size();
  OptimizerResult result;
  Vector g(n);
  double f = objective(x, g);
  if (!std::isfinite(f) || !g.allFinite()) {
    result.x = x;
    result.value = f;
    result.gradient = g;
    result.gradient_norm = kInfinity;
    result.status = "objective not finite at the starting point";
    return result;
  }

  // Inverse Hessian approximation of the negated objective.
  Matrix inverse = Matrix::Identity(n, n);
  bool scaled = false;
  int iteration = 0;
  std::string status = "iteration limit reached";
  bool converged = false;

  while (true) {
    const double gnorm = n == 0 ? 0.0 : g.lpNorm<Eigen::Infinity>();
    if (gnorm < options.gradient_tolerance) {
      converged = true;
      status = "gradient tolerance reached";
      break;
    }
    if (iteration >= options.max_iterations) break;

    Vector direction = inverse * g;
    double slope = g.dot(direction);
    if (!(slope > 0.0)) {
      inverse.setIdentity();
      direction = g;
      slope = g.squaredNorm();
    }
    if (!scaled) {
      // First step: limit the move to unit length in the sup norm.
      const double len = direction.lpNorm<Eigen::Infinity>();
      if (len > 1.0) {
        direction /= len;
        slope /= len;
      }
    }

    double step = 1.0;
    Vector x_new(n);
    Vector g_new(n);
    double f_new = 0.0;
    bool accepted = false;
    const double tolerance = 1e-12 * (1.0 + std::abs(f));
    for (int k = 0; k < options.max_backtracks; ++k) {
      x_new = x + step * direction;
      f_new = objective(x_new, g_new);
      if (std::isfinite(f_new) && g_new.allFinite()) {
        if (f_new >= f + options.armijo * step * slope) {
          accepted = true;
          break;
        }
        const double new_slope = g_new.dot(direction);
        if (f_new >= f - tolerance && std::abs(new_slope) <= 0.9 * slope) {
          accepted = true;
          break;
        }
      }
      step *= options.backtrack;
    }
    if (!accepted) {
      status = "line search failed";
      break;
    }

    const Vector s = x_new - x;
    const Vector y = g - g_new;  // gradient change of the negated objective
    const double sy = s.dot(y);
    if (sy > 1e-14 * s.norm() * y.norm()) {
      if (!scaled) {
        inverse = Matrix::Identity(n, n) * (sy / y.squaredNorm());
        scaled = true;
      }
      const double rho = 1.0 / sy;
      const Matrix left = Matrix::Identity(n, n) - rho * s * y.transpose();
      inverse = left * inverse * left.transpose() + rho * s * s.transpose();
    }
    x = x_new;
    f = f_new;
    g = g_new;
    ++iteration;
  }

  result.x = std::move(x);
  result.value = f;
  result.gradient = g;
  result.gradient_norm = n == 0 ? 0.0 : g.lpNorm<Eigen::Infinity>();
  result.converged = converged;
  result.iterations = iteration;
  result.status = status;
  return result;
}

}  // namespace nethaz
