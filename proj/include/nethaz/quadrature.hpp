#pragma once

#include <Eigen/Dense>

#include <functional>
#include <span>
#include <vector>

#include "nethaz/core_model.hpp"

namespace nethaz {

/// Gauss-Legendre rule on [-1, 1].
struct GaussRule {
  Vector nodes;
  Vector weights;
};

/// m-point Gauss-Legendre rule (Golub-Welsch). Cached for repeated use.
const GaussRule& gauss_legendre(int points);

/// Uniform grid of `size` points covering [lo, hi] exactly.
class QuadratureGrid {
 public:
  QuadratureGrid() = default;
  QuadratureGrid(double lo, double hi, Index size);

  double lo() const { return lo_; }
  double hi() const { return hi_; }
  Index size() const { return size_; }
  double spacing() const { return (hi_ - lo_) / static_cast<double>(size_ - 1); }
  double point(Index k) const { return k == size_ - 1 ? hi_ : lo_ + static_cast<double>(k) * spacing(); }
  Vector points() const;
  Interval range() const { return {lo_, hi_}; }

  /// Grid with the same range and `factor` times as many cells.
  QuadratureGrid refined(Index factor) const { return {lo_, hi_, (size_ - 1) * factor + 1}; }

  bool operator==(const QuadratureGrid&) const = default;

 private:
  double lo_ = 0.0;
  double hi_ = 1.0;
  Index size_ = 2;
};

enum class CurveKind { nelson_aalen, parametric_smoothed, parametric_raw, true_sim, other };

/// A function of time sampled on a quadrature grid.
struct BaselineCurve {
  QuadratureGrid grid;
  Vector values;
  CurveKind kind = CurveKind::other;
};

template <typename F>
BaselineCurve sample_curve(const F& f, const QuadratureGrid& grid, CurveKind kind = CurveKind::other) {
  BaselineCurve curve{grid, Vector(grid.size()), kind};
  for (Index k = 0; k < grid.size(); ++k) curve.values[k] = f(grid.point(k));
  return curve;
}

/// Composite trapezoid rule for values sampled on `grid`.
template <typename Derived>
double trapezoid(const Eigen::MatrixBase<Derived>& values, const QuadratureGrid& grid) {
  const Index n = values.size();
  if (n != grid.size()) throw std::invalid_argument("trapezoid: sample count differs from grid size");
  return grid.spacing() * (values.sum() - 0.5 * (values(0) + values(n - 1)));
}

/// Partition of [lo, hi] into pieces no wider than `max_width`, additionally
/// cut at `breakpoints`. Pieces never straddle a breakpoint.
std::vector<double> piece_edges(const Interval& range, double max_width, std::span<const double> breakpoints);

/// Composite Gauss-Legendre integral of f over [lo, hi] using pieces from
/// piece_edges and `points` nodes per piece.
double integrate(const std::function<double(double)>& f, const Interval& range, double max_width,
                 std::span<const double> breakpoints = {}, int points = 4);

}  // namespace nethaz
