#include "nethaz/quadrature.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>

namespace nethaz {

const GaussRule& gauss_legendre(int points) {
  if (points < 1) throw std::invalid_argument("gauss_legendre: at least one node required");
  static std::mutex mutex;
  static std::map<int, GaussRule> cache;
  std::lock_guard lock(mutex);
  if (auto it = cache.find(points); it != cache.end()) return it->second;

  // Jacobi matrix of the Legendre recurrence.
  Matrix jacobi = Matrix::Zero(points, points);
  for (int k = 1; k < points; ++k) {
    const double b = k / std::sqrt(4.0 * k * k - 1.0);
    jacobi(k, k - 1) = b;
    jacobi(k - 1, k) = b;
  }
  Eigen::SelfAdjointEigenSolver<Matrix> solver(jacobi);
  GaussRule rule{solver.eigenvalues(), 2.0 * solver.eigenvectors().row(0).transpose().array().square().matrix()};
  return cache.emplace(points, std::move(rule)).first->second;
}

QuadratureGrid::QuadratureGrid(double lo, double hi, Index size) : lo_(lo), hi_(hi), size_(size) {
  if (size < 2) throw std::invalid_argument("QuadratureGrid: at least two points required");
  if (!(hi > lo)) throw std::invalid_argument("QuadratureGrid: empty range");
}

Vector QuadratureGrid::points() const {
  Vector out(size_);
  for (Index k = 0; k < size_; ++k) out[k] = point(k);
  return out;
}

std::vector<double> piece_edges(const Interval& range, double max_width, std::span<const double> breakpoints) {
  std::vector<double> cuts{range.lo, range.hi};
  for (double b : breakpoints) {
    if (b > range.lo && b < range.hi) cuts.push_back(b);
  }
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  std::vector<double> edges{cuts.front()};
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
    const double a = cuts[k];
    const double b = cuts[k + 1];
    const auto pieces = std::max<long>(1, static_cast<long>(std::ceil((b - a) / max_width - 1e-9)));
    for (long m = 1; m < pieces; ++m) edges.push_back(a + (b - a) * static_cast<double>(m) / static_cast<double>(pieces));
    edges.push_back(b);
  }
  return edges;
}

double integrate(const std::function<double(double)>& f, const Interval& range, double max_width,
                 std::span<const double> breakpoints, int points) {
  if (!(range.hi > range.lo)) return 0.0;
  const auto& rule = gauss_legendre(points);
  const auto edges = piece_edges(range, max_width, breakpoints);
  double total = 0.0;
  for (std::size_t k = 0; k + 1 < edges.size(); ++k) {
    const double half = 0.5 * (edges[k + 1] - edges[k]);
    const double mid = 0.5 * (edges[k + 1] + edges[k]);
    double piece = 0.0;
    for (Index q = 0; q < rule.nodes.size(); ++q) piece += rule.weights[q] * f(mid + half * rule.nodes[q]);
    total += half * piece;
  }
  return total;
}

}  // namespace nethaz
