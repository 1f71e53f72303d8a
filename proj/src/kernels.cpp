#include "nethaz/kernels.hpp"

#include <algorithm>
#include <array>
#include <stdexcept>

namespace nethaz {

namespace {
constexpr int kPieceNodes = 4;
}

KernelShape parse_kernel_shape(std::string_view name) {
  if (name == "uniform") return KernelShape::uniform;
  if (name == "triangular") return KernelShape::triangular;
  if (name == "epanechnikov") return KernelShape::epanechnikov;
  throw std::invalid_argument("unknown kernel '" + std::string(name) + "'");
}

std::string to_string(KernelShape shape) {
  switch (shape) {
    case KernelShape::uniform:
      return "uniform";
    case KernelShape::triangular:
      return "triangular";
    case KernelShape::epanechnikov:
      return "epanechnikov";
  }
  return "unknown";
}

double kernel_at(const KernelSpec& kernel, double t, double s) {
  if (!(kernel.bandwidth > 0.0)) throw std::invalid_argument("kernel bandwidth must be positive");
  return kernel_profile(kernel.shape, (s - t) / kernel.bandwidth) / kernel.bandwidth;
}

double k2_constant(KernelShape shape) {
  // K is polynomial on [-1, 0] and [0, 1], so the autocorrelation
  // g(v) = int K(u + v) K(u) du is polynomial between the kinks u = -v and
  // u = 0, and g is polynomial in v on [0, 1] and [1, 2]. Gauss-Legendre on
  // those pieces is exact up to rounding.
  const auto& inner = gauss_legendre(6);
  const auto& outer = gauss_legendre(10);
  auto autocorrelation = [&](double v) {
    std::array<double, 4> cuts{-1.0, -v, 0.0, 1.0 - v};
    std::sort(cuts.begin(), cuts.end());
    double total = 0.0;
    for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
      const double a = std::max(cuts[k], -1.0);
      const double b = std::min(cuts[k + 1], 1.0 - v);
      if (b <= a) continue;
      const double half = 0.5 * (b - a);
      const double mid = 0.5 * (b + a);
      for (Index q = 0; q < inner.nodes.size(); ++q) {
        const double u = mid + half * inner.nodes[q];
        total += half * inner.weights[q] * kernel_profile(shape, u + v) * kernel_profile(shape, u);
      }
    }
    return total;
  };
  double total = 0.0;
  for (const auto& [a, b] : {std::pair{0.0, 1.0}, std::pair{1.0, 2.0}}) {
    const double half = 0.5 * (b - a);
    const double mid = 0.5 * (b + a);
    for (Index q = 0; q < outer.nodes.size(); ++q) {
      const double g = autocorrelation(mid + half * outer.nodes[q]);
      total += half * outer.weights[q] * g * g;
    }
  }
  return total;
}

double kernel_square_integral(KernelShape shape) {
  switch (shape) {
    case KernelShape::uniform:
      return 0.5;
    case KernelShape::triangular:
      return 2.0 / 3.0;
    case KernelShape::epanechnikov:
      return 0.6;
  }
  return 0.0;
}

// ---------------------------------------------------------------------------
// Weight function

WeightFunction::WeightFunction(Interval inner, double ramp) : inner_(inner), ramp_(ramp) {
  if (!(inner.hi > inner.lo)) throw std::invalid_argument("WeightFunction: empty inner interval");
  if (ramp < 0.0) throw std::invalid_argument("WeightFunction: negative ramp width");
}

WeightFunction WeightFunction::tapered(const Interval& range, double bandwidth) {
  if (!(range.length() > 4.0 * bandwidth)) {
    throw std::invalid_argument("WeightFunction::tapered: range must exceed four bandwidths");
  }
  return WeightFunction({range.lo + 2.0 * bandwidth, range.hi - 2.0 * bandwidth}, bandwidth);
}

double WeightFunction::operator()(double t) const {
  if (t >= inner_.lo && t <= inner_.hi) return 1.0;
  if (ramp_ == 0.0) return 0.0;
  const double distance = t < inner_.lo ? inner_.lo - t : t - inner_.hi;
  if (distance >= ramp_) return 0.0;
  const double u = 1.0 - distance / ramp_;
  return u * u * (3.0 - 2.0 * u);
}

std::vector<double> WeightFunction::breakpoints() const {
  if (ramp_ == 0.0) return {inner_.lo, inner_.hi};
  return {inner_.lo - ramp_, inner_.lo, inner_.hi, inner_.hi + ramp_};
}

double fn_weight(const KernelSpec& kernel, const WeightFunction& weight, double r, double s) {
  const double h = kernel.bandwidth;
  if (!(h > 0.0)) throw std::invalid_argument("kernel bandwidth must be positive");
  const auto support = weight.support();
  const double lo = std::max({r, s}) - h;
  const double hi = std::min({r, s}) + h;
  const Interval range{std::max(lo, support.lo), std::min(hi, support.hi)};
  if (!(range.hi > range.lo)) return 0.0;
  auto cuts = weight.breakpoints();
  cuts.push_back(r);
  cuts.push_back(s);
  auto integrand = [&](double t) {
    return kernel_profile(kernel.shape, (s - t) / h) * kernel_profile(kernel.shape, (r - t) / h) * weight(t) / h;
  };
  return integrate(integrand, range, kInfinity, cuts, 6);
}

// ---------------------------------------------------------------------------
// Smoothing

KernelSmoother::KernelSmoother(std::function<double(double)> f, const KernelSpec& kernel,
                               const QuadratureGrid& grid, std::span<const double> breakpoints)
    : f_(std::move(f)), kernel_(kernel), domain_(grid.range()) {
  if (!(kernel.bandwidth > 0.0)) throw std::invalid_argument("kernel bandwidth must be positive");
  edges_.reserve(static_cast<std::size_t>(grid.size()) + breakpoints.size());
  for (Index k = 0; k < grid.size(); ++k) edges_.push_back(grid.point(k));
  for (double b : breakpoints) {
    if (b > domain_.lo && b < domain_.hi) edges_.push_back(b);
  }
  std::sort(edges_.begin(), edges_.end());
  edges_.erase(std::unique(edges_.begin(), edges_.end()), edges_.end());

  const auto& rule = gauss_legendre(kPieceNodes);
  const auto pieces = static_cast<Index>(edges_.size()) - 1;
  nodes_.resize(kPieceNodes, pieces);
  weighted_values_.resize(kPieceNodes, pieces);
  for (Index p = 0; p < pieces; ++p) {
    const double a = edges_[static_cast<std::size_t>(p)];
    const double b = edges_[static_cast<std::size_t>(p + 1)];
    const double half = 0.5 * (b - a);
    const double mid = 0.5 * (b + a);
    for (Index q = 0; q < kPieceNodes; ++q) {
      const double x = mid + half * rule.nodes[q];
      nodes_(q, p) = x;
      weighted_values_(q, p) = half * rule.weights[q] * f_(x);
    }
  }
}

double KernelSmoother::piece_integral(double a, double b, double t) const {
  const auto& rule = gauss_legendre(kPieceNodes);
  const double half = 0.5 * (b - a);
  const double mid = 0.5 * (b + a);
  double total = 0.0;
  for (Index q = 0; q < kPieceNodes; ++q) {
    const double x = mid + half * rule.nodes[q];
    total += rule.weights[q] * kernel_at(kernel_, t, x) * f_(x);
  }
  return half * total;
}

double KernelSmoother::operator()(double t) const {
  const double h = kernel_.bandwidth;
  const double lo = std::max(domain_.lo, t - h);
  const double hi = std::min(domain_.hi, t + h);
  if (!(hi > lo)) return 0.0;
  auto it = std::upper_bound(edges_.begin(), edges_.end(), lo);
  auto p = std::max<std::ptrdiff_t>(0, (it - edges_.begin()) - 1);
  const auto pieces = static_cast<std::ptrdiff_t>(edges_.size()) - 1;
  double total = 0.0;
  for (; p < pieces && edges_[static_cast<std::size_t>(p)] < hi; ++p) {
    const double pa = edges_[static_cast<std::size_t>(p)];
    const double pb = edges_[static_cast<std::size_t>(p + 1)];
    const double a = std::max(pa, lo);
    const double b = std::min(pb, hi);
    if (!(b > a)) continue;
    const bool kink_inside = t > a && t < b;
    if (a == pa && b == pb && !kink_inside) {
      for (Index q = 0; q < kPieceNodes; ++q) {
        total += kernel_at(kernel_, t, nodes_(q, p)) * weighted_values_(q, p);
      }
    } else if (kink_inside) {
      total += piece_integral(a, t, t) + piece_integral(t, b, t);
    } else {
      total += piece_integral(a, b, t);
    }
  }
  return total;
}

BaselineCurve smooth_curve(const std::function<double(double)>& f, const KernelSpec& kernel,
                           const QuadratureGrid& grid, std::span<const double> breakpoints) {
  if (kernel.bandwidth > 0.5 * (grid.hi() - grid.lo())) {
    throw std::invalid_argument("smooth_curve: bandwidth exceeds half the smoothing range");
  }
  const KernelSmoother smoother(f, kernel, grid, breakpoints);
  return sample_curve(smoother, grid);
}

}  // namespace nethaz
