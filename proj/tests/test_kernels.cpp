#include <doctest.h>

#include <cmath>
#include <random>

#include "nethaz/kernels.hpp"
#include "nethaz/quadrature.hpp"

using namespace nethaz;

namespace {

// Nested midpoint rule for K2 with N cells per unit, independent of the
// library implementation.
double k2_midpoint(KernelShape shape, int n) {
  const double du = 1.0 / n;
  double total = 0.0;
  for (int iv = 0; iv < 2 * n; ++iv) {
    const double v = (iv + 0.5) * du;
    double g = 0.0;
    for (int iu = 0; iu < 2 * n; ++iu) {
      const double u = -1.0 + (iu + 0.5) * du;
      g += kernel_profile(shape, u + v) * kernel_profile(shape, u) * du;
    }
    total += g * g * du;
  }
  return total;
}

}  // namespace

TEST_CASE("kernel values") {
  const KernelSpec tri{KernelShape::triangular, 2.0};
  CHECK(kernel_at(tri, 0.0, 1.0) == 0.25);
  CHECK(kernel_at(tri, 0.0, 2.0) == 0.0);
  CHECK(kernel_at(tri, 0.0, 3.0) == 0.0);
  CHECK(kernel_at({KernelShape::uniform, 1.0}, 0.0, 0.999) == 0.5);
  CHECK(kernel_at({KernelShape::epanechnikov, 1.0}, 0.0, 0.0) == 0.75);
  CHECK_THROWS_AS(kernel_at({KernelShape::triangular, 0.0}, 0.0, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(kernel_at({KernelShape::triangular, -1.0}, 0.0, 0.0), std::invalid_argument);
  CHECK(parse_kernel_shape("epanechnikov") == KernelShape::epanechnikov);
  CHECK_THROWS_AS(parse_kernel_shape("gaussian"), std::invalid_argument);
}

TEST_CASE("kernels have unit mass") {
  for (auto shape : {KernelShape::uniform, KernelShape::triangular, KernelShape::epanechnikov}) {
    const KernelSpec k{shape, 1.7};
    const double mass = integrate([&](double s) { return kernel_at(k, 3.0, s); }, {0.0, 6.0}, 0.25,
                                  std::vector<double>{1.3, 3.0, 4.7});
    CHECK(mass == doctest::Approx(1.0).epsilon(1e-12));
    const double sq = integrate([&](double u) { return std::pow(kernel_profile(shape, u), 2); }, {-1.0, 1.0}, 0.5,
                                std::vector<double>{0.0});
    CHECK(sq == doctest::Approx(kernel_square_integral(shape)).epsilon(1e-12));
  }
}

TEST_CASE("K2 constants") {
  CHECK(k2_constant(KernelShape::uniform) == doctest::Approx(1.0 / 6.0).epsilon(1e-12));
  CHECK(k2_constant(KernelShape::triangular) == doctest::Approx(151.0 / 630.0).epsilon(1e-12));
  CHECK(k2_constant(KernelShape::epanechnikov) == doctest::Approx(167.0 / 770.0).epsilon(1e-12));
  // Independent nested midpoint rule converges to the same values. The
  // uniform kernel is discontinuous, so its midpoint error is first order.
  CHECK(k2_midpoint(KernelShape::uniform, 800) == doctest::Approx(1.0 / 6.0).epsilon(2e-3));
  for (auto shape : {KernelShape::triangular, KernelShape::epanechnikov}) {
    const double coarse = k2_midpoint(shape, 400);
    const double fine = k2_midpoint(shape, 800);
    CHECK(std::abs(fine - coarse) < 1e-5);
    CHECK(fine == doctest::Approx(k2_constant(shape)).epsilon(1e-5));
  }
}

TEST_CASE("weight function") {
  const WeightFunction w({2.0, 8.0}, 1.0);
  CHECK(w(1.0) == 0.0);
  CHECK(w(2.0) == 1.0);
  CHECK(w(5.0) == 1.0);
  CHECK(w(9.0) == 0.0);
  CHECK(w(1.5) == doctest::Approx(0.5));
  // C1 at the joins.
  const double e = 1e-7;
  CHECK((w(2.0) - w(2.0 - e)) / e == doctest::Approx(0.0).epsilon(1e-5));
  CHECK((w(1.0 + e) - w(1.0)) / e == doctest::Approx(0.0).epsilon(1e-5));
  const double area = integrate(w, {0.0, 10.0}, 0.25, w.breakpoints());
  CHECK(area == doctest::Approx(w.integral()).epsilon(1e-13));

  const auto tapered = WeightFunction::tapered({0.0, 20.0}, 2.0);
  CHECK(tapered.inner() == Interval{4.0, 16.0});
  CHECK(tapered(2.0) == 0.0);
  CHECK(tapered(18.0) == 0.0);
  CHECK_THROWS_AS(WeightFunction::tapered({0.0, 8.0}, 2.0), std::invalid_argument);
}

TEST_CASE("f_n weight") {
  const WeightFunction w({0.0, 100.0}, 0.0);
  CHECK(fn_weight({KernelShape::uniform, 1.0}, w, 50.0, 50.0) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(fn_weight({KernelShape::triangular, 1.5}, w, 50.0, 50.0) == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  CHECK(fn_weight({KernelShape::triangular, 1.0}, w, 50.0, 53.0) == 0.0);

  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const WeightFunction ramp({20.0, 80.0}, 5.0);
  for (auto shape : {KernelShape::uniform, KernelShape::triangular, KernelShape::epanechnikov}) {
    const KernelSpec k{shape, 4.0};
    const double bound = std::pow(kernel_profile(shape, 0.0), 2) * 2.0;
    for (int rep = 0; rep < 50; ++rep) {
      const double r = 10.0 + 80.0 * unit(rng);
      const double s = r + 10.0 * (unit(rng) - 0.5);
      const double a = fn_weight(k, ramp, r, s);
      CHECK(a == doctest::Approx(fn_weight(k, ramp, s, r)).epsilon(1e-13));
      CHECK(a >= 0.0);
      CHECK(a <= bound);
    }
  }
}

TEST_CASE("smoothing reproduces constants, lines and step averages") {
  const QuadratureGrid grid(0.0, 20.0, 401);
  const KernelSpec k{KernelShape::triangular, 2.0};
  const auto constant = smooth_curve([](double) { return 3.5; }, k, grid);
  const auto line = smooth_curve([](double t) { return 1.0 + 0.25 * t; }, k, grid);
  const std::vector<double> cut{10.0};
  const auto step = smooth_curve([](double t) { return t < 10.0 ? 1.0 : 0.0; }, k, grid, cut);
  for (Index i = 0; i < grid.size(); ++i) {
    const double t = grid.point(i);
    if (t < 2.0 || t > 18.0) continue;
    CHECK(constant.values[i] == doctest::Approx(3.5).epsilon(1e-8));
    CHECK(line.values[i] == doctest::Approx(1.0 + 0.25 * t).epsilon(1e-8));
  }
  CHECK(step.values[200] == doctest::Approx(0.5).epsilon(1e-8));
  CHECK(step.values[100] == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(step.values[300] == doctest::Approx(0.0).epsilon(1e-8));

  CHECK_THROWS_AS(smooth_curve([](double) { return 1.0; }, {KernelShape::triangular, 11.0}, grid),
                  std::invalid_argument);
}

TEST_CASE("property: smoothing is linear") {
  const QuadratureGrid grid(0.0, 24.0, 241);
  const KernelSpec k{KernelShape::epanechnikov, 3.0};
  auto f = [](double t) { return std::sin(t); };
  auto g = [](double t) { return t * t / 50.0; };
  const auto sf = smooth_curve(f, k, grid);
  const auto sg = smooth_curve(g, k, grid);
  const auto sfg = smooth_curve([&](double t) { return 2.0 * f(t) - 3.0 * g(t); }, k, grid);
  for (Index i = 0; i < grid.size(); ++i) {
    CHECK(sfg.values[i] == doctest::Approx(2.0 * sf.values[i] - 3.0 * sg.values[i]).epsilon(1e-12).scale(1.0));
  }
}

TEST_CASE("quadrature grid") {
  const QuadratureGrid grid(1.0, 3.0, 5);
  CHECK(grid.spacing() == 0.5);
  CHECK(grid.point(4) == 3.0);
  CHECK(grid.refined(16).size() == 65);
  const Vector v = grid.points();
  CHECK(trapezoid(v, grid) == doctest::Approx(4.0));
  const auto& rule = gauss_legendre(5);
  CHECK(rule.weights.sum() == doctest::Approx(2.0).epsilon(1e-14));
}
