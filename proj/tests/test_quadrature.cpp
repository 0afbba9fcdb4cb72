#include <gtest/gtest.h>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <numbers>

#include "weaklp/errors.hpp"
#include "weaklp/quadrature.hpp"

using namespace weaklp;

TEST(Gauss, IntegratesPolynomialsExactly) {
  for (int n : {1, 2, 5, 8, 16}) {
    const Rule1D& g = gauss_nodes_1d(n);
    for (int deg = 0; deg <= 2 * n - 1; ++deg) {
      double s = 0.0;
      for (std::size_t i = 0; i < g.size(); ++i) s += g.weights[i] * std::pow(g.nodes[i], deg);
      double exact = deg % 2 ? 0.0 : 2.0 / (deg + 1);
      EXPECT_NEAR(s, exact, 1e-13) << "n=" << n << " deg=" << deg;
    }
  }
}

TEST(Gauss, CompositeAgainstBoost) {
  auto f = [](double x) { return std::exp(-x * x) * std::abs(std::sin(3 * x)); };
  double bp[] = {0.0, std::numbers::pi / 3};
  Rule1D r = composite_gauss(-1.0, 2.0, 64, 8, bp);
  double s = 0.0;
  for (std::size_t i = 0; i < r.size(); ++i) s += r.weights[i] * f(r.nodes[i]);
  double oracle = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, -1.0, 0.0, 15, 1e-14) +
                  boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, 0.0, std::numbers::pi / 3, 15, 1e-14) +
                  boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, std::numbers::pi / 3, 2.0, 15, 1e-14);
  EXPECT_NEAR(s, oracle, 1e-12);
}

TEST(Gauss, RejectsBadInput) {
  EXPECT_THROW(composite_gauss(1.0, 1.0, 4, 4), InvalidParameter);
  EXPECT_THROW(composite_gauss(0.0, 1.0, 0, 4), InvalidParameter);
}

TEST(Sphere, AreasAndTotalWeights) {
  EXPECT_NEAR(sphere_area(1), 2.0, 1e-15);
  EXPECT_NEAR(sphere_area(2), 2 * std::numbers::pi, 1e-14);
  EXPECT_NEAR(sphere_area(3), 4 * std::numbers::pi, 1e-13);
  EXPECT_NEAR(sphere_area(4), 2 * std::numbers::pi * std::numbers::pi, 1e-13);
  for (int n = 1; n <= 4; ++n) {
    SphereRule r = sphere_rule(n, 16);
    double s = 0.0;
    for (double w : r.weights) s += w;
    EXPECT_NEAR(s, sphere_area(n), 1e-12 * sphere_area(n)) << n;
    for (const Point& w : r.nodes) EXPECT_NEAR(norm(w, n), 1.0, 1e-14);
  }
  EXPECT_THROW(sphere_rule(5, 8), InvalidParameter);
}

TEST(Sphere, SecondMomentIsotropic) {
  // integral of w_i^2 over the sphere = sigma / N; the latitude weight is not
  // polynomial in the angle, so this needs a moderately fine rule
  for (int n = 2; n <= 4; ++n) {
    SphereRule r = sphere_rule(n, 32);
    for (int axis = 0; axis < n; ++axis) {
      double s = 0.0;
      for (std::size_t k = 0; k < r.size(); ++k) s += r.weights[k] * r.nodes[k][axis] * r.nodes[k][axis];
      EXPECT_NEAR(s, sphere_area(n) / n, 1e-12) << n << " " << axis;
    }
  }
}

TEST(Sphere, AntipodalHalf) {
  for (int n = 1; n <= 4; ++n) {
    SphereRule r = sphere_rule(n, 8);
    auto h = antipodal_half(r);
    ASSERT_TRUE(h.has_value()) << n;
    EXPECT_EQ(h->size() * 2, r.size());
    double s = 0.0, s1 = 0.0;
    for (std::size_t k = 0; k < h->size(); ++k) s += h->weights[k] * std::abs(h->nodes[k][0]);
    for (std::size_t k = 0; k < r.size(); ++k) s1 += r.weights[k] * std::abs(r.nodes[k][0]);
    EXPECT_NEAR(s, s1, 1e-12);
  }
  SphereRule odd = sphere_rule(2, 3);
  EXPECT_FALSE(antipodal_half(odd).has_value());
}

TEST(Constants, FrozenValues) {
  // oracle: tests/oracles/compute_fixtures.py
  EXPECT_NEAR(k_closed_form(1, 2), 4.0, 1e-13);
  EXPECT_NEAR(k_closed_form(2, 3), 4.188790204786, 1e-11);
  EXPECT_NEAR(k_closed_form(2, 2), std::numbers::pi, 1e-13);
  EXPECT_NEAR(k_closed_form(1, 1), 2.0, 1e-14);
  EXPECT_NEAR(k_closed_form(3.7, 1), 2.0, 1e-13);
  // k(p,N) <= sigma_{N-1} since |e.w| <= 1
  for (int n = 1; n <= 4; ++n)
    for (double p : {1.0, 1.5, 2.0, 4.0}) EXPECT_LE(k_closed_form(p, n), sphere_area(n) * (1 + 1e-14));
}

TEST(Constants, QuadratureAgrees) {
  for (int n = 1; n <= 4; ++n)
    for (double p : {1.0, 1.5, 2.0, 3.0}) {
      SphereConstants c = k_constant(p, n);
      EXPECT_NEAR(c.k_quadrature, c.k, 1e-6 * c.k);
    }
  EXPECT_THROW(k_constant(0.5, 2), InvalidParameter);
}

TEST(Constants, LowerConstant) {
  EXPECT_NEAR(lower_constant_cN(1), 2.0 * std::min(1.0, 0.5), 1e-14);
  EXPECT_NEAR(lower_constant_cN(2), 4.0 * std::min(0.5, 1 / (2 * std::numbers::pi)), 1e-14);
}

TEST(MonteCarlo, ConstantHasZeroVarianceAndDeterministic) {
  Box b;
  b.dim = 2;
  b.hi = {2.0, 3.0};
  Sampler s{[b](const RandomStream& r, std::uint64_t i) { return r.in_box(b, i, 0); }, b.volume()};
  RandomStream st(7);
  QuadratureResult c = monte_carlo([](const Point&) { return 1.5; }, s, 10000, st, 1);
  EXPECT_DOUBLE_EQ(c.value, 9.0);
  EXPECT_EQ(c.error_estimate, 0.0);
  auto f = [](const Point& x) { return x[0] * x[1]; };
  QuadratureResult a = monte_carlo(f, s, 50000, st, 1);
  QuadratureResult a4 = monte_carlo(f, s, 50000, st, 4);
  EXPECT_EQ(a.value, a4.value);
  EXPECT_EQ(a.error_estimate, a4.error_estimate);
  EXPECT_NEAR(a.value, 9.0, 5 * a.error_estimate);
}

TEST(Random, UniformRangeAndDirections) {
  RandomStream r(3, 1);
  for (std::uint64_t i = 0; i < 1000; ++i) {
    double u = r.uniform(i, 0);
    EXPECT_GT(u, 0.0);
    EXPECT_LT(u, 1.0);
    Point w = r.direction(i, 1, 3);
    EXPECT_NEAR(norm(w, 3), 1.0, 1e-14);
  }
  EXPECT_NE(r.bits(0, 0), r.split(1).bits(0, 0));
  EXPECT_EQ(RandomStream(3, 1).bits(5, 2), r.bits(5, 2));
}
