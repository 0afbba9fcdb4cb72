#include <gtest/gtest.h>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>

#include "weaklp/errors.hpp"
#include "weaklp/fields.hpp"

using namespace weaklp;

namespace {

Point pt(double a, double b = 0, double c = 0, double d = 0) { return Point{a, b, c, d}; }

// Central differences against the analytic gradient.
void expect_gradient_matches(const ScalarField& u, const Point& x, double tol) {
  const int n = u.dimension();
  Point g = u.gradient(x);
  for (int i = 0; i < n; ++i) {
    double h = 1e-6;
    Point a = x, b = x;
    a[i] += h;
    b[i] -= h;
    double fd = (u(a) - u(b)) / (2 * h);
    EXPECT_NEAR(g[i], fd, tol) << u.label() << " axis " << i;
  }
}

}  // namespace

TEST(Profile, DerivativesMatchFiniteDifferences) {
  for (double t : {-0.9, -0.5, 0.0, 0.3, 0.77}) {
    double h = 1e-6;
    EXPECT_NEAR(bump_profile_d1(t), (bump_profile(t + h) - bump_profile(t - h)) / (2 * h), 1e-7);
    EXPECT_NEAR(bump_profile_d2(t), (bump_profile_d1(t + h) - bump_profile_d1(t - h)) / (2 * h), 1e-6);
  }
  EXPECT_EQ(bump_profile(1.0), 0.0);
  EXPECT_EQ(bump_profile(-1.5), 0.0);
}

TEST(Profile, MassAndStep) {
  // oracle: tests/oracles/compute_fixtures.py
  EXPECT_NEAR(bump_profile_mass(), 0.44399381616808, 1e-12);
  EXPECT_EQ(mollified_step(-1.0), 0.0);
  EXPECT_EQ(mollified_step(1.0), 1.0);
  EXPECT_NEAR(mollified_step(0.0), 0.5, 1e-13);
  for (double z : {-0.7, -0.2, 0.4, 0.9}) {
    double oracle = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(bump_profile, -1.0, z, 15, 1e-15) /
                    bump_profile_mass();
    EXPECT_NEAR(mollified_step(z), oracle, 1e-12) << z;
  }
}

TEST(Fields, Factories) {
  EXPECT_THROW(make_bump(Point{}, 0.0, 1.0, 2), InvalidParameter);
  EXPECT_THROW(make_bump(Point{}, 1.0, 1.0, 5), InvalidParameter);
  Box b;
  b.dim = 2;
  b.hi = {1.0, 0.2};
  EXPECT_THROW(make_mollified_indicator(b, 0.1), InvalidParameter);
  EXPECT_NO_THROW(make_mollified_indicator(b, 0.05));
  EXPECT_THROW(make_sum({}), InvalidParameter);
  EXPECT_THROW(make_sum({{1.0, make_bump(Point{}, 1, 1, 1)}, {1.0, make_bump(Point{}, 1, 1, 2)}}), InvalidParameter);
  EXPECT_THROW(catalogue_field("nope", 2), InvalidParameter);
}

TEST(Fields, GradientsMatchFiniteDifferences) {
  for (int n = 1; n <= 3; ++n)
    for (const auto& u : catalogue(n))
      for (const Point& x : {pt(0.1, 0.2, -0.1), pt(0.95, 0.05, 0.1), pt(-0.5, 0.4, 0.2), pt(1.2, 0.5, 0.0)})
        expect_gradient_matches(u, x, 1e-6);
}

TEST(Fields, VanishOutsideSupportBox) {
  for (int n = 1; n <= 3; ++n)
    for (const auto& u : catalogue(n)) {
      Box s = u.support_box();
      Point x = s.hi;
      x[0] += 1e-9;
      EXPECT_EQ(u(x), 0.0) << u.label();
      EXPECT_GT(u.support_radius(), 0.0);
      Point far{};
      far[0] = u.support_radius() + 0.01;
      EXPECT_EQ(u(far), 0.0);
    }
}

TEST(Fields, BoundsDominateSamples) {
  for (int n = 1; n <= 3; ++n)
    for (const auto& u : catalogue(n)) {
      Box s = u.support_box();
      double max_v = 0, max_g = 0, max_h = 0;
      const int m = n == 1 ? 4000 : n == 2 ? 120 : 30;
      const double h = 1e-5;
      for (int k = 0; k < std::pow(m, n); ++k) {
        Point x{};
        int r = k;
        for (int i = 0; i < n; ++i) {
          x[i] = s.lo[i] + s.side(i) * ((r % m) + 0.37) / m;
          r /= m;
        }
        max_v = std::max(max_v, std::abs(u(x)));
        Point g = u.gradient(x);
        max_g = std::max(max_g, norm(g, n));
        // Frobenius norm of the finite-difference Hessian bounds the operator norm
        double fro = 0;
        for (int i = 0; i < n; ++i) {
          Point a = x, b = x;
          a[i] += h;
          b[i] -= h;
          Point ga = u.gradient(a), gb = u.gradient(b);
          for (int j = 0; j < n; ++j) fro += std::pow((ga[j] - gb[j]) / (2 * h), 2);
        }
        max_h = std::max(max_h, std::sqrt(fro) / std::sqrt(n));
      }
      EXPECT_LE(max_v, u.sup_norm() * (1 + 1e-12)) << u.label();
      EXPECT_LE(max_g, u.lip()) << u.label();
      EXPECT_LE(max_h, u.hess()) << u.label();
      // bounds are not wildly loose either
      EXPECT_GE(max_g, 0.5 * u.lip()) << u.label();
    }
}

TEST(Fields, ScaledAndTranslated) {
  ScalarField u = catalogue_field("bump", 2);
  ScalarField v = scaled(u, -2.0);
  EXPECT_DOUBLE_EQ(v.lip(), 2.0 * u.lip());
  EXPECT_DOUBLE_EQ(v(pt(0.1, 0.2)), -2.0 * u(pt(0.1, 0.2)));
  ScalarField w = translated(u, pt(3.0, 1.0));
  EXPECT_DOUBLE_EQ(w(pt(3.1, 1.2)), u(pt(0.1, 0.2)));
  EXPECT_NEAR(w.support_box().lo[0], 2.0, 1e-15);
  EXPECT_TRUE(make_zero(2).is_zero());
}

TEST(Norms, FrozenOracleValues) {
  // oracle: tests/oracles/compute_fixtures.py
  ScalarField b1 = catalogue_field("bump", 1);
  EXPECT_NEAR(gradient_lp_norm(b1, 1.0).value, 0.735758882343, 1e-9);
  EXPECT_NEAR(gradient_lp_norm(b1, 2.0).value, 0.409587060753, 1e-9);
  ScalarField b2 = catalogue_field("bump", 2);
  QuadratureResult r1 = gradient_lp_norm(b2, 1.0);
  EXPECT_TRUE(r1.converged);
  EXPECT_NEAR(r1.value, 1.394847711113, 1e-7);
  EXPECT_NEAR(gradient_lp_norm(b2, 1.5).value, 1.072839942220, 1e-7);
  EXPECT_NEAR(gradient_lp_norm(b2, 2.0).value, 0.850336663175, 1e-7);
}

TEST(Norms, ScalingLaws) {
  ScalarField u = catalogue_field("bump_offset", 2);
  double base = gradient_lp_norm(u, 1.5).value;
  EXPECT_NEAR(gradient_lp_norm(scaled(u, 3.0), 1.5).value, std::pow(3.0, 1.5) * base, 1e-9 * base);
  EXPECT_NEAR(gradient_lp_norm(translated(u, pt(0.7, -2)), 1.5).value, base, 1e-9 * base);
  // the mollified indicator in 1-D has total variation exactly 2
  EXPECT_NEAR(gradient_lp_norm(catalogue_field("mollified_box", 1), 1.0).value, 2.0, 1e-9);
  EXPECT_THROW(gradient_lp_norm(u, 0.5), InvalidParameter);
}
