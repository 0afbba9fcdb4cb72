#include <gtest/gtest.h>

#include <cmath>

#include "weaklp/errors.hpp"
#include "weaklp/seminorms.hpp"

using namespace weaklp;

TEST(Gagliardo, ZeroAndRefusals) {
  EXPECT_EQ(gagliardo(SeminormQuery{make_zero(1), 0.5, 2.0, 0.0}).value, 0.0);
  ScalarField u = catalogue_field("bump", 1);
  EXPECT_THROW(gagliardo(SeminormQuery{u, 1.0, 1.0, 0.0}), InvalidParameter);
  EXPECT_THROW(gagliardo(SeminormQuery{u, 0.0, 1.0, 0.0}), InvalidParameter);
  EXPECT_THROW(gagliardo(SeminormQuery{u, 0.5, 0.5, 0.0}), InvalidParameter);
}

TEST(Gagliardo, FrozenOracle) {
  // oracle: tests/oracles/compute_fixtures.py (adaptive quadrature, checked
  // against the Fourier form of the seminorm)
  GagliardoOptions o;
  o.x_panels = 64;
  QuadratureResult r = gagliardo(SeminormQuery{catalogue_field("bump", 1), 0.5, 2.0, 0.0}, o);
  EXPECT_TRUE(r.converged);
  EXPECT_NEAR(r.value, 1.1266276702, 1e-7);
}

TEST(Gagliardo, Homogeneity) {
  for (int dim : {1, 2}) {
    GagliardoOptions o;
    o.x_panels = dim == 1 ? 32 : 8;
    o.sphere_order = 8;
    ScalarField u = catalogue_field("bump_offset", dim);
    for (double p : {1.0, 1.5}) {
      double a = gagliardo(SeminormQuery{u, 0.4, p, 0.0}, o).value;
      double b = gagliardo(SeminormQuery{scaled(u, -3.0), 0.4, p, 0.0}, o).value;
      EXPECT_NEAR(b, std::pow(3.0, p) * a, 1e-10 * b);
    }
  }
}

TEST(Gagliardo, StableUnderRefinement) {
  ScalarField u = catalogue_field("mollified_box", 1);
  GagliardoOptions a, b;
  b.x_panels = 2 * a.x_panels;
  b.r_panels = 2 * a.r_panels;
  QuadratureResult ra = gagliardo(SeminormQuery{u, 0.3, 1.5, 0.0}, a);
  QuadratureResult rb = gagliardo(SeminormQuery{u, 0.3, 1.5, 0.0}, b);
  EXPECT_TRUE(std::isfinite(ra.value));
  EXPECT_LE(std::abs(ra.value - rb.value), ra.error_estimate + rb.error_estimate);
}

TEST(Gagliardo, CutoffMonotone) {
  ScalarField u = catalogue_field("bump_pair", 1);
  double prev = 0.0;
  for (double d : {1e-1, 1e-2, 1e-3}) {
    double v = gagliardo(SeminormQuery{u, 1.0, 2.0, d}).value;
    EXPECT_GT(v, prev);
    prev = v;
  }
}

TEST(Divergence, SlopeMatchesSphereConstant) {
  ScalarField u = catalogue_field("bump", 1);
  for (double p : {1.0, 2.0}) {
    DivergenceProbe d = diagonal_divergence_probe(u, p, {1e-2, 1e-3, 1e-4, 1e-5});
    EXPECT_LT(d.relative_error, 0.1) << p;
    for (std::size_t i = 1; i < d.values.size(); ++i) EXPECT_GE(d.values[i], d.values[i - 1]);
  }
  EXPECT_NEAR(diagonal_divergence_probe(u, 1.0, {1e-2, 1e-3, 1e-4}).predicted, 2 * 2 * std::exp(-1.0), 1e-8);
  DivergenceProbe z = diagonal_divergence_probe(make_zero(1), 1.0, {1e-1, 1e-2});
  EXPECT_EQ(z.slope, 0.0);
  EXPECT_THROW(diagonal_divergence_probe(u, 1.0, {1e-2, 1e-3, 1e-5}), InvalidParameter);
  EXPECT_THROW(diagonal_divergence_probe(u, 1.0, {1e-3, 1e-2}), InvalidParameter);
}

TEST(Divergence, PositiveSlopeAcrossCatalogue) {
  for (const auto& u : catalogue(1)) {
    DivergenceProbe d = diagonal_divergence_probe(u, 1.0, {1e-2, 1e-3, 1e-4});
    EXPECT_GT(d.slope, 0.0) << u.label();
  }
}

TEST(Bbm, PlateauMatchesDivergenceSlope) {
  ScalarField u = catalogue_field("bump", 1);
  for (double p : {1.0, 2.0}) {
    BbmLadder b = bbm_factor(u, p, {0.9, 0.99, 0.999});
    EXPECT_LT(b.relative_error, 0.1);
    DivergenceProbe d = diagonal_divergence_probe(u, p, {1e-2, 1e-3, 1e-4, 1e-5});
    EXPECT_NEAR(p * b.plateau, d.slope, 0.1 * d.slope);
    BbmLadder c = bbm_factor(scaled(u, 2.0), p, {0.9, 0.99});
    EXPECT_NEAR(c.values[1], std::pow(2.0, p) * b.values[1], 1e-10 * c.values[1]);
  }
  BbmLadder z = bbm_factor(make_zero(1), 1.0, {0.5, 0.9});
  EXPECT_EQ(z.values[0], 0.0);
  EXPECT_EQ(z.values[1], 0.0);
  EXPECT_THROW(bbm_factor(u, 1.0, {0.9, 0.5}), InvalidParameter);
  EXPECT_THROW(bbm_factor(u, 1.0, {1.0}), InvalidParameter);
}
