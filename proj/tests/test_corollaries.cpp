#include <gtest/gtest.h>

#include <cmath>

#include "weaklp/corollaries.hpp"
#include "weaklp/errors.hpp"

using namespace weaklp;

TEST(GNParams, Identities) {
  GNParams g{0.25, 4.0, 0.5};
  EXPECT_DOUBLE_EQ(g.s(), 0.25 * 0.5 + 0.75);
  EXPECT_DOUBLE_EQ(1.0 / g.p(), 0.25 / 4.0 + 0.75);
  GNParams inf{0.5, INFINITY, 0.5};
  EXPECT_DOUBLE_EQ(inf.p(), 2.0);
  EXPECT_THROW((GNParams{0.0, 2.0, 0.5}.validate()), InvalidParameter);
  EXPECT_THROW((GNParams{0.5, 1.0, 0.5}.validate()), InvalidParameter);
  EXPECT_THROW((GNParams{0.5, 2.0, 1.0}.validate()), InvalidParameter);
}

TEST(Corollaries, Refusals) {
  ScalarField u1 = catalogue_field("bump", 1), u2 = catalogue_field("bump", 2);
  EXPECT_THROW(check_cor_1_4(u2, 2.0), InvalidParameter);
  EXPECT_THROW(check_cor_1_4(u1, 1.0), InvalidParameter);
  EXPECT_THROW(check_cor_1_5(u1, 1.0), InvalidParameter);
  EXPECT_THROW(check_cor_1_6(u1, GNParams{0.5, 2.0, 0.25}), InvalidParameter);
  EXPECT_THROW(check_gn_strong(u1, 0.5, INFINITY), InvalidParameter);
  EXPECT_THROW(check_sobolev_embedding(u1, 0.5), InvalidParameter);
  EXPECT_THROW(failure_probe_ro4(2.0, {0.1, 0.2}), InvalidParameter);
  EXPECT_THROW(failure_probe_ro4(2.0, {0.1, 0.0}), InvalidParameter);
  EXPECT_THROW(failure_probe_ro4(2.0, {0.5, 0.1}), InvalidParameter);
}

TEST(Corollaries, ZeroFieldGivesZero) {
  ScalarField z = make_zero(1);
  CorollaryReport r = check_cor_1_4(z, 2.0);
  EXPECT_EQ(r.lhs, 0.0);
  EXPECT_EQ(r.rhs, 0.0);
  EXPECT_EQ(r.ratio, 0.0);
  EXPECT_EQ(check_gn_strong(z, 0.5, 2.0).lhs, 0.0);
  EXPECT_EQ(holder_seminorm(z, 0.5), 0.0);
}

TEST(Corollaries, AmplitudeHomogeneity) {
  for (const ScalarField& u : catalogue(1)) {
    ScalarField v = scaled(u, 3.0);
    CorollaryReport a = check_cor_1_4(u, 2.0), b = check_cor_1_4(v, 2.0);
    EXPECT_NEAR(b.lhs, 3.0 * a.lhs, 1e-2 * b.lhs) << u.label();
    EXPECT_NEAR(b.ratio, a.ratio, 1e-2 * a.ratio) << u.label();
    CorollaryReport c = check_cor_1_5(u, 3.0), d = check_cor_1_5(v, 3.0);
    EXPECT_NEAR(d.ratio, c.ratio, 1e-2 * c.ratio) << u.label();
    GNParams gn{0.5, 2.0, 0.5};
    EXPECT_NEAR(check_cor_1_6(v, gn).ratio, check_cor_1_6(u, gn).ratio, 1e-2 * check_cor_1_6(u, gn).ratio);
  }
}

TEST(Corollaries, DilationInvarianceInOneDimension) {
  // alpha = 2/p makes the one-dimensional weak quasinorm dilation invariant, as is ||u'||_1
  ScalarField a = make_bump(Point{0.0}, 1.0, 1.0, 1), b = make_bump(Point{0.0}, 3.0, 1.0, 1);
  for (double p : {1.5, 2.0, 4.0}) {
    CorollaryReport ra = check_cor_1_4(a, p), rb = check_cor_1_4(b, p);
    EXPECT_NEAR(rb.lhs, ra.lhs, 1e-2 * ra.lhs) << p;
    EXPECT_NEAR(rb.rhs, ra.rhs, 1e-9 * ra.rhs) << p;
    EXPECT_FALSE(ra.at_grid_edge);
  }
}

TEST(Corollaries, RatiosBoundedOnCatalogue) {
  for (const ScalarField& u : catalogue(1)) {
    for (double p : {1.5, 2.0, 4.0}) {
      CorollaryReport r = check_cor_1_4(u, p);
      EXPECT_TRUE(r.converged && !r.at_grid_edge) << u.label();
      EXPECT_GT(r.ratio, 0.05);
      EXPECT_LT(r.ratio, 20.0);
    }
    CorollaryReport h = check_cor_1_6(u, GNParams{0.5, INFINITY, 0.5});
    EXPECT_FALSE(h.at_grid_edge);
    EXPECT_GT(h.ratio, 0.05);
    EXPECT_LT(h.ratio, 20.0);
  }
}

TEST(Corollaries, SupAndHolderEstimates) {
  ScalarField u = catalogue_field("mollified_box", 1);
  EXPECT_NEAR(sup_norm_estimate(u), u.sup_norm(), 1e-12);
  // s = 1 gives the Lipschitz constant, which the certified bound dominates
  double lip = holder_seminorm(u, 1.0);
  EXPECT_LE(lip, u.lip() * (1 + 1e-12));
  EXPECT_GT(lip, 0.9 * u.lip());
  EXPECT_THROW(holder_seminorm(u, 0.0), InvalidParameter);
}

TEST(Corollaries, SobolevExponentInTwoDimensions) {
  CorollaryReport r = check_sobolev_embedding(catalogue_field("bump", 2), 0.5);
  EXPECT_NEAR(r.params.at("p"), 4.0 / 3.0, 1e-15);
  EXPECT_GT(r.ratio, 0.0);
  EXPECT_TRUE(std::isfinite(r.ratio));
}

TEST(FailureProbe, EndpointIsInfinite) {
  FailureProbe f = failure_probe_ro4(1.0, {0.2, 0.1});
  EXPECT_TRUE(f.diverges_at_diagonal);
  for (double v : f.values) EXPECT_TRUE(std::isinf(v));
}

TEST(FailureProbe, LogarithmicGrowthWithBoundedWeakSide) {
  for (double p : {1.5, 2.0, 3.0}) {
    FailureProbe f = failure_probe_ro4(p, {0.2, 0.1, 0.05, 0.025});
    EXPECT_TRUE(f.increasing) << p;
    EXPECT_GT(f.rate, 0.0);
    // equal increments per halving of eps signal log(1/eps) growth
    EXPECT_NEAR(f.last_increment_ratio, 1.0, 0.25) << p;
    EXPECT_LE(f.weak_spread, 3.0) << p;
  }
}
