#include <gtest/gtest.h>

#include <cmath>

#include "weaklp/covering.hpp"
#include "weaklp/errors.hpp"

using namespace weaklp;

TEST(Intervals, ZeroFieldHasEmptyFamily) {
  PiecewiseConstantField f(0.0, 0.25, std::vector<double>(8, 0.0));
  IntervalFamily fam = admissible_intervals(f, 1.0);
  EXPECT_TRUE(fam.members.empty());
  VitaliCover cover = vitali_select(fam);
  EXPECT_TRUE(cover.selected.empty());
  CoverVerdict v = verify_5J_cover(f, 1.0, fam, cover);
  EXPECT_TRUE(v.pass());
  EXPECT_EQ(v.pairs_in_set, 0u);
  WeightedEnergy e = weighted_energy(f, 1.0, fam, cover);
  EXPECT_EQ(e.energy, 0.0);
  EXPECT_TRUE(e.chain_holds);
}

TEST(Intervals, Refusals) {
  EXPECT_THROW(PiecewiseConstantField(0.0, 1.0, {1.0, -0.5}), InvalidParameter);
  EXPECT_THROW(PiecewiseConstantField(0.0, 0.0, {1.0}), InvalidParameter);
  PiecewiseConstantField f(0.0, 1.0, {1.0});
  EXPECT_THROW(admissible_intervals(f, 0.0), InvalidParameter);
  EXPECT_THROW(vitali_select(std::vector<Interval>{{1.0, 1.0}}), InvalidParameter);
}

TEST(Intervals, UnitCellIsAdmissibleAtEquality) {
  // one cell of width 1 and mass 1, gamma = 1: 1 >= 1^2
  PiecewiseConstantField f(0.0, 1.0, {0.0, 1.0, 0.0});
  IntervalFamily fam = admissible_intervals(f, 1.0);
  ASSERT_EQ(fam.members.size(), 1u);
  EXPECT_EQ(fam.members[0].a, 1);
  EXPECT_EQ(fam.members[0].b, 2);
}

TEST(Intervals, LengthBoundAndOrdering) {
  RandomStream stream(11);
  for (std::uint64_t k = 0; k < 10; ++k) {
    PiecewiseConstantField f = random_piecewise_field(128, stream, k);
    for (double gamma : {0.5, 1.0, 2.0}) {
      IntervalFamily fam = admissible_intervals(f, gamma);
      for (std::size_t i = 0; i < fam.members.size(); ++i) {
        const GridInterval& I = fam.members[i];
        EXPECT_LE(I.length() * f.h(), fam.length_bound * (1 + 1e-15));
        EXPECT_GE(f.mass(I.a, I.b), std::pow(I.length() * f.h(), gamma + 1.0));
        if (i > 0) {
          const GridInterval& P = fam.members[i - 1];
          EXPECT_TRUE(P.length() > I.length() || (P.length() == I.length() && P.a < I.a));
        }
      }
    }
  }
}

TEST(Vitali, HandTrace) {
  auto sel = vitali_select(std::vector<Interval>{{0.5, 1.5}, {3.0, 4.0}, {0.0, 1.0}});
  ASSERT_EQ(sel.size(), 2u);
  EXPECT_EQ(sel[0].left, 0.0);
  EXPECT_EQ(sel[0].right, 1.0);
  EXPECT_EQ(sel[1].left, 3.0);
  EXPECT_EQ(sel[1].right, 4.0);
  auto single = vitali_select(std::vector<Interval>{{2.0, 2.5}});
  ASSERT_EQ(single.size(), 1u);
  EXPECT_EQ(single[0].left, 2.0);
  EXPECT_TRUE(vitali_select(std::vector<Interval>{}).empty());
}

TEST(Vitali, RandomFieldsCoverExactly) {
  // brute force over every grid pair is the oracle
  RandomStream stream(2024);
  for (std::uint64_t k = 0; k < 100; ++k) {
    PiecewiseConstantField f = random_piecewise_field(128, stream, k);
    for (double gamma : {0.5, 1.0, 2.0}) {
      IntervalFamily fam = admissible_intervals(f, gamma);
      VitaliCover cover = vitali_select(fam);
      CoverVerdict v = verify_5J_cover(f, gamma, fam, cover);
      EXPECT_TRUE(v.disjoint);
      EXPECT_EQ(v.guarantee_violations, 0u);
      EXPECT_EQ(v.violations, 0u) << "field " << k << " gamma " << gamma;
      EXPECT_EQ(v.pairs_checked, 129u * 128u);
      WeightedEnergy e = weighted_energy(f, gamma, fam, cover);
      EXPECT_TRUE(e.chain_holds) << e.energy << " " << e.bound_selected;
      EXPECT_LE(e.bound_selected, e.bound_mass);
    }
  }
}

TEST(Energy, SquareIdentities) {
  EXPECT_DOUBLE_EQ(square_energy(1.0, 1.0), 1.0);
  EXPECT_DOUBLE_EQ(square_energy(1.0, 2.0), 1.0 / 3.0);
}

TEST(Energy, SingleIntervalMatchesClosedForm) {
  // one admissible interval made of 8 cells: the cell sum must reproduce
  // 2 |I|^{gamma+1} / (gamma (gamma + 1)) exactly
  std::vector<double> v(32, 0.0);
  for (int i = 8; i < 16; ++i) v[i] = 4.0;
  PiecewiseConstantField f(0.0, 1.0 / 32, v);
  for (double gamma : {0.5, 1.0, 2.0, 3.0}) {
    IntervalFamily fam;
    fam.gamma = gamma;
    fam.h = f.h();
    fam.members = {GridInterval{8, 16}};
    VitaliCover cover{fam.members};
    WeightedEnergy e = weighted_energy(f, gamma, fam, cover);
    EXPECT_NEAR(e.energy, square_energy(0.25, gamma), 1e-14);
  }
}

TEST(Lines, IntegralBasics) {
  Density zero = density_abs(make_zero(2), 1.0);
  EXPECT_EQ(line_integral(zero, Point{0, 0}, Point{1, 1}).value, 0.0);
  Density one;
  one.dim = 2;
  one.support = Box{2, Point{-2, -2}, Point{2, 2}};
  one.sup = 1.0;
  one.eval = [](const Point&) { return 1.0; };
  EXPECT_NEAR(line_integral(one, Point{-0.5, 0.1}, Point{0.7, 0.4}).value, std::hypot(1.2, 0.3), 1e-14);
  EXPECT_THROW(line_integral(one, Point{0.2, 0.2}, Point{0.2, 0.2}), InvalidParameter);

  Density F = density_gradient_power(catalogue_field("bump_pair", 2), 2.0, 0.5);
  Point x{-1.7, -0.4}, y{1.3, 0.6};
  QuadratureResult a = line_integral(F, x, y), b = line_integral(F, y, x);
  EXPECT_NEAR(a.value, b.value, 1e-12);
  EXPECT_GT(a.value, 0.0);
  EXPECT_LT(a.error_estimate, 1e-3 * a.value);
}

TEST(Rotation, ZeroAndRefusals) {
  Density zero = density_abs(make_zero(2), 1.0);
  EXPECT_EQ(rotation_measure(zero).measure.value, 0.0);
  Density F = density_abs(catalogue_field("bump", 2), 1.0);
  RotationOptions bad;
  bad.scan = 4;
  EXPECT_THROW(rotation_measure(F, bad), InvalidParameter);
  Density none = F;
  none.eval = nullptr;
  EXPECT_THROW(rotation_measure(none), InvalidParameter);
}

TEST(Rotation, AgreesWithPairMonteCarlo) {
  for (int dim : {1, 2}) {
    for (const ScalarField& u : catalogue(dim)) {
      Density F = density_gradient_power(u, 1.0, 1.0);
      RotationMeasure r = rotation_measure(F);
      QuadratureResult mc = rotation_measure_mc(F, 100000, RandomStream(5));
      double se = std::hypot(r.measure.error_estimate, mc.error_estimate);
      EXPECT_NEAR(r.measure.value, mc.value, 3.0 * se) << u.label();
      EXPECT_TRUE(r.within_theory);
      EXPECT_GT(r.c_emp, 0.0);
    }
  }
}

TEST(Rotation, StableUnderRefinementAndMonotoneInScale) {
  Density F = density_abs(catalogue_field("bump_offset", 2), 1.0);
  RotationMeasure a = rotation_measure(F);
  RotationOptions fine;
  fine.sphere_order = 64;
  fine.z_panels = 32;
  fine.t_panels = 32;
  fine.line_cells = 128;
  fine.scan = 64;
  RotationMeasure b = rotation_measure(F, fine);
  EXPECT_LT(std::abs(a.c_emp - b.c_emp), 0.01 * b.c_emp);
  double prev = 0.0;
  for (double c : {0.5, 1.0, 2.0, 4.0}) {
    double m = rotation_measure(density_abs(catalogue_field("bump_offset", 2), c)).measure.value;
    EXPECT_GE(m, prev * (1 - 1e-3));
    prev = m;
  }
}

TEST(Rotation, HalfFactor) {
  for (int dim : {1, 2})
    for (const ScalarField& u : catalogue(dim)) {
      HalfFactorCheck h = half_factor_check(density_gradient_power(u, 1.0, 1.0), Point{1.0, 0.3}, 0.1);
      EXPECT_NEAR(h.ratio, 2.0, 0.02) << u.label();
    }
}

TEST(Rotation, WorkerCountInvariance) {
  Density F = density_abs(catalogue_field("bump_pair", 2), 1.0);
  RotationOptions o;
  o.estimate_error = false;
  o.workers = 1;
  double a = rotation_measure(F, o).measure.value;
  o.workers = 3;
  EXPECT_EQ(a, rotation_measure(F, o).measure.value);
  EXPECT_EQ(rotation_measure_mc(F, 5000, RandomStream(3), 1).value,
            rotation_measure_mc(F, 5000, RandomStream(3), 4).value);
}

TEST(Containment, HolderStepHolds) {
  for (int dim : {1, 2})
    for (const ScalarField& u : catalogue(dim))
      for (double p : {1.0, 2.0}) {
        ContainmentVerdict v = holder_containment_check(u, p, 2.0 * u.lip(), dim == 1 ? 10000 : 2000,
                                                        RandomStream(17));
        EXPECT_TRUE(v.pass()) << u.label() << " p=" << p << " worst " << v.worst_margin;
        EXPECT_GT(v.pairs_in_set, 0u) << u.label();
      }
  EXPECT_EQ(holder_containment_check(make_zero(2), 1.0, 1.0, 100, RandomStream(1)).pairs_in_set, 0u);
}
