#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "weaklp/fields.hpp"
#include "weaklp/quadrature.hpp"
#include "weaklp/random.hpp"

namespace weaklp {

// ---------------------------------------------------------------------------
// One-dimensional covering argument on a uniform grid

/// Non-negative step function on [origin, origin + cells * h] with exact
/// prefix sums. Dyadic h and values keep every mass computation exact.
class PiecewiseConstantField {
 public:
  /// Throws InvalidParameter on a negative value, h <= 0 or no cells.
  PiecewiseConstantField(double origin, double h, std::vector<double> values);

  /// Cell averages of |f| over [a, b] (8-point Gauss per cell).
  static PiecewiseConstantField project(const std::function<double(double)>& f, double a, double b, int cells);

  int cells() const { return static_cast<int>(values_.size()); }
  double origin() const { return origin_; }
  double h() const { return h_; }
  double point(int i) const { return origin_ + i * h_; }
  const std::vector<double>& values() const { return values_; }
  /// integral of f over [point(a), point(b)], a <= b.
  double mass(int a, int b) const { return prefix_[b] - prefix_[a]; }
  double total_mass() const { return prefix_.back(); }

 private:
  double origin_;
  double h_;
  std::vector<double> values_;
  std::vector<double> prefix_;
};

/// Random sparse step function with dyadic values on [0, 1] (cells a power of
/// two keeps h dyadic). Sample `index` of the stream.
PiecewiseConstantField random_piecewise_field(int cells, const RandomStream& stream, std::uint64_t index);

/// Closed interval [point(a), point(b)] between cell boundaries, a < b.
struct GridInterval {
  int a = 0;
  int b = 0;
  int length() const { return b - a; }
  bool intersects(const GridInterval& o) const { return a <= o.b && o.a <= b; }
  /// Same centre, five times the length.
  GridInterval dilate5() const { return GridInterval{a - 2 * length(), b + 2 * length()}; }
  bool contains(const GridInterval& o) const { return a <= o.a && o.b <= b; }
};

/// All grid intervals I with integral_I f >= |I|^{gamma + 1}, sorted by length
/// descending, then left endpoint.
struct IntervalFamily {
  double gamma = 1.0;
  double h = 1.0;
  double origin = 0.0;
  std::vector<GridInterval> members;
  double length_bound = 0.0;  // ||f||_1^{1/(gamma+1)}
};

/// Throws InvalidParameter unless gamma > 0.
IntervalFamily admissible_intervals(const PiecewiseConstantField& f, double gamma);

struct VitaliCover {
  std::vector<GridInterval> selected;
};

/// Greedy: walk the family longest first (leftmost on ties) and keep each
/// interval that meets none of the kept ones.
VitaliCover vitali_select(const IntervalFamily& family);

/// The same rule on arbitrary closed intervals [left, right].
struct Interval {
  double left = 0.0;
  double right = 0.0;
  double length() const { return right - left; }
};
std::vector<Interval> vitali_select(std::vector<Interval> family);

struct CoverVerdict {
  bool disjoint = true;
  std::uint64_t guarantee_violations = 0;  // members meeting no longer selected J
  std::uint64_t pairs_checked = 0;
  std::uint64_t pairs_in_set = 0;
  std::uint64_t violations = 0;            // pairs of E(f, gamma) outside every 5J x 5J
  bool pass() const { return disjoint && guarantee_violations == 0 && violations == 0; }
};

/// Enumerates every ordered pair of grid points, decides membership in
/// E(f, gamma) from the prefix sums directly, and looks for a covering 5J x 5J.
CoverVerdict verify_5J_cover(const PiecewiseConstantField& f, double gamma, const IntervalFamily& family,
                             const VitaliCover& cover, int workers = 0);

/// integral of |x - y|^{gamma - 1} over I x I = 2 |I|^{gamma+1} / (gamma (gamma + 1)).
double square_energy(double length, double gamma);

struct WeightedEnergy {
  double energy = 0.0;         // over the union of I x I, I in the family
  double selected_sum = 0.0;   // sum over J of |J|^{gamma + 1}
  double mass = 0.0;           // ||f||_1
  double constant = 0.0;       // 10 * 5^gamma / (gamma (gamma + 1))
  double bound_selected = 0.0;
  double bound_mass = 0.0;
  double empirical_c = 0.0;    // energy / (5^gamma / gamma * ||f||_1)
  bool chain_holds = true;
};

/// Exact integral of |x - y|^{gamma - 1} over the union of the squares I x I
/// of the family, summed cell by cell in closed form.
WeightedEnergy weighted_energy(const PiecewiseConstantField& f, double gamma, const IntervalFamily& family,
                               const VitaliCover& cover);

// ---------------------------------------------------------------------------
// Rotations

/// Non-negative density F on R^N with compact support.
struct Density {
  int dim = 1;
  Box support;
  double sup = 0.0;   // upper bound for F
  std::function<double(const Point&)> eval;
  std::vector<std::vector<double>> breakpoints;
};

/// F = kappa |u|.
Density density_abs(const ScalarField& u, double kappa);
/// F = |grad u|^p / lambda^p.
Density density_gradient_power(const ScalarField& u, double p, double lambda);

/// integral of F over the support (tensor Gauss with one refinement check).
QuadratureResult density_l1(const Density& F, int panels = 32);

/// integral_0^{|y - x|} F(x + t w) dt with w = (y - x)/|y - x|, clipped to the
/// support box; error by doubling the panel count.
/// Throws InvalidParameter when x == y.
QuadratureResult line_integral(const Density& F, const Point& x, const Point& y, int nodes = 64);

struct RotationOptions {
  int sphere_order = 32;
  int z_panels = 16;       // hyperplane grid per axis
  int z_order = 4;
  int t_panels = 16;       // start points along each line
  int t_order = 4;
  int line_cells = 64;     // cumulative integral table along each line
  int scan = 32;
  double tol = 1e-9;
  double rtol = 0.05;
  bool estimate_error = true;
  int workers = 0;
};

struct RotationMeasure {
  QuadratureResult measure;   // L^{2N}(E(F))
  double l1 = 0.0;            // ||F||_1
  double c_emp = 0.0;         // measure / ||F||_1
  double theory = 0.0;        // (C/2) 5^N sigma / N with C = 10/(N+1)
  bool within_theory = true;
};

/// L^{2N}{(x, y) : integral of F along [x, y] >= |x - y|^{N + 1}} by the
/// foliation R^N = w^perp + R w: for every sphere node and every point of a
/// hyperplane grid, the one-dimensional set is found with a cumulative
/// integral table and a radial scan. N in {1, 2, 3}.
RotationMeasure rotation_measure(const Density& F, const RotationOptions& opt = {});

/// Direct Monte Carlo over pairs, using line_integral on every sample.
QuadratureResult rotation_measure_mc(const Density& F, std::uint64_t n, const RandomStream& stream, int workers = 0);

struct HalfFactorCheck {
  double one_sided = 0.0;   // integral over s of the r > 0 radial set, weight r^{N-1}
  double two_sided = 0.0;   // integral over E(f, N) of |r - s|^{N-1}
  double ratio = 0.0;       // two_sided / one_sided, expected 2
};

/// Compares the two sides of the one-dimensional reduction on the line
/// {c + offset * w_perp + t w} through the support centre c (N = 2; for N = 1
/// the offset is ignored). The two-sided integral uses a grid x grid midpoint
/// sum independent of the scan.
HalfFactorCheck half_factor_check(const Density& F, const Point& w, double offset, int grid = 2000);

struct ContainmentVerdict {
  std::uint64_t samples = 0;
  std::uint64_t pairs_in_set = 0;
  std::uint64_t violations = 0;
  std::uint64_t roundoff_skipped = 0;  // |u(x) - u(y)| within 64 ulps of sup |u|
  double worst_margin = 0.0;  // min over pairs of (line integral - |x - y|^{N+1}) / |x - y|^{N+1}
  bool pass() const { return violations == 0; }
};

/// Draws pairs with the level-set sampler, keeps those in E_lambda
/// (alpha = N/p + 1), and checks that the line integral of |grad u|^p / lambda^p
/// along the segment is at least |x - y|^{N+1}. Pairs whose difference is at
/// roundoff level are counted separately and not judged.
ContainmentVerdict holder_containment_check(const ScalarField& u, double p, double lambda, std::uint64_t samples,
                                            const RandomStream& stream, int workers = 0);

}  // namespace weaklp
