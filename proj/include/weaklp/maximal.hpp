#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <vector>

#include "weaklp/fields.hpp"
#include "weaklp/levelset.hpp"
#include "weaklp/random.hpp"

namespace weaklp {

/// Non-negative cell values on a uniform grid over a box in R^N, N in {1, 2};
/// zero outside the box. Cell (i, j) has flat index i + n[0] * j.
class GriddedFunction {
 public:
  /// Throws InvalidParameter on a negative value, a bad dimension or a size
  /// mismatch.
  GriddedFunction(const Box& domain, std::array<int, 2> cells, std::vector<double> values);

  /// Samples g at the cell centres.
  static GriddedFunction sample(const std::function<double(const Point&)>& g, const Box& domain,
                                std::array<int, 2> cells);

  int dim() const { return domain_.dim; }
  const Box& domain() const { return domain_; }
  std::array<int, 2> cells() const { return cells_; }
  std::size_t size() const { return values_.size(); }
  double h(int axis) const { return domain_.side(axis) / cells_[axis]; }
  const std::vector<double>& values() const { return values_; }
  double operator[](std::size_t k) const { return values_[k]; }
  Point center(std::size_t k) const;
  /// Value of the cell containing x (0 outside the box).
  double value_at(const Point& x) const;
  double max() const;

 private:
  Box domain_;
  std::array<int, 2> cells_;
  std::vector<double> values_;
};

/// |grad u| sampled at the cell centres.
GriddedFunction gradient_magnitude_grid(const ScalarField& u, const Box& domain, std::array<int, 2> cells);

struct MaximalOptions {
  double ladder_ratio = 1.189207115002721;  // 2^{1/4}
  int polygon_sides = 16;                   // 2-D disk approximation
  int workers = 0;
};

/// Radii r0 * ratio^j up to (and including) the first one >= r_max. When
/// ratio = 2^{1/q} every q-th rung is an exact power of two times r0.
std::vector<double> radius_ladder(double r0, double r_max, double ratio);

/// Centred maximal function at the cell centres: the largest average of g over
/// B(x, r) for r on the ladder from the smallest cell width to the domain
/// diameter, and never below the cell value itself (the r -> 0 limit).
/// 1-D overlaps are exact; in 2-D the ball is the regular inscribed polygon and
/// the average is taken over the polygon.
GriddedFunction hl_maximal(const GriddedFunction& g, const MaximalOptions& opt = {});

/// The same sup at an arbitrary point x (the r -> 0 rung uses a radius of
/// 1e-9 cell widths).
double maximal_at(const GriddedFunction& g, const Point& x, const MaximalOptions& opt = {});

struct LusinRecord {
  std::uint64_t samples = 0;
  std::uint64_t valid_pairs = 0;
  std::uint64_t zero_denominator = 0;
  std::uint64_t zero_denominator_mismatch = 0;  // zero denominator but u(x) != u(y)
  double c_emp = 0.0;   // max of |u(x) - u(y)| / (|x - y| (M(x) + M(y)))
  Point worst_x{};
  Point worst_y{};
  bool pass() const { return zero_denominator_mismatch == 0; }
};

struct LusinOptions {
  int cells = 0;            // per axis; 0 picks 512 in 1-D and 64 in 2-D
  double margin = 0.5;      // domain = support box dilated by margin
  MaximalOptions maximal{};
  int workers = 0;
};

/// Samples pairs of cell centres (half uniform over the grid, half within a
/// few cells of each other) and records the empirical Lusin-Lipschitz constant
/// with M = M|grad u| on the grid. N in {1, 2}.
LusinRecord lusin_lipschitz_check(const ScalarField& u, std::uint64_t samples, const RandomStream& stream,
                                  const LusinOptions& opt = {});

struct MaximalRouteOptions {
  int cells = 0;                 // per axis for M|grad u|; 0 picks 1024 / 64
  int x_panels = 0;              // outer midpoint grid per axis; 0 uses the M grid
  int sphere_order = 32;
  int scan = 64;
  double tol = 1e-9;
  double constant_safety = 1.05; // C = safety * C_emp
  std::uint64_t lusin_samples = 20000;
  RandomStream stream{};
  PolarOptions direct{};
  MaximalOptions maximal{};
  int workers = 0;
};

struct MaximalRouteRecord {
  double p = 2.0;
  double constant = 0.0;                 // C used in 2 C / lambda
  double maximal_lp = 0.0;               // integral of (M|grad u|)^p over the grid box
  std::vector<double> lambdas;
  std::vector<double> bound;             // lambda^p mu(union of the maximal sets)
  std::vector<double> direct;            // lambda^p mu(E_lambda)
  std::vector<double> direct_error;
  std::vector<bool> dominated;
  bool all_dominated = true;
};

/// For every lambda, the pair set {|x - y|^{N/p} <= (2C/lambda) max(M(x), M(y))}
/// contains E_lambda (alpha = N/p + 1) by the Lusin-Lipschitz inequality; its
/// measure is computed by the polar scan and compared with the direct estimate.
/// Throws InvalidParameter for p <= 1 (the maximal theorem fails at p = 1) or
/// an empty or non-ascending lambda grid.
MaximalRouteRecord maximal_route_bound(const ScalarField& u, double p, const std::vector<double>& lambdas,
                                       const MaximalRouteOptions& opt = {});

}  // namespace weaklp
