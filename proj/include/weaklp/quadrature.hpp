#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "weaklp/geometry.hpp"
#include "weaklp/random.hpp"

namespace weaklp {

/// Value of an integral or measure together with how much we trust it.
struct QuadratureResult {
  double value = 0.0;
  double error_estimate = 0.0;
  std::size_t nodes_used = 0;
  bool converged = true;
};

/// Nodes and weights of a one-dimensional rule.
struct Rule1D {
  std::vector<double> nodes;
  std::vector<double> weights;

  std::size_t size() const { return nodes.size(); }
};

/// n-point Gauss-Legendre rule on [-1, 1]; exact for degree <= 2n - 1.
/// Throws InvalidParameter for n < 1.
const Rule1D& gauss_nodes_1d(int n);

/// Composite Gauss-Legendre rule on [a, b]. Panel edges always include every
/// breakpoint strictly inside (a, b); the `panels` budget is spread over the
/// resulting segments in proportion to their length (at least one each).
Rule1D composite_gauss(double a, double b, int panels, int order,
                       std::span<const double> breakpoints = {});

/// Tensor product of per-axis rules over a box.
class TensorGrid {
 public:
  TensorGrid(int dim, std::vector<Rule1D> axes);

  /// Composite Gauss on every axis of `box`, `panels` per axis.
  static TensorGrid over_box(const Box& box, int panels, int order,
                             const std::vector<std::vector<double>>& breakpoints = {});

  int dim() const { return dim_; }
  std::size_t size() const { return size_; }

  /// Writes node `index` into x and returns its weight.
  double node(std::size_t index, Point& x) const;

 private:
  int dim_;
  std::vector<Rule1D> axes_;
  std::size_t size_;
};

/// Quadrature rule on the unit sphere S^{N-1}.
struct SphereRule {
  int dim = 1;
  std::vector<Point> nodes;
  std::vector<double> weights;

  std::size_t size() const { return nodes.size(); }
};

/// Surface area sigma_{N-1} of S^{N-1}.
double sphere_area(int dim);

/// N = 1: {-1, +1} with unit weights. N = 2: `order` equispaced angles.
/// N = 3, 4: Gauss nodes in the latitude (two panels split at the equator,
/// `order` nodes in total) times a rule on S^{N-2} with 2*order azimuths.
/// Throws InvalidParameter outside N in {1, 2, 3, 4}.
SphereRule sphere_rule(int dim, int order);

/// Same, with independent latitude and azimuth resolutions.
SphereRule sphere_rule(int dim, int polar_order, int azimuth_order);

/// For antipodally symmetric rules, keeps one node of each {w, -w} pair with
/// doubled weight. Integrands invariant under w -> -w integrate identically.
std::optional<SphereRule> antipodal_half(const SphereRule& rule);

/// k(p, N) = integral over S^{N-1} of |e . w|^p.
struct SphereConstants {
  double k = 0.0;        // closed form, used downstream
  double k_quadrature = 0.0;
  double sigma = 0.0;    // sigma_{N-1}
};

double k_closed_form(double p, int dim);

/// Closed form validated against a sphere quadrature; throws ConsistencyError
/// when they disagree by more than 1e-6 relative.
SphereConstants k_constant(double p, int dim);

/// c(N) = k(1, N) * min{1/N, 1/sigma_{N-1}}: the dimensional constant in the
/// lower bound of the weak quasinorm.
double lower_constant_cN(int dim);

/// Draws point `index` of a sample and reports the measure of the sampled
/// domain (the estimate is measure * mean of the integrand).
struct Sampler {
  std::function<Point(const RandomStream&, std::uint64_t)> draw;
  double measure = 1.0;
};

/// Plain Monte Carlo with standard error. Sample i only uses draws keyed by i,
/// and partial sums are combined in a fixed block order, so the result is bit
/// identical for any worker count.
QuadratureResult monte_carlo(const std::function<double(const Point&)>& integrand,
                             const Sampler& sampler, std::uint64_t n,
                             const RandomStream& stream, int workers = 0);

/// Block size used by every Monte Carlo reduction in the library.
inline constexpr std::uint64_t kMonteCarloBlock = 4096;

}  // namespace weaklp
