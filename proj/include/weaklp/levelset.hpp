#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "weaklp/fields.hpp"
#include "weaklp/quadrature.hpp"
#include "weaklp/random.hpp"

namespace weaklp {

/// alpha = N/p + 1, the exponent for which lambda^p * mu(E_lambda) has a
/// finite nonzero limit.
double default_alpha(int dim, double p);

/// E_lambda = {(x, y) : |u(x) - u(y)| >= lambda * |x - y|^alpha}.
struct LevelSetQuery {
  ScalarField field;
  double p = 1.0;
  double alpha = 2.0;
  double lambda = 1.0;

  /// Query with alpha = N/p + 1.
  static LevelSetQuery standard(const ScalarField& u, double p, double lambda);
  /// Throws InvalidParameter unless p >= 1, alpha > 0 and lambda > 0.
  void validate() const;
};

/// Largest |x - y| a pair in E_lambda can have: (L/lambda)^{1/(alpha-1)} when
/// alpha > 1, and always (2 ||u||_inf / lambda)^{1/alpha}. 0 for the zero field.
double truncation_radius(const LevelSetQuery& q);

struct ScanOptions {
  int scan = 1024;          // uniform samples over the admissible r-range
  double tol = 1e-10;       // bisection width, relative to the scanned range
  int crossing_cap = 64;
};

/// {r in (0, r_max] : x + r w in E_lambda(x, .)} as disjoint sorted intervals.
struct RadialProfile {
  Point x{};
  Point direction{};
  double r_max = 0.0;
  std::vector<std::pair<double, double>> intervals;  // (lo, hi]
  int crossings = 0;
  bool crossing_cap_hit = false;

  /// integral of r^{N-1} over the intervals.
  double polar_measure(int dim) const;
};

/// Scans g(r) = |u(x + r w) - u(x)| - lambda r^alpha for sign changes and
/// bisects each one. Only the part of the ray inside the support box is
/// scanned; beyond it u(x + r w) = 0 and membership is decided exactly.
/// Throws InvalidParameter when scan < 16.
RadialProfile radial_levelset(const LevelSetQuery& q, const Point& x, const Point& w,
                              const ScanOptions& opt = {});

/// Radii from the proof of the limit formula (alpha = N/p + 1):
///   lower = min{delta |grad u(x).w| / A, ((1 - delta) |grad u(x).w| / lambda)^{p/N}}
///   upper = ((|grad u(x).w| + A (L/lambda)^{p/N}) / lambda)^{p/N},
///           or 0 when dist(x, supp u) > 1.
struct SandwichBounds {
  double lower = 0.0;
  double upper = 0.0;
  double delta = 0.5;
};

/// Throws PreconditionError unless lambda > L, InvalidParameter unless
/// delta in (0, 1).
SandwichBounds sandwich_bounds(const ScalarField& u, double p, double lambda, const Point& x,
                               const Point& w, double delta);

struct SandwichVerdict {
  std::uint64_t samples = 0;
  std::uint64_t lower_violations = 0;  // (0, lower] not inside the profile
  std::uint64_t upper_violations = 0;  // profile reaching beyond upper
  std::uint64_t nonempty = 0;          // samples with a nonempty profile
  /// lower check not judged: |grad u(x).w| * lower is below 64 ulps of sup|u|,
  /// so u(x + r w) - u(x) rounds to 0 on the whole lower segment
  std::uint64_t roundoff_skipped = 0;
  bool vacuous = false;                // zero field
  bool pass() const { return lower_violations == 0 && upper_violations == 0; }
};

/// Samples x uniformly in the support box dilated by 1.25 and w uniformly on
/// the sphere, and checks the two containments against radial_levelset.
SandwichVerdict verify_sandwich(const ScalarField& u, double p, double lambda, std::uint64_t samples,
                                double delta, const RandomStream& stream, const ScanOptions& opt = {},
                                int workers = 0);

struct PolarOptions {
  int x_panels = 16;        // composite Gauss panels per axis of the x box
  int x_order = 4;
  int sphere_order = 32;
  ScanOptions scan{64, 1e-9, 64};
  /// Outer integration box; by default the support box dilated by r_max.
  /// A user box must cover that dilate (PreconditionError otherwise).
  std::optional<Box> x_box;
  /// Convergence when |fine - coarse| <= rtol * fine; the coarse level halves
  /// panels, sphere order and scan.
  double rtol = 0.05;
  bool estimate_error = true;
  int workers = 0;
};

/// mu(E_lambda) = int_x int_{S^{N-1}} int 1_E r^{N-1} dr dw dx with the radial
/// integral exact on every scanned interval.
QuadratureResult pair_measure_polar(const LevelSetQuery& q, const PolarOptions& opt = {});

/// Monte Carlo: x uniform on the support box dilated by r_max, w uniform,
/// r with density proportional to r^{N-1} on (0, r_max].
/// Throws InvalidParameter when n < 1000.
QuadratureResult pair_measure_mc(const LevelSetQuery& q, std::uint64_t n, const RandomStream& stream,
                                 int workers = 0);

enum class Estimator { polar, mc };
std::string to_string(Estimator e);
Estimator estimator_from_string(const std::string& s);

struct ProfileOptions {
  Estimator estimator = Estimator::polar;
  PolarOptions polar{};
  std::uint64_t mc_samples = 200000;
  RandomStream stream{};
  int workers = 0;
};

/// n log-spaced points from lo to hi inclusive.
std::vector<double> log_grid(double lo, double hi, int n);

struct DistributionProfile {
  ScalarField field;
  double p = 1.0;
  double alpha = 2.0;
  ProfileOptions options;
  std::vector<double> lambdas;
  std::vector<QuadratureResult> measures;
  /// indices i with mu(i+1) > mu(i) + err(i) + err(i+1)
  std::vector<int> monotonicity_violations;

  std::size_t size() const { return lambdas.size(); }
  double lambda_pow_p_mu(std::size_t i) const;
  bool all_converged() const;
};

/// Throws InvalidParameter on an empty or non-ascending grid.
DistributionProfile distribution_profile(const ScalarField& u, double p, double alpha,
                                         const std::vector<double>& lambdas, const ProfileOptions& opt = {});

/// Estimate of lambda^p mu at one extra lambda with the profile's settings;
/// `salt` distinguishes Monte Carlo streams.
QuadratureResult profile_measure_at(const DistributionProfile& prof, double lambda, std::uint64_t salt);

struct WeakQuasinorm {
  double value = 0.0;        // sup of lambda^p mu over grid and refinement
  double quasinorm = 0.0;    // value^{1/p}
  double lambda_at_sup = 0.0;
  double grid_value = 0.0;
  std::size_t grid_argmax = 0;
  bool at_grid_edge = false;
  bool converged = true;     // estimate at the reported sup converged
  int evaluations = 0;
};

/// Grid sup (smallest argmax on ties), then `refine` golden-section steps in
/// log lambda over the two neighbouring grid cells.
WeakQuasinorm weak_quasinorm(const DistributionProfile& prof, int refine = 8);

struct LimitEstimate {
  double plateau = 0.0;
  double flatness = 0.0;
  bool converged = false;
  int window = 0;
  double tolerance = 0.03;
};

/// Plateau = mean of the last m values of lambda^p mu; flatness = largest
/// relative deviation from it inside the window.
LimitEstimate tail_limit(const DistributionProfile& prof, int window, double tol = 0.03);

/// k(p, N) / N * ||grad u||_p^p.
double limit_prediction(const ScalarField& u, double p);

}  // namespace weaklp
