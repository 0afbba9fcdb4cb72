#pragma once

#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "weaklp/geometry.hpp"
#include "weaklp/quadrature.hpp"

namespace weaklp {

/// Where a bound comes from: an exact formula, or a maximum observed on a fine
/// sweep inflated by kCertificationSafety.
enum class BoundSource { closed_form, certified_grid };

inline constexpr double kCertificationSafety = 1.05;
inline constexpr int kCertificationPoints = 1 << 12;

/// Upper bounds used by the radial truncation and the sandwich radii:
/// lip >= sup|grad u|, hess >= sup|D^2 u| (operator norm), sup >= sup|u|.
struct FieldBounds {
  double lip = 0.0;
  double hess = 0.0;
  double sup = 0.0;
  BoundSource lip_source = BoundSource::closed_form;
  BoundSource hess_source = BoundSource::closed_form;
  BoundSource sup_source = BoundSource::closed_form;
};

class FieldImpl {
 public:
  virtual ~FieldImpl() = default;
  virtual int dim() const = 0;
  virtual double value(const Point& x) const = 0;
  virtual Point gradient(const Point& x) const = 0;
  /// Closed box outside of which the function vanishes identically.
  virtual Box support_box() const = 0;
  virtual FieldBounds bounds() const = 0;
  /// Per-axis coordinates where the function changes character (centres,
  /// support edges, transition layers). Used to align quadrature panels.
  virtual std::vector<std::vector<double>> breakpoints() const = 0;
  virtual std::string describe() const = 0;
};

/// Smooth compactly supported test function with exact gradient and certified
/// bounds. Immutable and cheap to copy; safe to evaluate from many threads.
class ScalarField {
 public:
  ScalarField() = default;
  explicit ScalarField(std::shared_ptr<const FieldImpl> impl, std::string label = {});

  int dimension() const { return dim_; }
  double operator()(const Point& x) const { return impl_->value(x); }
  double evaluate(const Point& x) const { return impl_->value(x); }
  Point gradient(const Point& x) const { return impl_->gradient(x); }

  const Box& support_box() const { return support_; }
  /// Radius of the origin-centred ball outside of which u == 0.
  double support_radius() const { return support_radius_; }
  /// Distance from x to a closed superset of supp u.
  double distance_to_support(const Point& x) const { return support_.distance_to(x); }

  const FieldBounds& bounds() const { return bounds_; }
  double lip() const { return bounds_.lip; }
  double hess() const { return bounds_.hess; }
  double sup_norm() const { return bounds_.sup; }
  bool is_zero() const { return bounds_.sup == 0.0; }

  std::vector<std::vector<double>> breakpoints() const { return impl_->breakpoints(); }
  const std::string& label() const { return label_; }
  const FieldImpl& impl() const { return *impl_; }
  const std::shared_ptr<const FieldImpl>& impl_ptr() const { return impl_; }

 private:
  std::shared_ptr<const FieldImpl> impl_;
  int dim_ = 0;
  Box support_{};
  double support_radius_ = 0.0;
  FieldBounds bounds_{};
  std::string label_;
};

/// a * exp(-1 / (1 - |x - c|^2 / r^2)) inside the ball, 0 outside.
/// Throws InvalidParameter unless radius > 0 and 1 <= dim <= 4.
ScalarField make_bump(const Point& center, double radius, double amplitude, int dim);

/// a * prod_i phi((x_i - c_i) / r_i) with the 1-D bump phi; supported on a box.
ScalarField make_product_bump(const Point& center, const Point& radii, double amplitude, int dim);

/// Indicator of `box` convolved with the normalised bump mollifier of width
/// epsilon on each axis: 1 on the epsilon-eroded box, 0 off the dilated box.
/// Throws InvalidParameter unless 0 < epsilon < half the shortest side.
ScalarField make_mollified_indicator(const Box& box, double epsilon);

/// sum_i w_i u_i; all terms must share a dimension.
ScalarField make_sum(const std::vector<std::pair<double, ScalarField>>& terms);

ScalarField make_zero(int dim);

/// c * u; bounds scale by |c| exactly.
ScalarField scaled(const ScalarField& u, double factor);

/// x -> u(x - shift)
ScalarField translated(const ScalarField& u, const Point& shift);

/// Named fields used by the experiments and the acceptance suite.
/// Names: bump, bump_offset, bump_pair, product_bump, mollified_box.
ScalarField catalogue_field(const std::string& name, int dim);
std::vector<std::string> catalogue_names(int dim);
std::vector<ScalarField> catalogue(int dim);

/// integral over R^N of |grad u|^p; the domain is the support box (exact, no
/// truncation). error_estimate = |Q(2 panels) - Q(panels)|; converged when it
/// is below rtol * |value| (+ 1e-300).
QuadratureResult gradient_lp_norm(const ScalarField& u, double p, int panels = 64,
                                  double rtol = 1e-6, int order = 8);

/// integral over R^N of |u|^p, same conventions.
QuadratureResult lp_norm_pow(const ScalarField& u, double p, int panels = 64,
                             double rtol = 1e-6, int order = 8);

/// The 1-D bump profile phi(t) = exp(-1/(1-t^2)) on (-1, 1) and its derivatives.
double bump_profile(double t);
double bump_profile_d1(double t);
double bump_profile_d2(double t);
/// integral of phi over [-1, 1].
double bump_profile_mass();
/// Smoothed Heaviside: (1/Z) * integral_{-1}^{z} phi.
double mollified_step(double z);

}  // namespace weaklp
