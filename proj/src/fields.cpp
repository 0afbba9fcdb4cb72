#include "weaklp/fields.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <sstream>

#include "field_impl.hpp"
#include "weaklp/errors.hpp"

namespace weaklp {

// ---------------------------------------------------------------------------
// 1-D bump profile

double bump_profile(double t) {
  double q = 1.0 - t * t;
  if (q <= 0.0) return 0.0;
  return std::exp(-1.0 / q);
}

double bump_profile_d1(double t) {
  double q = 1.0 - t * t;
  if (q <= 0.0) return 0.0;
  return std::exp(-1.0 / q) * (-2.0 * t / (q * q));
}

double bump_profile_d2(double t) {
  double q = 1.0 - t * t;
  if (q <= 0.0) return 0.0;
  double h = -2.0 * t / (q * q);
  double dh = -2.0 / (q * q) - 8.0 * t * t / (q * q * q);
  return std::exp(-1.0 / q) * (h * h + dh);
}

namespace {

// Certified maxima of the profile derivatives on a uniform sweep.
struct ProfileMaxima {
  double d1;           // max |phi'|
  double d2;           // max |phi''|
  double radial_hess;  // max over t of max(|phi''(t)|, |phi'(t)/t|)
};

const ProfileMaxima& profile_maxima() {
  static const ProfileMaxima m = [] {
    ProfileMaxima r{0.0, 0.0, 0.0};
    const int n = kCertificationPoints;
    for (int i = 0; i < n; ++i) {
      double t = (i + 0.5) / n;
      double d1 = std::abs(bump_profile_d1(t));
      double d2 = std::abs(bump_profile_d2(t));
      r.d1 = std::max(r.d1, d1);
      r.d2 = std::max(r.d2, d2);
      r.radial_hess = std::max({r.radial_hess, d2, d1 / t});
    }
    r.d1 *= kCertificationSafety;
    r.d2 *= kCertificationSafety;
    r.radial_hess *= kCertificationSafety;
    return r;
  }();
  return m;
}

// Quintic Hermite table of the normalised cumulative bump on [-1, 1], built
// from exact values of phi and phi' at the nodes.
class StepTable {
 public:
  static constexpr int kCells = 2048;

  StepTable() {
    const Rule1D& g = gauss_nodes_1d(16);
    value_.resize(kCells + 1);
    double acc = 0.0;
    value_[0] = 0.0;
    for (int k = 0; k < kCells; ++k) {
      double a = -1.0 + 2.0 * k / kCells;
      double h = 2.0 / kCells;
      double s = 0.0;
      for (std::size_t j = 0; j < g.size(); ++j) s += g.weights[j] * bump_profile(a + 0.5 * h * (g.nodes[j] + 1.0));
      acc += 0.5 * h * s;
      value_[k + 1] = acc;
    }
    mass_ = acc;
    for (double& v : value_) v /= mass_;
    value_[kCells] = 1.0;
  }

  double mass() const { return mass_; }

  double operator()(double z) const {
    if (z <= -1.0) return 0.0;
    if (z >= 1.0) return 1.0;
    const double h = 2.0 / kCells;
    double pos = (z + 1.0) / h;
    int k = std::min(static_cast<int>(pos), kCells - 1);
    double t = pos - k;
    double z0 = -1.0 + k * h, z1 = z0 + h;
    double d0 = bump_profile(z0) / mass_, d1 = bump_profile(z1) / mass_;
    double s0 = bump_profile_d1(z0) / mass_, s1 = bump_profile_d1(z1) / mass_;
    double t2 = t * t, t3 = t2 * t, t4 = t3 * t, t5 = t4 * t;
    double h0 = 1.0 - 10.0 * t3 + 15.0 * t4 - 6.0 * t5;
    double h1 = t - 6.0 * t3 + 8.0 * t4 - 3.0 * t5;
    double h2 = 0.5 * (t2 - 3.0 * t3 + 3.0 * t4 - t5);
    double h3 = 10.0 * t3 - 15.0 * t4 + 6.0 * t5;
    double h4 = -4.0 * t3 + 7.0 * t4 - 3.0 * t5;
    double h5 = 0.5 * (t3 - 2.0 * t4 + t5);
    double v = h0 * value_[k] + h1 * h * d0 + h2 * h * h * s0 + h3 * value_[k + 1] + h4 * h * d1 + h5 * h * h * s1;
    return std::clamp(v, 0.0, 1.0);
  }

 private:
  std::vector<double> value_;
  double mass_ = 0.0;
};

const StepTable& step_table() {
  static const StepTable table;
  return table;
}

void check_dim(int dim, const char* who) {
  if (dim < 1 || dim > kMaxDim)
    throw InvalidParameter(std::string(who) + ": dimension must be in [1, " + std::to_string(kMaxDim) + "]");
}

std::string fmt_point(const Point& p, int dim) {
  std::ostringstream os;
  os << "(";
  for (int i = 0; i < dim; ++i) os << (i ? "," : "") << p[i];
  os << ")";
  return os.str();
}

}  // namespace

double bump_profile_mass() { return step_table().mass(); }
double mollified_step(double z) { return step_table()(z); }

// ---------------------------------------------------------------------------

ScalarField::ScalarField(std::shared_ptr<const FieldImpl> impl, std::string label)
    : impl_(std::move(impl)), label_(std::move(label)) {
  dim_ = impl_->dim();
  support_ = impl_->support_box();
  bounds_ = impl_->bounds();
  double r2 = 0.0;
  for (int i = 0; i < dim_; ++i) {
    double c = std::max(std::abs(support_.lo[i]), std::abs(support_.hi[i]));
    r2 += c * c;
  }
  support_radius_ = std::sqrt(r2);
  if (label_.empty()) label_ = impl_->describe();
}

namespace detail {

// ---------------------------------------------------------------------------
// Radial bump

BumpField::BumpField(int dim, const Point& center, double radius, double amplitude)
    : dim_(dim), center_(center), radius_(radius), amplitude_(amplitude) {}

double BumpField::value(const Point& x) const {
  double s = 0.0;
  for (int i = 0; i < dim_; ++i) {
    double d = x[i] - center_[i];
    s += d * d;
  }
  s /= radius_ * radius_;
  if (s >= 1.0) return 0.0;
  return amplitude_ * std::exp(-1.0 / (1.0 - s));
}

Point BumpField::gradient(const Point& x) const {
  Point g{};
  double s = 0.0;
  for (int i = 0; i < dim_; ++i) {
    double d = x[i] - center_[i];
    s += d * d;
  }
  double r2 = radius_ * radius_;
  s /= r2;
  if (s >= 1.0) return g;
  double q = 1.0 - s;
  double f = amplitude_ * std::exp(-1.0 / q) * (-2.0 / (q * q * r2));
  for (int i = 0; i < dim_; ++i) g[i] = f * (x[i] - center_[i]);
  return g;
}

Box BumpField::support_box() const {
  Box b;
  b.dim = dim_;
  for (int i = 0; i < dim_; ++i) {
    b.lo[i] = center_[i] - radius_;
    b.hi[i] = center_[i] + radius_;
  }
  return b;
}

FieldBounds BumpField::bounds() const {
  const ProfileMaxima& m = profile_maxima();
  double a = std::abs(amplitude_);
  FieldBounds b;
  b.sup = a * std::exp(-1.0);
  b.lip = a * m.d1 / radius_;
  b.hess = a * (dim_ == 1 ? m.d2 : m.radial_hess) / (radius_ * radius_);
  b.lip_source = BoundSource::certified_grid;
  b.hess_source = BoundSource::certified_grid;
  return b;
}

std::vector<std::vector<double>> BumpField::breakpoints() const {
  std::vector<std::vector<double>> bp(dim_);
  for (int i = 0; i < dim_; ++i) bp[i] = {center_[i] - radius_, center_[i], center_[i] + radius_};
  return bp;
}

std::string BumpField::describe() const {
  std::ostringstream os;
  os << "bump(center=" << fmt_point(center_, dim_) << ",radius=" << radius_ << ",amplitude=" << amplitude_ << ")";
  return os.str();
}

// ---------------------------------------------------------------------------
// Product bump

ProductBumpField::ProductBumpField(int dim, const Point& center, const Point& radii, double amplitude)
    : dim_(dim), center_(center), radii_(radii), amplitude_(amplitude) {}

double ProductBumpField::value(const Point& x) const {
  double v = amplitude_;
  for (int i = 0; i < dim_; ++i) {
    double t = (x[i] - center_[i]) / radii_[i];
    if (t <= -1.0 || t >= 1.0) return 0.0;
    v *= bump_profile(t);
  }
  return v;
}

Point ProductBumpField::gradient(const Point& x) const {
  Point g{};
  std::array<double, kMaxDim> f{}, df{};
  for (int i = 0; i < dim_; ++i) {
    double t = (x[i] - center_[i]) / radii_[i];
    if (t <= -1.0 || t >= 1.0) return g;
    f[i] = bump_profile(t);
    df[i] = bump_profile_d1(t) / radii_[i];
  }
  for (int i = 0; i < dim_; ++i) {
    double v = amplitude_ * df[i];
    for (int j = 0; j < dim_; ++j)
      if (j != i) v *= f[j];
    g[i] = v;
  }
  return g;
}

Box ProductBumpField::support_box() const {
  Box b;
  b.dim = dim_;
  for (int i = 0; i < dim_; ++i) {
    b.lo[i] = center_[i] - radii_[i];
    b.hi[i] = center_[i] + radii_[i];
  }
  return b;
}

FieldBounds ProductBumpField::bounds() const {
  const ProfileMaxima& m = profile_maxima();
  const double top = std::exp(-1.0);
  double a = std::abs(amplitude_);
  FieldBounds b;
  b.sup = a * std::pow(top, dim_);
  double l2 = 0.0;
  for (int i = 0; i < dim_; ++i) l2 += std::pow(m.d1 / radii_[i], 2);
  b.lip = a * std::sqrt(l2) * std::pow(top, dim_ - 1);
  double h2 = 0.0;
  for (int i = 0; i < dim_; ++i) {
    h2 += std::pow(m.d2 / (radii_[i] * radii_[i]) * std::pow(top, dim_ - 1), 2);
    for (int j = 0; j < dim_; ++j)
      if (j != i) h2 += std::pow(m.d1 * m.d1 / (radii_[i] * radii_[j]) * std::pow(top, dim_ - 2), 2);
  }
  b.hess = a * std::sqrt(h2);
  b.lip_source = BoundSource::certified_grid;
  b.hess_source = BoundSource::certified_grid;
  return b;
}

std::vector<std::vector<double>> ProductBumpField::breakpoints() const {
  std::vector<std::vector<double>> bp(dim_);
  for (int i = 0; i < dim_; ++i) bp[i] = {center_[i] - radii_[i], center_[i], center_[i] + radii_[i]};
  return bp;
}

std::string ProductBumpField::describe() const {
  std::ostringstream os;
  os << "product_bump(center=" << fmt_point(center_, dim_) << ",radii=" << fmt_point(radii_, dim_)
     << ",amplitude=" << amplitude_ << ")";
  return os.str();
}

// ---------------------------------------------------------------------------
// Mollified indicator

MollifiedIndicatorField::MollifiedIndicatorField(const Box& box, double epsilon) : box_(box), epsilon_(epsilon) {}

double MollifiedIndicatorField::profile(int axis, double t) const {
  const StepTable& H = step_table();
  return H((t - box_.lo[axis]) / epsilon_) - H((t - box_.hi[axis]) / epsilon_);
}

double MollifiedIndicatorField::profile_d1(int axis, double t) const {
  double z = step_table().mass() * epsilon_;
  return (bump_profile((t - box_.lo[axis]) / epsilon_) - bump_profile((t - box_.hi[axis]) / epsilon_)) / z;
}

double MollifiedIndicatorField::value(const Point& x) const {
  double v = 1.0;
  for (int i = 0; i < box_.dim; ++i) {
    if (x[i] <= box_.lo[i] - epsilon_ || x[i] >= box_.hi[i] + epsilon_) return 0.0;
    v *= profile(i, x[i]);
  }
  return v;
}

Point MollifiedIndicatorField::gradient(const Point& x) const {
  Point g{};
  std::array<double, kMaxDim> f{}, df{};
  for (int i = 0; i < box_.dim; ++i) {
    if (x[i] <= box_.lo[i] - epsilon_ || x[i] >= box_.hi[i] + epsilon_) return g;
    f[i] = profile(i, x[i]);
    df[i] = profile_d1(i, x[i]);
  }
  for (int i = 0; i < box_.dim; ++i) {
    double v = df[i];
    for (int j = 0; j < box_.dim; ++j)
      if (j != i) v *= f[j];
    g[i] = v;
  }
  return g;
}

Box MollifiedIndicatorField::support_box() const { return box_.dilated(epsilon_); }

FieldBounds MollifiedIndicatorField::bounds() const {
  const ProfileMaxima& m = profile_maxima();
  const double z = step_table().mass();
  const int n = box_.dim;
  double d1 = std::exp(-1.0) / (z * epsilon_);
  double d2 = m.d1 / (z * epsilon_ * epsilon_);
  FieldBounds b;
  b.sup = 1.0;
  b.lip = std::sqrt(static_cast<double>(n)) * d1;
  b.hess = std::sqrt(n * d2 * d2 + n * (n - 1.0) * d1 * d1 * d1 * d1);
  b.lip_source = BoundSource::closed_form;
  b.hess_source = BoundSource::certified_grid;
  return b;
}

std::vector<std::vector<double>> MollifiedIndicatorField::breakpoints() const {
  std::vector<std::vector<double>> bp(box_.dim);
  for (int i = 0; i < box_.dim; ++i)
    bp[i] = {box_.lo[i] - epsilon_, box_.lo[i], box_.lo[i] + epsilon_,
             box_.hi[i] - epsilon_, box_.hi[i], box_.hi[i] + epsilon_};
  return bp;
}

std::string MollifiedIndicatorField::describe() const {
  std::ostringstream os;
  os << "mollified_indicator(lower=" << fmt_point(box_.lo, box_.dim) << ",upper=" << fmt_point(box_.hi, box_.dim)
     << ",epsilon=" << epsilon_ << ")";
  return os.str();
}

// ---------------------------------------------------------------------------
// Sums and wrappers

SumField::SumField(std::vector<std::pair<double, ScalarField>> terms) : dim_(0), terms_(std::move(terms)) {
  if (terms_.empty()) throw InvalidParameter("make_sum: at least one term required");
  dim_ = terms_.front().second.dimension();
  for (const auto& t : terms_)
    if (t.second.dimension() != dim_) throw InvalidParameter("make_sum: terms must share a dimension");
}

double SumField::value(const Point& x) const {
  double v = 0.0;
  for (const auto& [w, f] : terms_)
    if (f.support_box().contains(x)) v += w * f(x);
  return v;
}

Point SumField::gradient(const Point& x) const {
  Point g{};
  for (const auto& [w, f] : terms_) {
    if (!f.support_box().contains(x)) continue;
    Point gi = f.gradient(x);
    for (int i = 0; i < dim_; ++i) g[i] += w * gi[i];
  }
  return g;
}

Box SumField::support_box() const {
  Box b = terms_.front().second.support_box();
  for (const auto& t : terms_) b = hull(b, t.second.support_box());
  return b;
}

FieldBounds SumField::bounds() const {
  bool disjoint = true;
  for (std::size_t i = 0; i < terms_.size(); ++i)
    for (std::size_t j = i + 1; j < terms_.size(); ++j)
      if (terms_[i].second.support_box().intersects(terms_[j].second.support_box())) disjoint = false;
  FieldBounds b;
  auto worst = [](BoundSource a, BoundSource c) {
    return (a == BoundSource::certified_grid || c == BoundSource::certified_grid) ? BoundSource::certified_grid
                                                                               : BoundSource::closed_form;
  };
  for (const auto& [w, f] : terms_) {
    const FieldBounds& t = f.bounds();
    double aw = std::abs(w);
    if (disjoint) {
      // every point sees at most one term
      b.sup = std::max(b.sup, aw * t.sup);
      b.lip = std::max(b.lip, aw * t.lip);
      b.hess = std::max(b.hess, aw * t.hess);
    } else {
      b.sup += aw * t.sup;
      b.lip += aw * t.lip;
      b.hess += aw * t.hess;
    }
    b.sup_source = worst(b.sup_source, t.sup_source);
    b.lip_source = worst(b.lip_source, t.lip_source);
    b.hess_source = worst(b.hess_source, t.hess_source);
  }
  return b;
}

std::vector<std::vector<double>> SumField::breakpoints() const {
  std::vector<std::vector<double>> bp(dim_);
  for (const auto& t : terms_) {
    auto tb = t.second.breakpoints();
    for (int i = 0; i < dim_ && i < static_cast<int>(tb.size()); ++i) bp[i].insert(bp[i].end(), tb[i].begin(), tb[i].end());
  }
  for (auto& v : bp) std::sort(v.begin(), v.end());
  return bp;
}

std::string SumField::describe() const {
  std::ostringstream os;
  os << "sum(";
  for (std::size_t i = 0; i < terms_.size(); ++i)
    os << (i ? " + " : "") << terms_[i].first << "*" << terms_[i].second.impl().describe();
  os << ")";
  return os.str();
}

Box ZeroField::support_box() const {
  Box b;
  b.dim = dim_;
  for (int i = 0; i < dim_; ++i) {
    b.lo[i] = -1.0;
    b.hi[i] = 1.0;
  }
  return b;
}

Point ScaledField::gradient(const Point& x) const {
  Point g = inner_.gradient(x);
  for (int i = 0; i < inner_.dimension(); ++i) g[i] *= factor_;
  return g;
}

FieldBounds ScaledField::bounds() const {
  FieldBounds b = inner_.bounds();
  double a = std::abs(factor_);
  b.sup *= a;
  b.lip *= a;
  b.hess *= a;
  return b;
}

std::string ScaledField::describe() const {
  std::ostringstream os;
  os << factor_ << "*" << inner_.impl().describe();
  return os.str();
}

Box TranslatedField::support_box() const {
  Box b = inner_.support_box();
  for (int i = 0; i < b.dim; ++i) {
    b.lo[i] += shift_[i];
    b.hi[i] += shift_[i];
  }
  return b;
}

std::vector<std::vector<double>> TranslatedField::breakpoints() const {
  auto bp = inner_.breakpoints();
  for (std::size_t i = 0; i < bp.size(); ++i)
    for (double& v : bp[i]) v += shift_[i];
  return bp;
}

std::string TranslatedField::describe() const {
  return "translate(" + fmt_point(shift_, inner_.dimension()) + ")*" + inner_.impl().describe();
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Factories

ScalarField make_bump(const Point& center, double radius, double amplitude, int dim) {
  check_dim(dim, "make_bump");
  if (!(radius > 0.0)) throw InvalidParameter("make_bump: radius must be positive");
  return ScalarField(std::make_shared<detail::BumpField>(dim, center, radius, amplitude));
}

ScalarField make_product_bump(const Point& center, const Point& radii, double amplitude, int dim) {
  check_dim(dim, "make_product_bump");
  for (int i = 0; i < dim; ++i)
    if (!(radii[i] > 0.0)) throw InvalidParameter("make_product_bump: radii must be positive");
  return ScalarField(std::make_shared<detail::ProductBumpField>(dim, center, radii, amplitude));
}

ScalarField make_mollified_indicator(const Box& box, double epsilon) {
  check_dim(box.dim, "make_mollified_indicator");
  double shortest = box.side(0);
  for (int i = 1; i < box.dim; ++i) shortest = std::min(shortest, box.side(i));
  if (!(epsilon > 0.0) || !(epsilon < 0.5 * shortest))
    throw InvalidParameter("make_mollified_indicator: epsilon must lie in (0, shortest side / 2)");
  return ScalarField(std::make_shared<detail::MollifiedIndicatorField>(box, epsilon));
}

ScalarField make_sum(const std::vector<std::pair<double, ScalarField>>& terms) {
  return ScalarField(std::make_shared<detail::SumField>(terms));
}

ScalarField make_zero(int dim) {
  check_dim(dim, "make_zero");
  return ScalarField(std::make_shared<detail::ZeroField>(dim), "zero");
}

ScalarField scaled(const ScalarField& u, double factor) {
  std::ostringstream os;
  os << u.label() << "*" << factor;
  return ScalarField(std::make_shared<detail::ScaledField>(u, factor), os.str());
}

ScalarField translated(const ScalarField& u, const Point& shift) {
  return ScalarField(std::make_shared<detail::TranslatedField>(u, shift), u.label() + "+shift");
}

std::vector<std::string> catalogue_names(int dim) {
  (void)dim;
  return {"bump", "bump_offset", "bump_pair", "product_bump", "mollified_box"};
}

ScalarField catalogue_field(const std::string& name, int dim) {
  check_dim(dim, "catalogue_field");
  auto pt = [dim](std::initializer_list<double> v) {
    Point p{};
    int i = 0;
    for (double x : v) {
      if (i < dim) p[i] = x;
      ++i;
    }
    return p;
  };
  auto filled = [dim](double v) {
    Point p{};
    for (int i = 0; i < dim; ++i) p[i] = v;
    return p;
  };
  std::string label = name + "_" + std::to_string(dim) + "d";
  if (name == "bump") return ScalarField(make_bump(Point{}, 1.0, 1.0, dim).impl_ptr(), label);
  if (name == "bump_offset")
    return ScalarField(make_bump(pt({0.3, -0.2, 0.1, 0.0}), 0.7, 1.5, dim).impl_ptr(), label);
  if (name == "bump_pair") {
    ScalarField a = make_bump(pt({-1.1, 0.0, 0.0, 0.0}), 1.0, 1.0, dim);
    ScalarField b = make_bump(pt({1.0, 0.3, 0.0, 0.0}), 0.7, 1.0, dim);
    return ScalarField(make_sum({{1.0, a}, {0.6, b}}).impl_ptr(), label);
  }
  if (name == "product_bump") {
    Point radii = filled(0.7);
    radii[0] = 1.0;
    return ScalarField(make_product_bump(Point{}, radii, 1.0, dim).impl_ptr(), label);
  }
  if (name == "mollified_box") {
    Box box;
    box.dim = dim;
    box.hi = filled(1.0);
    return ScalarField(make_mollified_indicator(box, dim == 1 ? 0.1 : 0.15).impl_ptr(), label);
  }
  throw InvalidParameter("catalogue_field: unknown name '" + name + "'");
}

std::vector<ScalarField> catalogue(int dim) {
  std::vector<ScalarField> out;
  for (const auto& n : catalogue_names(dim)) out.push_back(catalogue_field(n, dim));
  return out;
}

// ---------------------------------------------------------------------------

namespace {

template <class Integrand>
QuadratureResult tensor_integral(const ScalarField& u, int panels, double rtol, int order, Integrand&& f) {
  if (panels < 1) throw InvalidParameter("quadrature budget must be >= 1 panel");
  auto run = [&](int np) {
    // each breakpoint segment gets a handful of panels so thin transition
    // layers are resolved even when the box is large
    std::vector<Rule1D> axes;
    const Box& box = u.support_box();
    auto bp = u.breakpoints();
    for (int i = 0; i < u.dimension(); ++i) {
      std::span<const double> b;
      if (i < static_cast<int>(bp.size())) b = bp[i];
      int segs = static_cast<int>(b.size()) + 1;
      axes.push_back(composite_gauss(box.lo[i], box.hi[i], std::max(np, 4 * segs), order, b));
    }
    TensorGrid grid(u.dimension(), std::move(axes));
    double s = 0.0;
    Point x{};
    for (std::size_t k = 0; k < grid.size(); ++k) {
      double w = grid.node(k, x);
      s += w * f(x);
    }
    return std::pair<double, std::size_t>(s, grid.size());
  };
  auto [coarse, n1] = run(panels);
  auto [fine, n2] = run(2 * panels);
  QuadratureResult r;
  r.value = fine;
  r.error_estimate = std::abs(fine - coarse);
  r.nodes_used = n1 + n2;
  r.converged = r.error_estimate <= rtol * std::abs(fine) + 1e-300;
  return r;
}

}  // namespace

QuadratureResult gradient_lp_norm(const ScalarField& u, double p, int panels, double rtol, int order) {
  if (!(p >= 1.0)) throw InvalidParameter("gradient_lp_norm: p must be >= 1");
  const int dim = u.dimension();
  return tensor_integral(u, panels, rtol, order, [&](const Point& x) {
    double g = norm(u.gradient(x), dim);
    return p == 1.0 ? g : std::pow(g, p);
  });
}

QuadratureResult lp_norm_pow(const ScalarField& u, double p, int panels, double rtol, int order) {
  if (!(p >= 1.0)) throw InvalidParameter("lp_norm_pow: p must be >= 1");
  return tensor_integral(u, panels, rtol, order, [&](const Point& x) { return std::pow(std::abs(u(x)), p); });
}

}  // namespace weaklp
