#include "weaklp/corollaries.hpp"

#include <algorithm>
#include <cmath>

#include "weaklp/errors.hpp"
#include "weaklp/parallel.hpp"
#include "weaklp/quadrature.hpp"

namespace weaklp {

void GNParams::validate() const {
  if (!(theta > 0.0 && theta < 1.0)) throw InvalidParameter("GN parameters: theta must lie in (0, 1)");
  if (!(p1 > 1.0)) throw InvalidParameter("GN parameters: p1 must exceed 1");
  if (!(s1 >= 0.0 && s1 < 1.0)) throw InvalidParameter("GN parameters: s1 must lie in [0, 1)");
}

std::vector<double> corollary_lambda_grid(const ScalarField& u, double alpha, const CorollaryOptions& opt) {
  if (!(alpha > 0.0)) throw InvalidParameter("corollary grid: alpha must be positive");
  if (opt.per_decade < 1 || opt.decades_below < 0.0 || opt.decades_above < 0.0)
    throw InvalidParameter("corollary grid: bad density or padding");
  const double two_sup = 2.0 * u.sup_norm();
  const double wide = two_sup * std::pow(u.support_box().diameter(), -alpha);
  const double sharp = std::pow(u.lip(), alpha) * std::pow(two_sup, 1.0 - alpha);
  double lo = std::min(wide, sharp) * std::pow(10.0, -opt.decades_below);
  double hi = std::max(wide, sharp) * std::pow(10.0, opt.decades_above);
  int n = std::max(2, static_cast<int>(std::ceil(std::log10(hi / lo) * opt.per_decade)) + 1);
  return log_grid(lo, hi, n);
}

WeakQuasinorm weak_quasinorm_alpha(const ScalarField& u, double p, double alpha, const CorollaryOptions& opt) {
  if (u.is_zero()) return WeakQuasinorm{};
  ProfileOptions po;
  po.polar = opt.polar;
  if (po.polar.x_panels == 0) po.polar.x_panels = u.dimension() == 1 ? 64 : 16;
  po.polar.workers = opt.workers;
  po.workers = opt.workers;
  DistributionProfile prof = distribution_profile(u, p, alpha, corollary_lambda_grid(u, alpha, opt), po);
  return weak_quasinorm(prof, opt.refine);
}

double sup_norm_estimate(const ScalarField& u) {
  if (u.is_zero()) return 0.0;
  const int dim = u.dimension();
  const int n = dim == 1 ? 4096 : dim == 2 ? 256 : 48;
  const Box& b = u.support_box();
  std::size_t total = 1;
  for (int i = 0; i < dim; ++i) total *= n + 1;
  double best = 0.0;
  for (std::size_t k = 0; k < total; ++k) {
    Point x{};
    std::size_t rest = k;
    for (int i = 0; i < dim; ++i) {
      x[i] = b.lo[i] + b.side(i) * static_cast<double>(rest % (n + 1)) / n;
      rest /= n + 1;
    }
    best = std::max(best, std::abs(u(x)));
  }
  return best;
}

double holder_seminorm(const ScalarField& u, double s) {
  if (!(s > 0.0 && s <= 1.0)) throw InvalidParameter("holder_seminorm: s must lie in (0, 1]");
  if (u.is_zero()) return 0.0;
  const int dim = u.dimension();
  const Box region = u.support_box().dilated(0.25);
  const int n = dim == 1 ? 512 : dim == 2 ? 48 : 16;
  TensorGrid grid = TensorGrid::over_box(region, n, 1);
  SphereRule full = sphere_rule(dim, 16);
  SphereRule sphere = antipodal_half(full).value_or(full);
  const double diam = u.support_box().diameter();
  const int rungs = 64;
  std::vector<double> best(grid.size(), 0.0);
  parallel_for(grid.size(), 0, [&](std::size_t k) {
    Point x{};
    grid.node(k, x);
    double ux = u(x), b = 0.0;
    for (const Point& w : sphere.nodes)
      for (int j = 0; j < rungs; ++j) {
        double r = diam * std::pow(10.0, -4.0 + 4.5 * j / (rungs - 1));
        b = std::max(b, std::abs(u(along(x, w, r, dim)) - ux) / std::pow(r, s));
      }
    best[k] = b;
  });
  return *std::max_element(best.begin(), best.end());
}

namespace {

CorollaryReport weak_report(const std::string& check, const ScalarField& u, double p, double alpha, double rhs,
                            const CorollaryOptions& opt) {
  CorollaryReport r;
  r.check = check;
  r.field = u.label();
  r.params["p"] = p;
  r.params["alpha"] = alpha;
  WeakQuasinorm w = weak_quasinorm_alpha(u, p, alpha, opt);
  r.lhs = w.quasinorm;
  r.rhs = rhs;
  r.ratio = rhs > 0.0 ? r.lhs / rhs : 0.0;
  r.converged = w.converged;
  r.at_grid_edge = w.at_grid_edge;
  r.lambda_at_sup = w.lambda_at_sup;
  return r;
}

double grad_l1(const ScalarField& u, const CorollaryOptions& opt) {
  return u.is_zero() ? 0.0 : gradient_lp_norm(u, 1.0, opt.norm_panels).value;
}

double seminorm(const ScalarField& u, double s, double p, const CorollaryOptions& opt) {
  if (u.is_zero()) return 0.0;
  GagliardoOptions g = opt.gagliardo;
  g.workers = opt.workers;
  return std::pow(gagliardo(SeminormQuery{u, s, p, 0.0}, g).value, 1.0 / p);
}

}  // namespace

CorollaryReport check_cor_1_4(const ScalarField& u, double p, const CorollaryOptions& opt) {
  if (u.dimension() != 1) throw InvalidParameter("check_cor_1_4: the field must be one-dimensional");
  if (!(p > 1.0) || !std::isfinite(p)) throw InvalidParameter("check_cor_1_4: p must lie in (1, infinity)");
  return weak_report("cor_1_4", u, p, 2.0 / p, grad_l1(u, opt), opt);
}

CorollaryReport check_cor_1_5(const ScalarField& u, double p, const CorollaryOptions& opt) {
  if (!(p > 1.0) || !std::isfinite(p)) throw InvalidParameter("check_cor_1_5: p must lie in (1, infinity)");
  const int dim = u.dimension();
  double sup = sup_norm_estimate(u);
  double rhs = std::pow(sup, 1.0 - 1.0 / p) * std::pow(grad_l1(u, opt), 1.0 / p);
  CorollaryReport r = weak_report("cor_1_5", u, p, (dim + 1.0) / p, rhs, opt);
  r.params["sup"] = sup;
  return r;
}

CorollaryReport check_cor_1_6(const ScalarField& u, const GNParams& gn, const CorollaryOptions& opt) {
  gn.validate();
  if (!(gn.s1 > 0.0)) throw InvalidParameter("check_cor_1_6: s1 must be positive");
  if (gn.s1 * gn.p1 < 1.0)
    throw InvalidParameter("check_cor_1_6: s1 p1 < 1 is the strong-inequality regime; use check_gn_strong");
  const int dim = u.dimension();
  const double p = gn.p(), s = gn.s();
  double first = std::isinf(gn.p1) ? holder_seminorm(u, gn.s1) : seminorm(u, gn.s1, gn.p1, opt);
  double rhs = std::pow(first, gn.theta) * std::pow(grad_l1(u, opt), 1.0 - gn.theta);
  CorollaryReport r = weak_report("cor_1_6", u, p, dim / p + s, rhs, opt);
  r.params["theta"] = gn.theta;
  r.params["p1"] = gn.p1;
  r.params["s1"] = gn.s1;
  r.params["s"] = s;
  return r;
}

CorollaryReport check_gn_strong(const ScalarField& u, double theta, double p1, const CorollaryOptions& opt) {
  if (std::isinf(p1))
    throw InvalidParameter("check_gn_strong: p1 = infinity is refused; the strong inequality fails there");
  GNParams gn{theta, p1, 0.0};
  gn.validate();
  const double p = gn.p(), s = gn.s();
  CorollaryReport r;
  r.check = "gn_strong";
  r.field = u.label();
  r.params = {{"theta", theta}, {"p1", p1}, {"s", s}, {"p", p}};
  r.lhs = seminorm(u, s, p, opt);
  double lp = u.is_zero() ? 0.0 : std::pow(lp_norm_pow(u, p1, opt.norm_panels).value, 1.0 / p1);
  r.rhs = std::pow(lp, theta) * std::pow(grad_l1(u, opt), 1.0 - theta);
  r.ratio = r.rhs > 0.0 ? r.lhs / r.rhs : 0.0;
  return r;
}

CorollaryReport check_sobolev_embedding(const ScalarField& u, double s, const CorollaryOptions& opt) {
  const int dim = u.dimension();
  if (dim < 2)
    throw InvalidParameter("check_sobolev_embedding: needs N >= 2 (for N = 1 see failure_probe_ro4)");
  if (!(s > 0.0 && s < 1.0)) throw InvalidParameter("check_sobolev_embedding: s must lie in (0, 1)");
  const double p = 1.0 / (1.0 - (1.0 - s) / dim);
  CorollaryReport r;
  r.check = "sobolev_embedding";
  r.field = u.label();
  r.params = {{"s", s}, {"p", p}};
  r.lhs = seminorm(u, s, p, opt);
  r.rhs = grad_l1(u, opt);
  r.ratio = r.rhs > 0.0 ? r.lhs / r.rhs : 0.0;
  return r;
}

FailureProbe failure_probe_ro4(double p, const std::vector<double>& eps_ladder, const CorollaryOptions& opt) {
  if (!(p >= 1.0) || !std::isfinite(p)) throw InvalidParameter("failure_probe_ro4: p must lie in [1, infinity)");
  if (eps_ladder.size() < 2) throw InvalidParameter("failure_probe_ro4: need at least two eps values");
  for (std::size_t i = 0; i < eps_ladder.size(); ++i) {
    if (!(eps_ladder[i] > 0.0))
      throw InvalidParameter("failure_probe_ro4: eps must be positive (the unmollified indicator is refused)");
    if (!(eps_ladder[i] < 0.5)) throw InvalidParameter("failure_probe_ro4: eps must be below half the box side");
    if (i > 0 && !(eps_ladder[i] < eps_ladder[i - 1]))
      throw InvalidParameter("failure_probe_ro4: eps ladder must decrease");
  }
  FailureProbe f;
  f.p = p;
  f.eps = eps_ladder;
  const Box unit{1, Point{0.0}, Point{1.0}};
  // |x - y|^{-2} = |x - y|^{-N - sp} with N = 1, s = 1/p
  f.diverges_at_diagonal = p == 1.0;
  std::vector<double> t;
  for (double eps : eps_ladder) {
    ScalarField u = make_mollified_indicator(unit, eps);
    t.push_back(std::log(1.0 / eps));
    if (f.diverges_at_diagonal) {
      f.values.push_back(std::numeric_limits<double>::infinity());
      f.errors.push_back(0.0);
      continue;
    }
    GagliardoOptions g = opt.gagliardo;
    g.workers = opt.workers;
    QuadratureResult q = gagliardo(SeminormQuery{u, 1.0 / p, p, 0.0}, g);
    f.values.push_back(q.value);
    f.errors.push_back(q.error_estimate);
    f.weak_lhs.push_back(check_cor_1_4(u, p, opt).lhs);
  }
  if (f.diverges_at_diagonal) return f;
  f.increasing = true;
  for (std::size_t i = 1; i < f.values.size(); ++i) {
    f.increments.push_back(f.values[i] - f.values[i - 1]);
    if (!(f.increments.back() > f.errors[i] + f.errors[i - 1])) f.increasing = false;
  }
  if (f.increments.size() >= 2)
    f.last_increment_ratio = f.increments.back() / f.increments[f.increments.size() - 2];
  double mt = 0.0, mv = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    mt += t[i] / t.size();
    mv += f.values[i] / t.size();
  }
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    num += (t[i] - mt) * (f.values[i] - mv);
    den += (t[i] - mt) * (t[i] - mt);
  }
  f.rate = num / den;
  std::vector<double> sorted = f.weak_lhs;
  std::sort(sorted.begin(), sorted.end());
  std::size_t m = sorted.size();
  double median = m % 2 ? sorted[m / 2] : 0.5 * (sorted[m / 2 - 1] + sorted[m / 2]);
  for (double v : f.weak_lhs) f.weak_spread = std::max({f.weak_spread, v / median, median / v});
  return f;
}

}  // namespace weaklp
