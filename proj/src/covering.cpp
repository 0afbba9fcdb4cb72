#include "weaklp/covering.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "scan1d.hpp"
#include "weaklp/errors.hpp"
#include "weaklp/levelset.hpp"
#include "weaklp/parallel.hpp"

namespace weaklp {

PiecewiseConstantField::PiecewiseConstantField(double origin, double h, std::vector<double> values)
    : origin_(origin), h_(h), values_(std::move(values)) {
  if (!(h_ > 0.0)) throw InvalidParameter("piecewise field: cell width must be positive");
  if (values_.empty()) throw InvalidParameter("piecewise field: no cells");
  prefix_.assign(values_.size() + 1, 0.0);
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (!(values_[i] >= 0.0)) throw InvalidParameter("piecewise field: negative cell value");
    prefix_[i + 1] = prefix_[i] + values_[i] * h_;
  }
}

PiecewiseConstantField PiecewiseConstantField::project(const std::function<double(double)>& f, double a, double b,
                                                       int cells) {
  if (!(b > a) || cells < 1) throw InvalidParameter("piecewise field: need a < b and cells >= 1");
  const Rule1D& g = gauss_nodes_1d(8);
  double h = (b - a) / cells;
  std::vector<double> v(cells);
  for (int i = 0; i < cells; ++i) {
    double c = a + (i + 0.5) * h, s = 0.0;
    for (std::size_t j = 0; j < g.size(); ++j) s += 0.5 * g.weights[j] * std::abs(f(c + 0.5 * h * g.nodes[j]));
    v[i] = s;
  }
  return PiecewiseConstantField(a, h, std::move(v));
}

PiecewiseConstantField random_piecewise_field(int cells, const RandomStream& stream, std::uint64_t index) {
  if (cells < 16 || (cells & (cells - 1)) != 0) throw InvalidParameter("random field: cells must be a power of two >= 16");
  std::uint32_t draw = 0;
  auto uniform_int = [&](int n) { return std::min(n - 1, static_cast<int>(stream.uniform(index, draw++) * n)); };
  std::vector<double> v(cells, 0.0);
  // values are multiples of 1/64 and h = 2^-k, so every partial sum is exact
  if (uniform_int(2) == 1) {
    double background = (1 + uniform_int(8)) / 64.0;
    std::fill(v.begin(), v.end(), background);
  }
  int spikes = 1 + uniform_int(6);
  for (int s = 0; s < spikes; ++s) {
    int width = 1 + uniform_int(cells / 16);
    int start = uniform_int(cells - width + 1);
    double value = (1 + uniform_int(32)) / 8.0;
    for (int i = start; i < start + width; ++i) v[i] += value;
  }
  return PiecewiseConstantField(0.0, 1.0 / cells, std::move(v));
}

IntervalFamily admissible_intervals(const PiecewiseConstantField& f, double gamma) {
  if (!(gamma > 0.0)) throw InvalidParameter("admissible_intervals: gamma must be positive");
  IntervalFamily fam;
  fam.gamma = gamma;
  fam.h = f.h();
  fam.origin = f.origin();
  fam.length_bound = std::pow(f.total_mass(), 1.0 / (gamma + 1.0));
  const int n = f.cells();
  // per length, longest first; each bucket is filled left to right
  std::vector<std::vector<GridInterval>> by_length(n + 1);
  parallel_for(static_cast<std::size_t>(n), 0, [&](std::size_t k) {
    int len = n - static_cast<int>(k);
    double need = std::pow(len * f.h(), gamma + 1.0);
    if (need > f.total_mass()) return;
    for (int a = 0; a + len <= n; ++a)
      if (f.mass(a, a + len) >= need) by_length[len].push_back(GridInterval{a, a + len});
  });
  for (int len = n; len >= 1; --len)
    fam.members.insert(fam.members.end(), by_length[len].begin(), by_length[len].end());
  return fam;
}

VitaliCover vitali_select(const IntervalFamily& family) {
  VitaliCover cover;
  for (const GridInterval& I : family.members) {
    bool free = std::none_of(cover.selected.begin(), cover.selected.end(),
                             [&](const GridInterval& J) { return J.intersects(I); });
    if (free) cover.selected.push_back(I);
  }
  return cover;
}

std::vector<Interval> vitali_select(std::vector<Interval> family) {
  for (const Interval& I : family)
    if (!(I.left < I.right)) throw InvalidParameter("vitali_select: intervals need left < right");
  std::stable_sort(family.begin(), family.end(), [](const Interval& a, const Interval& b) {
    if (a.length() != b.length()) return a.length() > b.length();
    return a.left < b.left;
  });
  std::vector<Interval> out;
  for (const Interval& I : family) {
    bool free = std::none_of(out.begin(), out.end(),
                             [&](const Interval& J) { return I.left <= J.right && J.left <= I.right; });
    if (free) out.push_back(I);
  }
  return out;
}

CoverVerdict verify_5J_cover(const PiecewiseConstantField& f, double gamma, const IntervalFamily& family,
                             const VitaliCover& cover, int workers) {
  if (!(gamma > 0.0)) throw InvalidParameter("verify_5J_cover: gamma must be positive");
  CoverVerdict v;
  const auto& Y = cover.selected;
  for (std::size_t i = 0; i < Y.size(); ++i)
    for (std::size_t j = i + 1; j < Y.size(); ++j)
      if (Y[i].intersects(Y[j])) v.disjoint = false;
  for (const GridInterval& I : family.members) {
    bool ok = std::any_of(Y.begin(), Y.end(), [&](const GridInterval& J) {
      return J.intersects(I) && J.length() >= I.length() && J.dilate5().contains(I);
    });
    if (!ok) ++v.guarantee_violations;
  }

  // brute force over boundary pairs with a prefix table of our own
  const int n = f.cells();
  std::vector<double> prefix(n + 1, 0.0);
  for (int i = 0; i < n; ++i) prefix[i + 1] = prefix[i] + f.values()[i] * f.h();
  std::vector<double> need(n + 1, 0.0);
  for (int d = 1; d <= n; ++d) need[d] = std::pow(d * f.h(), gamma + 1.0);
  std::vector<std::uint64_t> in_set(n + 1, 0), bad(n + 1, 0);
  parallel_for(static_cast<std::size_t>(n + 1), workers, [&](std::size_t k) {
    int i = static_cast<int>(k);
    for (int j = i + 1; j <= n; ++j) {
      if (!(std::abs(prefix[j] - prefix[i]) >= need[j - i])) continue;
      ++in_set[i];
      GridInterval I{i, j};
      bool covered = std::any_of(Y.begin(), Y.end(), [&](const GridInterval& J) { return J.dilate5().contains(I); });
      if (!covered) ++bad[i];
    }
  });
  v.pairs_checked = static_cast<std::uint64_t>(n + 1) * n;
  for (int i = 0; i <= n; ++i) {
    v.pairs_in_set += 2 * in_set[i];
    v.violations += 2 * bad[i];
  }
  return v;
}

double square_energy(double length, double gamma) {
  return 2.0 * std::pow(length, gamma + 1.0) / (gamma * (gamma + 1.0));
}

WeightedEnergy weighted_energy(const PiecewiseConstantField& f, double gamma, const IntervalFamily& family,
                               const VitaliCover& cover) {
  if (!(gamma > 0.0)) throw InvalidParameter("weighted_energy: gamma must be positive");
  WeightedEnergy e;
  const int n = f.cells();
  const double h = f.h();
  e.mass = f.total_mass();
  e.constant = 10.0 * std::pow(5.0, gamma) / (gamma * (gamma + 1.0));
  for (const GridInterval& J : cover.selected) e.selected_sum += std::pow(J.length() * h, gamma + 1.0);

  // cell (k, l) lies in some I x I iff an interval starting at or before
  // min(k, l) ends at or after max(k, l) + 1
  std::vector<int> reach(n, 0);
  for (const GridInterval& I : family.members) reach[I.a] = std::max(reach[I.a], I.b);
  for (int k = 1; k < n; ++k) reach[k] = std::max(reach[k], reach[k - 1]);
  std::vector<std::uint64_t> diagonal(n, 0);  // covered cells with |k - l| = d, k <= l
  for (int k = 0; k < n; ++k)
    for (int l = k; l < reach[k]; ++l) ++diagonal[l - k];
  auto q = [gamma](double d) { return std::pow(d, gamma + 1.0); };
  const double scale = std::pow(h, gamma + 1.0) / (gamma * (gamma + 1.0));
  for (int d = 0; d < n; ++d) {
    if (diagonal[d] == 0) continue;
    double cell = scale * (d == 0 ? 2.0 : q(d + 1.0) - 2.0 * q(d) + q(d - 1.0));
    e.energy += (d == 0 ? 1.0 : 2.0) * diagonal[d] * cell;
  }
  e.bound_selected = e.constant * e.selected_sum;
  e.bound_mass = e.constant * e.mass;
  e.chain_holds = e.energy <= e.bound_selected && e.selected_sum <= e.mass;
  e.empirical_c = e.mass > 0.0 ? e.energy * gamma / (std::pow(5.0, gamma) * e.mass) : 0.0;
  return e;
}

// ---------------------------------------------------------------------------

Density density_abs(const ScalarField& u, double kappa) {
  if (!(kappa >= 0.0)) throw InvalidParameter("density_abs: kappa must be >= 0");
  Density F;
  F.dim = u.dimension();
  F.support = u.support_box();
  F.sup = kappa * u.sup_norm();
  F.breakpoints = u.breakpoints();
  F.eval = [u, kappa](const Point& x) { return kappa * std::abs(u(x)); };
  return F;
}

Density density_gradient_power(const ScalarField& u, double p, double lambda) {
  if (!(p >= 1.0) || !(lambda > 0.0)) throw InvalidParameter("density_gradient_power: need p >= 1 and lambda > 0");
  Density F;
  F.dim = u.dimension();
  F.support = u.support_box();
  F.sup = std::pow(u.lip() / lambda, p);
  F.breakpoints = u.breakpoints();
  const int dim = F.dim;
  F.eval = [u, p, lambda, dim](const Point& x) { return std::pow(norm(u.gradient(x), dim) / lambda, p); };
  return F;
}

QuadratureResult density_l1(const Density& F, int panels) {
  if (panels < 1) throw InvalidParameter("density_l1: panels must be positive");
  auto level = [&](int np) {
    TensorGrid grid = TensorGrid::over_box(F.support, np, 8, F.breakpoints);
    return parallel_sum(grid.size(), 0, [&](std::size_t k) {
      Point x{};
      double w = grid.node(k, x);
      return w * F.eval(x);
    });
  };
  QuadratureResult r;
  double coarse = level(panels);
  r.value = level(2 * panels);
  r.error_estimate = std::abs(r.value - coarse);
  r.nodes_used = static_cast<std::size_t>(std::pow(24.0 * panels, F.dim));
  return r;
}

namespace {

// Places where the line x + t w crosses the density's breakpoint planes, inside (a, b).
std::vector<double> line_cuts(const Density& F, const Point& x, const Point& w, double a, double b) {
  std::vector<double> cuts;
  for (int i = 0; i < F.dim && i < static_cast<int>(F.breakpoints.size()); ++i) {
    if (w[i] == 0.0) continue;
    for (double c : F.breakpoints[i]) {
      double t = (c - x[i]) / w[i];
      if (t > a && t < b) cuts.push_back(t);
    }
  }
  return cuts;
}

double gauss_along(const Density& F, const Point& x, const Point& w, double a, double b, int panels) {
  auto cuts = line_cuts(F, x, w, a, b);
  Rule1D rule = composite_gauss(a, b, panels, 8, cuts);
  double s = 0.0;
  for (std::size_t j = 0; j < rule.size(); ++j) s += rule.weights[j] * F.eval(along(x, w, rule.nodes[j], F.dim));
  return s;
}

}  // namespace

QuadratureResult line_integral(const Density& F, const Point& x, const Point& y, int nodes) {
  const int dim = F.dim;
  double len = distance(x, y, dim);
  if (!(len > 0.0)) throw InvalidParameter("line_integral: coincident points");
  Point w{};
  for (int i = 0; i < dim; ++i) w[i] = (y[i] - x[i]) / len;
  QuadratureResult r;
  auto [enter, leave] = F.support.ray_span(x, w);
  leave = std::min(leave, len);
  if (!(leave > enter)) return r;
  int panels = std::max(1, nodes / 8);
  double coarse = gauss_along(F, x, w, enter, leave, panels);
  r.value = gauss_along(F, x, w, enter, leave, 2 * panels);
  r.error_estimate = std::abs(r.value - coarse);
  r.nodes_used = 24 * panels;
  return r;
}

namespace {

// Orthonormal basis of w^perp by Gram-Schmidt on the coordinate axes.
std::vector<Point> perp_basis(const Point& w, int dim) {
  std::vector<Point> basis;
  for (int i = 0; i < dim && static_cast<int>(basis.size()) < dim - 1; ++i) {
    Point v{};
    v[i] = 1.0;
    double c = v[i] * w[i];
    for (int k = 0; k < dim; ++k) v[k] -= c * w[k];
    for (const Point& b : basis) {
      double d = dot(v, b, dim);
      for (int k = 0; k < dim; ++k) v[k] -= d * b[k];
    }
    double nv = norm(v, dim);
    if (nv < 1e-3) continue;
    for (int k = 0; k < dim; ++k) v[k] /= nv;
    basis.push_back(v);
  }
  return basis;
}

// Cumulative integral C(t) = integral of F from tau0 to t along one line,
// tabulated on uniform cells and interpolated by cubic Hermite with C' = F.
class LineTable {
 public:
  LineTable(const Density& F, const Point& base, const Point& w, double tau0, double tau1, int cells)
      : tau0_(tau0), tau1_(tau1), cells_(cells), h_((tau1 - tau0) / cells), c_(cells + 1, 0.0), f_(cells + 1, 0.0) {
    const Rule1D& g = gauss_nodes_1d(8);
    for (int k = 0; k <= cells_; ++k) f_[k] = F.eval(along(base, w, tau0_ + k * h_, F.dim));
    for (int k = 0; k < cells_; ++k) {
      double mid = tau0_ + (k + 0.5) * h_, s = 0.0;
      for (std::size_t j = 0; j < g.size(); ++j)
        s += 0.5 * h_ * g.weights[j] * F.eval(along(base, w, mid + 0.5 * h_ * g.nodes[j], F.dim));
      c_[k + 1] = c_[k] + s;
    }
  }
  double total() const { return c_.back(); }
  double density(double t) const {
    if (t <= tau0_ || t >= tau1_) return 0.0;
    double z = (t - tau0_) / h_;
    int k = std::min(cells_ - 1, static_cast<int>(z));
    double s = z - k;
    return (1.0 - s) * f_[k] + s * f_[k + 1];
  }
  double operator()(double t) const {
    if (t <= tau0_) return 0.0;
    if (t >= tau1_) return c_.back();
    double z = (t - tau0_) / h_;
    int k = std::min(cells_ - 1, static_cast<int>(z));
    double s = z - k, s2 = s * s, s3 = s2 * s;
    return (2 * s3 - 3 * s2 + 1) * c_[k] + (s3 - 2 * s2 + s) * h_ * f_[k] + (-2 * s3 + 3 * s2) * c_[k + 1] +
           (s3 - s2) * h_ * f_[k + 1];
  }

 private:
  double tau0_, tau1_;
  int cells_;
  double h_;
  std::vector<double> c_, f_;
};

double radial_weight(double lo, double hi, int dim) {
  if (dim == 1) return hi - lo;
  if (dim == 2) return 0.5 * (hi * hi - lo * lo);
  return (std::pow(hi, dim) - std::pow(lo, dim)) / dim;
}

struct RotationBudget {
  int sphere_order, z_panels, t_panels, line_cells, scan;
};

// integral over s of the one-sided radial set {r > 0 : C(s + r) - C(s) >= r^{N+1}}
// with weight r^{N-1}, on the line base + t w.
double line_contribution(const LineTable& C, double tau0, double tau1, int dim, const RotationOptions& opt,
                         const RotationBudget& b) {
  const double M = C.total();
  if (!(M > 0.0)) return 0.0;
  const double r_max = std::pow(M, 1.0 / (dim + 1));
  const double bp[1] = {tau0};
  Rule1D srule = composite_gauss(tau0 - r_max, tau1, b.t_panels, opt.t_order, bp);
  double total = 0.0;
  for (std::size_t j = 0; j < srule.size(); ++j) {
    double s = srule.nodes[j];
    double cs = C(s);
    double reach = std::pow(std::max(M - cs, 0.0), 1.0 / (dim + 1));
    double a = std::max(0.0, tau0 - s);
    if (!(reach > a)) continue;
    bool state = a == 0.0 && C.density(s) > 0.0;
    auto g = [&](double r) { return C(s + r) - cs - std::pow(r, dim + 1); };
    double m = 0.0;
    detail::scan_intervals(g, a, reach, state, b.scan, opt.tol,
                           [&](double lo, double hi) { m += radial_weight(lo, hi, dim); });
    total += srule.weights[j] * m;
  }
  return total;
}

double rotation_level(const Density& F, const RotationOptions& opt, const RotationBudget& b) {
  const int dim = F.dim;
  SphereRule full = sphere_rule(dim, b.sphere_order);
  SphereRule sphere = antipodal_half(full).value_or(full);
  const Point c = F.support.center();
  const double diam = F.support.diameter();
  struct Line {
    Point base, w;
    double weight;
  };
  std::vector<Line> lines;
  for (std::size_t j = 0; j < sphere.size(); ++j) {
    const Point& w = sphere.nodes[j];
    auto basis = perp_basis(w, dim);
    std::vector<Rule1D> axes;
    for (const Point& e : basis) {
      double ext = 0.0;
      for (int i = 0; i < dim; ++i) ext += 0.5 * std::abs(e[i]) * F.support.side(i);
      axes.push_back(composite_gauss(-ext, ext, b.z_panels, opt.z_order));
    }
    std::size_t count = 1;
    for (const Rule1D& a : axes) count *= a.size();
    for (std::size_t k = 0; k < count; ++k) {
      Point base = c;
      double wt = sphere.weights[j];
      std::size_t rest = k;
      for (std::size_t ax = 0; ax < axes.size(); ++ax) {
        std::size_t m = rest % axes[ax].size();
        rest /= axes[ax].size();
        wt *= axes[ax].weights[m];
        for (int i = 0; i < dim; ++i) base[i] += axes[ax].nodes[m] * basis[ax][i];
      }
      lines.push_back(Line{base, w, wt});
    }
  }
  return parallel_sum(lines.size(), opt.workers, [&](std::size_t k) {
    const Line& L = lines[k];
    // parametrise from a point well behind the box so ray_span sees the whole chord
    Point start = along(L.base, L.w, -diam, dim);
    auto [enter, leave] = F.support.ray_span(start, L.w);
    if (!(leave > enter)) return 0.0;
    double tau0 = enter - diam, tau1 = leave - diam;
    int cells = std::max(4, static_cast<int>(std::ceil(b.line_cells * (tau1 - tau0) / diam)));
    LineTable C(F, L.base, L.w, tau0, tau1, cells);
    return L.weight * line_contribution(C, tau0, tau1, dim, opt, b);
  });
}

}  // namespace

RotationMeasure rotation_measure(const Density& F, const RotationOptions& opt) {
  if (F.dim < 1 || F.dim > 3) throw InvalidParameter("rotation_measure: dimension must be 1, 2 or 3");
  if (!F.eval) throw InvalidParameter("rotation_measure: density has no evaluator");
  if (F.support.volume() <= 0.0 || !std::isfinite(F.support.volume()))
    throw InvalidParameter("rotation_measure: density needs a bounded support box");
  if (opt.sphere_order < 2 || opt.z_panels < 1 || opt.z_order < 1 || opt.t_panels < 1 || opt.t_order < 1 ||
      opt.line_cells < 4 || opt.scan < 16)
    throw InvalidParameter("rotation_measure: budgets too small");
  const int dim = F.dim;
  RotationMeasure res;
  res.l1 = density_l1(F).value;
  res.theory = 0.5 * (10.0 / (dim + 1)) * std::pow(5.0, dim) * sphere_area(dim) / dim;
  if (!(F.sup > 0.0)) return res;
  RotationBudget fine{opt.sphere_order, opt.z_panels, opt.t_panels, opt.line_cells, opt.scan};
  res.measure.value = rotation_level(F, opt, fine);
  if (opt.estimate_error) {
    RotationBudget coarse{dim == 1 ? opt.sphere_order : std::max(2, opt.sphere_order / 2),
                          std::max(1, opt.z_panels / 2), std::max(1, opt.t_panels / 2),
                          std::max(4, opt.line_cells / 2), std::max(16, opt.scan / 2)};
    double cv = rotation_level(F, opt, coarse);
    res.measure.error_estimate = std::abs(res.measure.value - cv);
    res.measure.converged = res.measure.error_estimate <= opt.rtol * res.measure.value;
  }
  res.c_emp = res.l1 > 0.0 ? res.measure.value / res.l1 : 0.0;
  res.within_theory = res.measure.value <= res.theory * res.l1;
  return res;
}

QuadratureResult rotation_measure_mc(const Density& F, std::uint64_t n, const RandomStream& stream, int workers) {
  if (n < 1000) throw InvalidParameter("rotation_measure_mc: n must be >= 1000");
  QuadratureResult res;
  res.nodes_used = n;
  const int dim = F.dim;
  if (!(F.sup > 0.0)) return res;
  const double r_max = std::pow(F.sup * F.support.diameter(), 1.0 / (dim + 1));
  const Box box = F.support.dilated(r_max);
  const double volume = box.volume() * sphere_area(dim) * std::pow(r_max, dim) / dim;
  const std::uint64_t blocks = (n + kMonteCarloBlock - 1) / kMonteCarloBlock;
  std::vector<std::uint64_t> hits(blocks, 0);
  parallel_for(blocks, workers, [&](std::size_t b) {
    std::uint64_t begin = b * kMonteCarloBlock, end = std::min(n, begin + kMonteCarloBlock);
    std::uint64_t h = 0;
    for (std::uint64_t i = begin; i < end; ++i) {
      Point x = stream.in_box(box, i, 0);
      Point w = stream.direction(i, dim, dim);
      double r = r_max * std::pow(stream.uniform(i, 4 * dim), 1.0 / dim);
      if (line_integral(F, x, along(x, w, r, dim), 32).value >= std::pow(r, dim + 1)) ++h;
    }
    hits[b] = h;
  });
  std::uint64_t total = 0;
  for (auto h : hits) total += h;
  double f = static_cast<double>(total) / n;
  res.value = volume * f;
  res.error_estimate = volume * std::sqrt(f * (1.0 - f) / (n - 1.0));
  return res;
}

HalfFactorCheck half_factor_check(const Density& F, const Point& w_in, double offset, int grid) {
  const int dim = F.dim;
  if (dim > 2) throw InvalidParameter("half_factor_check: dimension must be 1 or 2");
  if (grid < 100) throw InvalidParameter("half_factor_check: grid must be >= 100");
  Point w{};
  double nw = norm(w_in, dim);
  if (!(nw > 0.0)) throw InvalidParameter("half_factor_check: zero direction");
  for (int i = 0; i < dim; ++i) w[i] = w_in[i] / nw;
  Point base = F.support.center();
  if (dim == 2) {
    base[0] += -offset * w[1];
    base[1] += offset * w[0];
  }
  const double diam = F.support.diameter();
  Point start = along(base, w, -diam, dim);
  auto [enter, leave] = F.support.ray_span(start, w);
  HalfFactorCheck h;
  if (!(leave > enter)) return h;
  double tau0 = enter - diam, tau1 = leave - diam;
  LineTable C(F, base, w, tau0, tau1, 256);
  RotationOptions opt;
  opt.t_panels = 64;
  opt.t_order = 8;
  RotationBudget b{2, 1, 64, 256, 256};
  h.one_sided = line_contribution(C, tau0, tau1, dim, opt, b);

  // midpoint sum over (s, t) in [tau0 - R, tau1 + R]^2 of |t - s|^{N-1} on
  // E(f, N) = {|integral_s^t f| >= |t - s|^{N+1}}; the cumulative integral at
  // the cell midpoints comes from Gauss on each half cell, not the line table
  const double R = std::pow(C.total(), 1.0 / (dim + 1));
  const double a = tau0 - R, span = tau1 - tau0 + 2 * R, hs = span / grid;
  auto piece = [&](double lo, double hi) {
    double l0 = std::max(lo, tau0), l1 = std::min(hi, tau1);
    return l1 > l0 ? gauss_along(F, base, w, l0, l1, 1) : 0.0;
  };
  std::vector<double> mid(grid, 0.0), cell(grid, 0.0);
  double run = 0.0;
  for (int k = 0; k < grid; ++k) {
    double lo = a + k * hs;
    double first = piece(lo, lo + 0.5 * hs), second = piece(lo + 0.5 * hs, lo + hs);
    mid[k] = run + first;
    cell[k] = first + second;
    run += cell[k];
  }
  std::vector<double> need(grid), weight(grid);
  for (int d = 1; d < grid; ++d) {
    need[d] = std::pow(d * hs, dim + 1);
    weight[d] = std::pow(d * hs, dim - 1);
  }
  double two = 0.0;
  // diagonal cells: near-diagonal pairs belong to E exactly where f > 0 (only
  // matters for N = 1, where the weight does not vanish on the diagonal)
  if (dim == 1)
    for (int k = 0; k < grid; ++k)
      if (cell[k] > 0.0) two += 1.0;
  for (int i = 0; i < grid; ++i)
    for (int j = i + 1; j < grid; ++j)
      if (mid[j] - mid[i] >= need[j - i]) two += 2.0 * weight[j - i];
  h.two_sided = two * hs * hs;
  h.ratio = h.one_sided > 0.0 ? h.two_sided / h.one_sided : 0.0;
  return h;
}

ContainmentVerdict holder_containment_check(const ScalarField& u, double p, double lambda, std::uint64_t samples,
                                            const RandomStream& stream, int workers) {
  if (!(lambda > 0.0)) throw InvalidParameter("holder_containment_check: lambda must be positive");
  if (!(p >= 1.0)) throw InvalidParameter("holder_containment_check: p must be >= 1");
  ContainmentVerdict v;
  v.samples = samples;
  if (u.is_zero()) return v;
  const int dim = u.dimension();
  LevelSetQuery q = LevelSetQuery::standard(u, p, lambda);
  const double r_max = truncation_radius(q);
  const Box region = u.support_box().dilated(std::min(r_max, 1.0));
  const Density F = density_gradient_power(u, p, lambda);
  ScanOptions scan;
  scan.scan = 256;
  const double roundoff = 64.0 * std::numeric_limits<double>::epsilon() * u.sup_norm();
  std::vector<std::uint64_t> in(samples, 0), bad(samples, 0), skipped(samples, 0);
  std::vector<double> margin(samples, std::numeric_limits<double>::infinity());
  parallel_for(samples, workers, [&](std::size_t i) {
    Point x = stream.in_box(region, i, 0);
    Point w = stream.direction(i, dim, dim);
    RadialProfile prof = radial_levelset(q, x, w, scan);
    double total = 0.0;
    for (const auto& iv : prof.intervals) total += iv.second - iv.first;
    if (!(total > 0.0)) return;
    // r uniform over the radial set
    double target = total * stream.uniform(i, 4 * dim), r = 0.0;
    for (const auto& iv : prof.intervals) {
      double len = iv.second - iv.first;
      if (target <= len) {
        r = iv.first + target;
        break;
      }
      target -= len;
    }
    if (!(r > 0.0)) return;
    Point y = along(x, w, r, dim);
    double du = std::abs(u(y) - u(x));
    if (!(du >= lambda * std::pow(r, q.alpha))) return;
    // a difference of a few ulps decides nothing about the set
    if (du <= roundoff) {
      skipped[i] = 1;
      return;
    }
    in[i] = 1;
    QuadratureResult li = line_integral(F, x, y, 64);
    double need = std::pow(r, dim + 1);
    margin[i] = (li.value - need) / need;
    if (li.value + 4.0 * li.error_estimate + 1e-12 * need < need) bad[i] = 1;
  });
  v.worst_margin = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < samples; ++i) {
    v.pairs_in_set += in[i];
    v.violations += bad[i];
    v.roundoff_skipped += skipped[i];
    if (in[i]) v.worst_margin = std::min(v.worst_margin, margin[i]);
  }
  if (v.pairs_in_set == 0) v.worst_margin = 0.0;
  return v;
}

}  // namespace weaklp
