#include "weaklp/maximal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "scan1d.hpp"
#include "weaklp/errors.hpp"
#include "weaklp/parallel.hpp"
#include "weaklp/quadrature.hpp"

namespace weaklp {

GriddedFunction::GriddedFunction(const Box& domain, std::array<int, 2> cells, std::vector<double> values)
    : domain_(domain), cells_(cells), values_(std::move(values)) {
  if (domain_.dim < 1 || domain_.dim > 2) throw InvalidParameter("gridded function: dimension must be 1 or 2");
  if (domain_.dim == 1) cells_[1] = 1;
  if (cells_[0] < 1 || cells_[1] < 1) throw InvalidParameter("gridded function: need at least one cell per axis");
  for (int i = 0; i < domain_.dim; ++i)
    if (!(domain_.side(i) > 0.0)) throw InvalidParameter("gridded function: empty domain");
  if (values_.size() != static_cast<std::size_t>(cells_[0]) * cells_[1])
    throw InvalidParameter("gridded function: value count does not match the grid");
  for (double v : values_)
    if (!(v >= 0.0)) throw InvalidParameter("gridded function: negative value");
}

GriddedFunction GriddedFunction::sample(const std::function<double(const Point&)>& g, const Box& domain,
                                        std::array<int, 2> cells) {
  if (domain.dim == 1) cells[1] = 1;
  if (cells[0] < 1 || cells[1] < 1) throw InvalidParameter("gridded function: need at least one cell per axis");
  std::vector<double> v(static_cast<std::size_t>(cells[0]) * cells[1]);
  GriddedFunction shape(domain, cells, std::vector<double>(v.size(), 0.0));
  for (std::size_t k = 0; k < v.size(); ++k) v[k] = g(shape.center(k));
  return GriddedFunction(domain, cells, std::move(v));
}

Point GriddedFunction::center(std::size_t k) const {
  Point x{};
  int i = static_cast<int>(k % cells_[0]), j = static_cast<int>(k / cells_[0]);
  x[0] = domain_.lo[0] + (i + 0.5) * h(0);
  if (dim() == 2) x[1] = domain_.lo[1] + (j + 0.5) * h(1);
  return x;
}

double GriddedFunction::value_at(const Point& x) const {
  int idx[2] = {0, 0};
  for (int a = 0; a < dim(); ++a) {
    if (x[a] < domain_.lo[a] || x[a] > domain_.hi[a]) return 0.0;
    idx[a] = std::min(cells_[a] - 1, static_cast<int>((x[a] - domain_.lo[a]) / h(a)));
  }
  return values_[idx[0] + static_cast<std::size_t>(cells_[0]) * idx[1]];
}

double GriddedFunction::max() const { return *std::max_element(values_.begin(), values_.end()); }

GriddedFunction gradient_magnitude_grid(const ScalarField& u, const Box& domain, std::array<int, 2> cells) {
  const int dim = u.dimension();
  if (dim > 2) throw InvalidParameter("gradient_magnitude_grid: dimension must be 1 or 2");
  return GriddedFunction::sample([&](const Point& x) { return norm(u.gradient(x), dim); }, domain, cells);
}

std::vector<double> radius_ladder(double r0, double r_max, double ratio) {
  if (!(r0 > 0.0) || !(ratio > 1.0)) throw InvalidParameter("radius_ladder: need r0 > 0 and ratio > 1");
  std::vector<double> out;
  int q = static_cast<int>(std::lround(std::log(2.0) / std::log(ratio)));
  bool dyadic = q >= 1 && std::abs(std::pow(2.0, 1.0 / q) - ratio) < 1e-12 * ratio;
  for (int j = 0;; ++j) {
    double r = dyadic ? std::ldexp(r0 * std::pow(2.0, static_cast<double>(j % q) / q), j / q)
                      : r0 * std::pow(ratio, j);
    out.push_back(r);
    if (r >= r_max || j > 10000) break;
  }
  return out;
}

namespace {

// ---- 1-D: exact averages from the cumulative integral -------------------

class Cumulative1D {
 public:
  explicit Cumulative1D(const GriddedFunction& g)
      : lo_(g.domain().lo[0]), h_(g.h(0)), n_(g.cells()[0]), v_(g.values()), prefix_(n_ + 1, 0.0) {
    for (int i = 0; i < n_; ++i) prefix_[i + 1] = prefix_[i] + v_[i] * h_;
  }
  double operator()(double t) const {
    double z = (t - lo_) / h_;
    if (z <= 0.0) return 0.0;
    if (z >= n_) return prefix_[n_];
    int k = std::min(n_ - 1, static_cast<int>(z));
    return prefix_[k] + (t - (lo_ + k * h_)) * v_[k];
  }

 private:
  double lo_, h_;
  int n_;
  const std::vector<double>& v_;
  std::vector<double> prefix_;
};

// ---- 2-D: regular polygon clipped against cells -------------------------

struct Poly {
  std::array<double, 96> x{}, y{};
  int n = 0;
};

// Sutherland-Hodgman against one half-plane a x + b y <= c.
void clip_half(Poly& p, double a, double b, double c) {
  Poly out;
  for (int i = 0; i < p.n; ++i) {
    int j = (i + 1) % p.n;
    double si = a * p.x[i] + b * p.y[i] - c, sj = a * p.x[j] + b * p.y[j] - c;
    if (si <= 0.0) {
      out.x[out.n] = p.x[i];
      out.y[out.n++] = p.y[i];
    }
    if ((si < 0.0 && sj > 0.0) || (si > 0.0 && sj < 0.0)) {
      double t = si / (si - sj);
      out.x[out.n] = p.x[i] + t * (p.x[j] - p.x[i]);
      out.y[out.n++] = p.y[i] + t * (p.y[j] - p.y[i]);
    }
  }
  p = out;
}

double clipped_area(const Poly& shape, double x0, double x1, double y0, double y1) {
  Poly p = shape;
  clip_half(p, -1, 0, -x0);
  clip_half(p, 1, 0, x1);
  clip_half(p, 0, -1, -y0);
  clip_half(p, 0, 1, y1);
  double a = 0.0;
  for (int i = 0; i < p.n; ++i) {
    int j = (i + 1) % p.n;
    a += p.x[i] * p.y[j] - p.x[j] * p.y[i];
  }
  return 0.5 * std::abs(a);
}

Poly polygon(double cx, double cy, double r, int sides) {
  Poly p;
  p.n = sides;
  for (int k = 0; k < sides; ++k) {
    double t = 2.0 * std::numbers::pi * k / sides;
    p.x[k] = cx + r * std::cos(t);
    p.y[k] = cy + r * std::sin(t);
  }
  return p;
}

double polygon_area(double r, int sides) { return 0.5 * sides * r * r * std::sin(2.0 * std::numbers::pi / sides); }

// Overlap weights of a polygon centred on a cell centre, by cell offset.
// Fully covered cells of each row form one run; the rest are listed.
struct Stencil {
  struct Row {
    int dj = 0;
    int full_lo = 1, full_hi = 0;  // empty when lo > hi
    std::vector<std::pair<int, double>> partial;
  };
  std::vector<Row> rows;
  double area = 0.0;
};

Stencil make_stencil(double r, double h0, double h1, int sides) {
  Stencil s;
  s.area = polygon_area(r, sides);
  Poly poly = polygon(0.0, 0.0, r, sides);
  const double full = h0 * h1 * (1.0 - 1e-12);
  int rj = static_cast<int>(std::ceil(r / h1 + 0.5)), ri = static_cast<int>(std::ceil(r / h0 + 0.5));
  for (int dj = -rj; dj <= rj; ++dj) {
    Stencil::Row row;
    row.dj = dj;
    double y0 = (dj - 0.5) * h1, y1 = (dj + 0.5) * h1;
    for (int di = -ri; di <= ri; ++di) {
      double a = clipped_area(poly, (di - 0.5) * h0, (di + 0.5) * h0, y0, y1);
      if (a <= 0.0) continue;
      if (a >= full) {
        if (row.full_lo > row.full_hi) row.full_lo = row.full_hi = di;
        else row.full_hi = di;
      } else {
        row.partial.emplace_back(di, a);
      }
    }
    if (row.full_lo <= row.full_hi || !row.partial.empty()) s.rows.push_back(std::move(row));
  }
  return s;
}

GriddedFunction maximal_2d(const GriddedFunction& g, const MaximalOptions& opt) {
  const int n0 = g.cells()[0], n1 = g.cells()[1];
  const double h0 = g.h(0), h1 = g.h(1);
  const auto& v = g.values();
  // row prefix sums of g
  std::vector<double> rp(static_cast<std::size_t>(n0 + 1) * n1, 0.0);
  for (int j = 0; j < n1; ++j)
    for (int i = 0; i < n0; ++i) rp[j * (n0 + 1) + i + 1] = rp[j * (n0 + 1) + i] + v[i + n0 * j];
  auto ladder = radius_ladder(std::min(h0, h1), g.domain().diameter(), opt.ladder_ratio);
  std::vector<Stencil> stencils(ladder.size());
  parallel_for(ladder.size(), opt.workers,
               [&](std::size_t k) { stencils[k] = make_stencil(ladder[k], h0, h1, opt.polygon_sides); });
  std::vector<double> out(g.size());
  parallel_for(g.size(), opt.workers, [&](std::size_t k) {
    int i = static_cast<int>(k % n0), j = static_cast<int>(k / n0);
    double best = v[k];
    for (const Stencil& s : stencils) {
      double sum = 0.0;
      for (const auto& row : s.rows) {
        int jj = j + row.dj;
        if (jj < 0 || jj >= n1) continue;
        const double* prow = &rp[static_cast<std::size_t>(jj) * (n0 + 1)];
        if (row.full_lo <= row.full_hi) {
          int a = std::max(0, i + row.full_lo), b = std::min(n0 - 1, i + row.full_hi);
          if (a <= b) sum += h0 * h1 * (prow[b + 1] - prow[a]);
        }
        for (const auto& [di, w] : row.partial) {
          int ii = i + di;
          if (ii >= 0 && ii < n0) sum += w * v[ii + static_cast<std::size_t>(n0) * jj];
        }
      }
      best = std::max(best, sum / s.area);
    }
    out[k] = best;
  });
  return GriddedFunction(g.domain(), g.cells(), std::move(out));
}

}  // namespace

GriddedFunction hl_maximal(const GriddedFunction& g, const MaximalOptions& opt) {
  if (opt.polygon_sides < 3 || opt.polygon_sides > 64) throw InvalidParameter("hl_maximal: polygon sides in [3, 64]");
  if (g.dim() == 2) return maximal_2d(g, opt);
  Cumulative1D P(g);
  auto ladder = radius_ladder(g.h(0), g.domain().diameter(), opt.ladder_ratio);
  std::vector<double> out(g.size());
  parallel_for(g.size(), opt.workers, [&](std::size_t k) {
    double x = g.center(k)[0], best = g[k];
    for (double r : ladder) best = std::max(best, (P(x + r) - P(x - r)) / (2.0 * r));
    out[k] = best;
  });
  return GriddedFunction(g.domain(), g.cells(), std::move(out));
}

double maximal_at(const GriddedFunction& g, const Point& x, const MaximalOptions& opt) {
  double hmin = g.dim() == 1 ? g.h(0) : std::min(g.h(0), g.h(1));
  double reach = g.domain().diameter() + g.domain().distance_to(x);
  auto ladder = radius_ladder(hmin, reach, opt.ladder_ratio);
  ladder.insert(ladder.begin(), 1e-9 * hmin);
  double best = 0.0;
  if (g.dim() == 1) {
    Cumulative1D P(g);
    for (double r : ladder) best = std::max(best, (P(x[0] + r) - P(x[0] - r)) / (2.0 * r));
    return best;
  }
  const int n0 = g.cells()[0], n1 = g.cells()[1];
  const double h0 = g.h(0), h1 = g.h(1);
  const Box& D = g.domain();
  for (double r : ladder) {
    // clip in coordinates centred on x: tiny polygons at large offsets would
    // lose their area to cancellation in the shoelace sum
    Poly poly = polygon(0.0, 0.0, r, opt.polygon_sides);
    int i0 = std::max(0, static_cast<int>(std::floor((x[0] - r - D.lo[0]) / h0)));
    int i1 = std::min(n0 - 1, static_cast<int>(std::floor((x[0] + r - D.lo[0]) / h0)));
    int j0 = std::max(0, static_cast<int>(std::floor((x[1] - r - D.lo[1]) / h1)));
    int j1 = std::min(n1 - 1, static_cast<int>(std::floor((x[1] + r - D.lo[1]) / h1)));
    double sum = 0.0;
    for (int j = j0; j <= j1; ++j)
      for (int i = i0; i <= i1; ++i) {
        double v = g[i + static_cast<std::size_t>(n0) * j];
        if (v == 0.0) continue;
        sum += v * clipped_area(poly, D.lo[0] + i * h0 - x[0], D.lo[0] + (i + 1) * h0 - x[0],
                                D.lo[1] + j * h1 - x[1], D.lo[1] + (j + 1) * h1 - x[1]);
      }
    best = std::max(best, sum / polygon_area(r, opt.polygon_sides));
  }
  return best;
}

namespace {

std::array<int, 2> grid_cells(int dim, int cells, int default_1d, int default_2d) {
  int n = cells > 0 ? cells : (dim == 1 ? default_1d : default_2d);
  return {n, dim == 1 ? 1 : n};
}

LusinRecord lusin_on_grid(const ScalarField& u, const GriddedFunction& M, std::uint64_t samples,
                          const RandomStream& stream, int workers) {
  LusinRecord rec;
  rec.samples = samples;
  const int dim = u.dimension();
  const int n0 = M.cells()[0], n1 = M.cells()[1];
  const double roundoff = 64.0 * std::numeric_limits<double>::epsilon() * u.sup_norm();
  struct Slot {
    int kind = 0;  // 0 skipped, 1 valid, 2 zero denominator, 3 zero denominator with a mismatch
    double ratio = 0.0;
    Point x{}, y{};
  };
  std::vector<Slot> slots(samples);
  parallel_for(samples, workers, [&](std::size_t s) {
    auto pick = [&](std::uint32_t d, int n) { return std::min(n - 1, static_cast<int>(stream.uniform(s, d) * n)); };
    int i = pick(0, n0), j = pick(1, n1), i2, j2;
    if (s % 2 == 0) {
      i2 = pick(2, n0);
      j2 = pick(3, n1);
    } else {
      // a near pair: offsets up to 4 cells
      i2 = std::clamp(i + pick(2, 9) - 4, 0, n0 - 1);
      j2 = dim == 1 ? 0 : std::clamp(j + pick(3, 9) - 4, 0, n1 - 1);
    }
    if (i == i2 && j == j2) return;
    std::size_t a = i + static_cast<std::size_t>(n0) * j, b = i2 + static_cast<std::size_t>(n0) * j2;
    Slot& sl = slots[s];
    sl.x = M.center(a);
    sl.y = M.center(b);
    double du = std::abs(u(sl.x) - u(sl.y));
    double den = distance(sl.x, sl.y, dim) * (M[a] + M[b]);
    if (den == 0.0) {
      sl.kind = du <= roundoff ? 2 : 3;
      return;
    }
    sl.kind = 1;
    sl.ratio = du / den;
  });
  for (const Slot& sl : slots) {
    if (sl.kind == 1) {
      ++rec.valid_pairs;
      if (sl.ratio > rec.c_emp) {
        rec.c_emp = sl.ratio;
        rec.worst_x = sl.x;
        rec.worst_y = sl.y;
      }
    } else if (sl.kind >= 2) {
      ++rec.zero_denominator;
      if (sl.kind == 3) ++rec.zero_denominator_mismatch;
    }
  }
  return rec;
}

}  // namespace

LusinRecord lusin_lipschitz_check(const ScalarField& u, std::uint64_t samples, const RandomStream& stream,
                                  const LusinOptions& opt) {
  const int dim = u.dimension();
  if (dim > 2) throw InvalidParameter("lusin_lipschitz_check: dimension must be 1 or 2");
  if (!(opt.margin >= 0.0)) throw InvalidParameter("lusin_lipschitz_check: margin must be >= 0");
  Box domain = u.support_box().dilated(opt.margin);
  GriddedFunction M = hl_maximal(gradient_magnitude_grid(u, domain, grid_cells(dim, opt.cells, 512, 64)), opt.maximal);
  return lusin_on_grid(u, M, samples, stream, opt.workers);
}

MaximalRouteRecord maximal_route_bound(const ScalarField& u, double p, const std::vector<double>& lambdas,
                                       const MaximalRouteOptions& opt) {
  if (!(p > 1.0))
    throw InvalidParameter("maximal_route_bound: p must exceed 1 (the maximal function is not bounded on L^1)");
  if (lambdas.empty()) throw InvalidParameter("maximal_route_bound: empty lambda grid");
  for (std::size_t i = 0; i < lambdas.size(); ++i)
    if (!(lambdas[i] > 0.0) || (i > 0 && !(lambdas[i] > lambdas[i - 1])))
      throw InvalidParameter("maximal_route_bound: lambda grid must be positive and ascending");
  const int dim = u.dimension();
  if (dim > 2) throw InvalidParameter("maximal_route_bound: dimension must be 1 or 2");

  MaximalRouteRecord rec;
  rec.p = p;
  rec.lambdas = lambdas;
  if (u.is_zero()) {
    rec.bound.assign(lambdas.size(), 0.0);
    rec.direct.assign(lambdas.size(), 0.0);
    rec.direct_error.assign(lambdas.size(), 0.0);
    rec.dominated.assign(lambdas.size(), true);
    return rec;
  }

  // every pair of E_lambda has both points within r_max of the support
  const double r_max = truncation_radius(LevelSetQuery::standard(u, p, lambdas.front()));
  const Box domain = u.support_box().dilated(r_max);
  GriddedFunction M =
      hl_maximal(gradient_magnitude_grid(u, domain, grid_cells(dim, opt.cells, 1024, 64)), opt.maximal);
  LusinRecord lusin = lusin_on_grid(u, M, opt.lusin_samples, opt.stream, opt.workers);
  rec.constant = opt.constant_safety * lusin.c_emp;
  for (std::size_t k = 0; k < M.size(); ++k) rec.maximal_lp += std::pow(M[k], p);
  rec.maximal_lp *= dim == 1 ? M.h(0) : M.h(0) * M.h(1);

  const GriddedFunction outer =
      opt.x_panels > 0 ? GriddedFunction(domain, {opt.x_panels, opt.x_panels},
                                         std::vector<double>(static_cast<std::size_t>(opt.x_panels) *
                                                                 (dim == 1 ? 1 : opt.x_panels),
                                                             0.0))
                       : M;
  const double cell = dim == 1 ? outer.h(0) : outer.h(0) * outer.h(1);
  SphereRule full = sphere_rule(dim, opt.sphere_order);
  SphereRule sphere = antipodal_half(full).value_or(full);
  const double m_max = M.max();
  const double e = static_cast<double>(dim) / p;  // |x - y|^{N/p}

  ProfileOptions po;
  po.polar = opt.direct;
  po.workers = opt.workers;
  DistributionProfile direct = distribution_profile(u, p, default_alpha(dim, p), lambdas, po);

  for (std::size_t li = 0; li < lambdas.size(); ++li) {
    const double K = 2.0 * rec.constant / lambdas[li];
    const double R = std::pow(K * m_max, 1.0 / e);
    // the set is symmetric in (x, y), so half the sphere with doubled weights
    double mu = parallel_sum(outer.size(), opt.workers, [&](std::size_t k) {
      Point x = outer.center(k);
      double mx = M.value_at(x);
      double a0 = std::pow(K * mx, 1.0 / e);
      double s = 0.0;
      for (std::size_t j = 0; j < sphere.size(); ++j) {
        const Point& w = sphere.nodes[j];
        // (0, a0] always belongs to the set; the scan continues from a0
        double m = std::pow(a0, dim) / dim;
        auto g = [&](double r) { return K * std::max(mx, M.value_at(along(x, w, r, dim))) - std::pow(r, e); };
        detail::scan_intervals(g, a0, R, true, opt.scan, opt.tol, [&](double lo, double hi) {
          m += (std::pow(hi, dim) - std::pow(lo, dim)) / dim;
        });
        s += sphere.weights[j] * m;
      }
      return cell * s;
    });
    rec.bound.push_back(std::pow(lambdas[li], p) * mu);
    rec.direct.push_back(direct.lambda_pow_p_mu(li));
    rec.direct_error.push_back(std::pow(lambdas[li], p) * direct.measures[li].error_estimate);
    bool ok = rec.bound.back() >= rec.direct.back() - 2.0 * rec.direct_error.back();
    rec.dominated.push_back(ok);
    rec.all_dominated = rec.all_dominated && ok;
  }
  return rec;
}

}  // namespace weaklp
