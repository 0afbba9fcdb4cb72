#include "weaklp/levelset.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "weaklp/errors.hpp"
#include "weaklp/parallel.hpp"
#include "scan1d.hpp"

namespace weaklp {

double default_alpha(int dim, double p) { return dim / p + 1.0; }

LevelSetQuery LevelSetQuery::standard(const ScalarField& u, double p, double lambda) {
  return LevelSetQuery{u, p, default_alpha(u.dimension(), p), lambda};
}

void LevelSetQuery::validate() const {
  if (!(p >= 1.0)) throw InvalidParameter("level set: p must be >= 1");
  if (!(alpha > 0.0)) throw InvalidParameter("level set: alpha must be positive");
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw InvalidParameter("level set: lambda must be positive");
}

double truncation_radius(const LevelSetQuery& q) {
  const ScalarField& u = q.field;
  if (u.is_zero()) return 0.0;
  double r = std::pow(2.0 * u.sup_norm() / q.lambda, 1.0 / q.alpha);
  if (q.alpha > 1.0) r = std::min(r, std::pow(u.lip() / q.lambda, 1.0 / (q.alpha - 1.0)));
  return r;
}

namespace {

// Walks one ray and reports each membership interval (lo, hi] to emit.
// Returns the number of sign changes found.
template <class Emit>
int scan_ray(const ScalarField& u, const Point& x, const Point& w, double lambda, double alpha,
             double r_max, const ScanOptions& opt, Emit&& emit) {
  if (r_max <= 0.0) return 0;
  const int dim = u.dimension();
  const Box& box = u.support_box();
  const double ux = u(x);
  auto excess = [&](double r) { return std::abs(u(along(x, w, r, dim)) - ux) - lambda * std::pow(r, alpha); };
  auto member = [&](double r) { return excess(r) >= 0.0; };

  const bool inside = box.contains(x);
  double a, b;
  bool state;
  if (inside) {
    a = 0.0;
    b = std::min(r_max, box.exit_distance(x, w));
    // sign of g just right of r = 0 from the first-order expansion
    double slope = std::abs(dot(u.gradient(x), w, dim));
    if (alpha > 1.0 && slope > 0.0) state = true;
    else if (alpha < 1.0) state = false;
    else if (alpha == 1.0 && slope != lambda) state = slope > lambda;
    else state = member(1e-9 * std::max(b, 1e-300));
  } else {
    auto [enter, leave] = box.ray_span(x, w);
    if (!(enter <= leave) || enter >= r_max) return 0;
    // u vanishes on the box boundary, so the ray enters outside E_lambda
    a = enter;
    b = std::min(leave, r_max);
    state = false;
  }

  bool open = false;
  double open_at = a;
  int crossings = detail::scan_intervals(excess, a, b, state, opt.scan, opt.tol, emit, &open, &open_at);
  state = open;
  // Past the support box u(x + r w) = 0, so membership is |u(x)| >= lambda r^alpha.
  double tail_end = b;
  if (inside && b < r_max && ux != 0.0) {
    double rt = std::min(std::pow(std::abs(ux) / lambda, 1.0 / alpha), r_max);
    if (rt > b) {
      if (!state) open_at = b;
      state = true;
      tail_end = rt;
    }
  }
  if (state) emit(open_at, tail_end);
  return crossings;
}

double interval_measure(double lo, double hi, int dim) {
  if (dim == 1) return hi - lo;
  if (dim == 2) return 0.5 * (hi * hi - lo * lo);
  return (std::pow(hi, dim) - std::pow(lo, dim)) / dim;
}

}  // namespace

double RadialProfile::polar_measure(int dim) const {
  double s = 0.0;
  for (auto [lo, hi] : intervals) s += interval_measure(lo, hi, dim);
  return s;
}

RadialProfile radial_levelset(const LevelSetQuery& q, const Point& x, const Point& w, const ScanOptions& opt) {
  q.validate();
  if (opt.scan < 16) throw InvalidParameter("radial_levelset: scan must be >= 16");
  RadialProfile prof;
  prof.x = x;
  prof.direction = w;
  prof.r_max = truncation_radius(q);
  prof.crossings = scan_ray(q.field, x, w, q.lambda, q.alpha, prof.r_max, opt,
                            [&](double lo, double hi) { prof.intervals.emplace_back(lo, hi); });
  prof.crossing_cap_hit = prof.crossings > opt.crossing_cap;
  return prof;
}

SandwichBounds sandwich_bounds(const ScalarField& u, double p, double lambda, const Point& x, const Point& w,
                               double delta) {
  if (!(delta > 0.0 && delta < 1.0)) throw InvalidParameter("sandwich_bounds: delta must lie in (0, 1)");
  if (!(p >= 1.0)) throw InvalidParameter("sandwich_bounds: p must be >= 1");
  const double L = u.lip();
  if (!(lambda > L)) throw PreconditionError("sandwich_bounds: requires lambda > L");
  const int dim = u.dimension();
  const double e = p / dim;
  const double g = std::abs(dot(u.gradient(x), w, dim));
  const double A = u.hess();
  SandwichBounds b;
  b.delta = delta;
  double first = A > 0.0 ? delta * g / A : std::numeric_limits<double>::infinity();
  b.lower = std::min(first, std::pow((1.0 - delta) * g / lambda, e));
  if (u.distance_to_support(x) <= 1.0) b.upper = std::pow((g + A * std::pow(L / lambda, e)) / lambda, e);
  return b;
}

SandwichVerdict verify_sandwich(const ScalarField& u, double p, double lambda, std::uint64_t samples, double delta,
                                const RandomStream& stream, const ScanOptions& opt, int workers) {
  SandwichVerdict v;
  v.samples = samples;
  if (u.is_zero()) {
    v.vacuous = true;
    return v;
  }
  const int dim = u.dimension();
  const Box region = u.support_box().dilated(1.25);
  LevelSetQuery q = LevelSetQuery::standard(u, p, lambda);
  struct Slot {
    bool lower_bad = false, upper_bad = false, nonempty = false, skipped = false;
  };
  const double resolution = 64.0 * std::numeric_limits<double>::epsilon() * u.sup_norm();
  std::vector<Slot> slots(samples);
  parallel_for(samples, workers, [&](std::size_t i) {
    Point x = stream.in_box(region, i, 0);
    Point w = stream.direction(i, dim, dim);
    SandwichBounds sb = sandwich_bounds(u, p, lambda, x, w, delta);
    RadialProfile prof = radial_levelset(q, x, w, opt);
    const double slack = 4.0 * opt.tol * std::max(prof.r_max, 1e-300);
    Slot& s = slots[i];
    s.nonempty = !prof.intervals.empty();
    for (auto [lo, hi] : prof.intervals)
      if (hi > sb.upper + slack) s.upper_bad = true;
    const double g = std::abs(dot(u.gradient(x), w, dim));
    if (sb.lower > 0.0 && g * sb.lower < resolution) {
      s.skipped = true;
    } else if (sb.lower > 0.0) {
      double need = sb.lower * (1.0 - 1e-9) - slack;
      bool ok = !prof.intervals.empty() && prof.intervals.front().first == 0.0 &&
                prof.intervals.front().second >= std::min(need, prof.r_max);
      if (!ok) s.lower_bad = true;
    }
  });
  for (const Slot& s : slots) {
    v.lower_violations += s.lower_bad;
    v.upper_violations += s.upper_bad;
    v.nonempty += s.nonempty;
    v.roundoff_skipped += s.skipped;
  }
  return v;
}

namespace {

double polar_level(const LevelSetQuery& q, const Box& box, int panels, int order, int sphere_order,
                   const ScanOptions& scan, double r_max, int workers, bool& cap_hit) {
  const ScalarField& u = q.field;
  const int dim = u.dimension();
  SphereRule full = sphere_rule(dim, sphere_order);
  std::optional<SphereRule> half = antipodal_half(full);
  const SphereRule& sphere = half ? *half : full;
  TensorGrid grid = TensorGrid::over_box(box, panels, order, u.breakpoints());
  std::vector<double> slot(grid.size(), 0.0);
  std::vector<char> capped(grid.size(), 0);
  parallel_for(grid.size(), workers, [&](std::size_t k) {
    Point x{};
    double wx = grid.node(k, x);
    double s = 0.0;
    for (std::size_t j = 0; j < sphere.size(); ++j) {
      double ray = 0.0;
      int c = scan_ray(u, x, sphere.nodes[j], q.lambda, q.alpha, r_max, scan,
                       [&](double lo, double hi) { ray += interval_measure(lo, hi, dim); });
      if (c > scan.crossing_cap) capped[k] = 1;
      s += sphere.weights[j] * ray;
    }
    slot[k] = wx * s;
  });
  double total = 0.0;
  for (double v : slot) total += v;
  for (char c : capped) cap_hit = cap_hit || c;
  return total;
}

}  // namespace

QuadratureResult pair_measure_polar(const LevelSetQuery& q, const PolarOptions& opt) {
  q.validate();
  if (opt.scan.scan < 16) throw InvalidParameter("pair_measure_polar: scan must be >= 16");
  if (opt.x_panels < 1 || opt.x_order < 1 || opt.sphere_order < 1)
    throw InvalidParameter("pair_measure_polar: budgets must be positive");
  QuadratureResult res;
  const double r_max = truncation_radius(q);
  if (r_max == 0.0) return res;
  const Box needed = q.field.support_box().dilated(r_max);
  Box box = needed;
  if (opt.x_box) {
    if (!opt.x_box->covers(needed))
      throw PreconditionError("pair_measure_polar: x grid must cover the support box dilated by r_max");
    box = *opt.x_box;
  }
  bool cap_hit = false;
  const int dim = q.field.dimension();
  res.value = polar_level(q, box, opt.x_panels, opt.x_order, opt.sphere_order, opt.scan, r_max, opt.workers, cap_hit);
  std::size_t nodes = std::pow(opt.x_panels * opt.x_order, dim);
  if (opt.estimate_error) {
    ScanOptions coarse_scan = opt.scan;
    coarse_scan.scan = std::max(16, opt.scan.scan / 2);
    int coarse_sphere = dim == 1 ? opt.sphere_order : std::max(2, opt.sphere_order / 2);
    bool ignored = false;
    double coarse = polar_level(q, box, std::max(1, opt.x_panels / 2), opt.x_order, coarse_sphere, coarse_scan,
                                r_max, opt.workers, ignored);
    res.error_estimate = std::abs(res.value - coarse);
    nodes += std::pow(std::max(1, opt.x_panels / 2) * opt.x_order, dim);
    res.converged = res.error_estimate <= opt.rtol * std::abs(res.value) && !cap_hit;
  } else {
    res.converged = !cap_hit;
  }
  res.nodes_used = nodes;
  return res;
}

QuadratureResult pair_measure_mc(const LevelSetQuery& q, std::uint64_t n, const RandomStream& stream, int workers) {
  q.validate();
  if (n < 1000) throw InvalidParameter("pair_measure_mc: n must be >= 1000");
  QuadratureResult res;
  res.nodes_used = n;
  const double r_max = truncation_radius(q);
  if (r_max == 0.0) return res;
  const ScalarField& u = q.field;
  const int dim = u.dimension();
  const Box box = u.support_box().dilated(r_max);
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
      if (std::abs(u(along(x, w, r, dim)) - u(x)) >= q.lambda * std::pow(r, q.alpha)) ++h;
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

std::string to_string(Estimator e) { return e == Estimator::polar ? "polar" : "mc"; }

Estimator estimator_from_string(const std::string& s) {
  if (s == "polar") return Estimator::polar;
  if (s == "mc") return Estimator::mc;
  throw InvalidParameter("unknown estimator '" + s + "' (expected polar or mc)");
}

std::vector<double> log_grid(double lo, double hi, int n) {
  if (!(lo > 0.0) || !(hi > lo) || n < 2) throw InvalidParameter("log_grid: need 0 < lo < hi and n >= 2");
  std::vector<double> g(n);
  double a = std::log(lo), b = std::log(hi);
  for (int i = 0; i < n; ++i) g[i] = std::exp(a + (b - a) * i / (n - 1));
  g.front() = lo;
  g.back() = hi;
  return g;
}

double DistributionProfile::lambda_pow_p_mu(std::size_t i) const {
  return std::pow(lambdas[i], p) * measures[i].value;
}

bool DistributionProfile::all_converged() const {
  for (const auto& m : measures)
    if (!m.converged) return false;
  return true;
}

namespace {

QuadratureResult measure_with(const ScalarField& u, double p, double alpha, double lambda, const ProfileOptions& opt,
                              std::uint64_t salt) {
  LevelSetQuery q{u, p, alpha, lambda};
  if (opt.estimator == Estimator::polar) {
    PolarOptions po = opt.polar;
    if (po.workers == 0) po.workers = opt.workers;
    return pair_measure_polar(q, po);
  }
  return pair_measure_mc(q, opt.mc_samples, opt.stream.split(salt), opt.workers);
}

}  // namespace

DistributionProfile distribution_profile(const ScalarField& u, double p, double alpha,
                                         const std::vector<double>& lambdas, const ProfileOptions& opt) {
  if (lambdas.empty()) throw InvalidParameter("distribution_profile: empty lambda grid");
  for (std::size_t i = 0; i < lambdas.size(); ++i) {
    if (!(lambdas[i] > 0.0)) throw InvalidParameter("distribution_profile: lambda must be positive");
    if (i > 0 && !(lambdas[i] > lambdas[i - 1]))
      throw InvalidParameter("distribution_profile: lambda grid must be strictly ascending");
  }
  DistributionProfile prof;
  prof.field = u;
  prof.p = p;
  prof.alpha = alpha;
  prof.options = opt;
  prof.lambdas = lambdas;
  prof.measures.reserve(lambdas.size());
  for (std::size_t i = 0; i < lambdas.size(); ++i) prof.measures.push_back(measure_with(u, p, alpha, lambdas[i], opt, i));
  for (std::size_t i = 0; i + 1 < lambdas.size(); ++i) {
    const auto& a = prof.measures[i];
    const auto& b = prof.measures[i + 1];
    if (b.value > a.value + a.error_estimate + b.error_estimate) prof.monotonicity_violations.push_back(static_cast<int>(i));
  }
  return prof;
}

QuadratureResult profile_measure_at(const DistributionProfile& prof, double lambda, std::uint64_t salt) {
  return measure_with(prof.field, prof.p, prof.alpha, lambda, prof.options, salt);
}

WeakQuasinorm weak_quasinorm(const DistributionProfile& prof, int refine) {
  if (prof.size() == 0) throw InvalidParameter("weak_quasinorm: empty profile");
  WeakQuasinorm r;
  std::size_t best = 0;
  double best_v = prof.lambda_pow_p_mu(0);
  for (std::size_t i = 1; i < prof.size(); ++i) {
    double v = prof.lambda_pow_p_mu(i);
    if (v > best_v) {
      best_v = v;
      best = i;
    }
  }
  r.grid_argmax = best;
  r.grid_value = best_v;
  r.value = best_v;
  r.lambda_at_sup = prof.lambdas[best];
  r.converged = prof.measures[best].converged;
  r.at_grid_edge = prof.size() > 1 && (best == 0 || best + 1 == prof.size());
  if (best_v > 0.0 && refine > 0 && prof.size() >= 2) {
    double a = std::log(prof.lambdas[best == 0 ? 0 : best - 1]);
    double b = std::log(prof.lambdas[std::min(best + 1, prof.size() - 1)]);
    const double ratio = 0.5 * (std::sqrt(5.0) - 1.0);
    std::uint64_t salt = 1u << 20;
    auto eval = [&](double t) {
      double lam = std::exp(t);
      QuadratureResult m = profile_measure_at(prof, lam, salt++);
      ++r.evaluations;
      double v = std::pow(lam, prof.p) * m.value;
      if (v > r.value) {
        r.value = v;
        r.lambda_at_sup = lam;
        r.converged = m.converged;
      }
      return v;
    };
    double c = b - ratio * (b - a), d = a + ratio * (b - a);
    double fc = eval(c), fd = eval(d);
    for (int it = 2; it < refine; ++it) {
      if (fc >= fd) {
        b = d;
        d = c;
        fd = fc;
        c = b - ratio * (b - a);
        fc = eval(c);
      } else {
        a = c;
        c = d;
        fc = fd;
        d = a + ratio * (b - a);
        fd = eval(d);
      }
    }
  }
  r.quasinorm = std::pow(r.value, 1.0 / prof.p);
  return r;
}

LimitEstimate tail_limit(const DistributionProfile& prof, int window, double tol) {
  if (window < 1 || window > static_cast<int>(prof.size()))
    throw InvalidParameter("tail_limit: window must lie in [1, grid size]");
  LimitEstimate e;
  e.window = window;
  e.tolerance = tol;
  std::size_t start = prof.size() - window;
  double s = 0.0;
  for (std::size_t i = start; i < prof.size(); ++i) s += prof.lambda_pow_p_mu(i);
  e.plateau = s / window;
  if (e.plateau == 0.0) {
    e.flatness = 0.0;
    e.converged = true;
    return e;
  }
  for (std::size_t i = start; i < prof.size(); ++i)
    e.flatness = std::max(e.flatness, std::abs(prof.lambda_pow_p_mu(i) - e.plateau) / std::abs(e.plateau));
  e.converged = e.flatness < tol;
  return e;
}

double limit_prediction(const ScalarField& u, double p) {
  const int dim = u.dimension();
  return k_closed_form(p, dim) / dim * gradient_lp_norm(u, p).value;
}

}  // namespace weaklp
