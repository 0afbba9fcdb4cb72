#include "weaklp/seminorms.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "weaklp/errors.hpp"
#include "weaklp/parallel.hpp"

namespace weaklp {

void SeminormQuery::validate() const {
  if (!(s > 0.0 && s <= 1.0)) throw InvalidParameter("gagliardo: s must lie in (0, 1]");
  if (!(p >= 1.0)) throw InvalidParameter("gagliardo: p must be >= 1");
  if (!(inner_cutoff >= 0.0)) throw InvalidParameter("gagliardo: cutoff must be >= 0");
  if (s == 1.0 && inner_cutoff == 0.0)
    throw InvalidParameter("gagliardo: s = 1 needs a positive inner cutoff (the integral is infinite otherwise)");
}

namespace {

struct Budget {
  int x_panels, sphere_order, r_panels;
};

// Inner radial integral of |u(x + r w) - u(x)|^p r^{-1-sp} over [cutoff, exit]
// plus the exact outside-S tail.
double ray_integral(const ScalarField& u, const SeminormQuery& q, const GagliardoOptions& opt, int r_panels,
                    const Point& x, double ux, const Point& w, const std::vector<std::vector<double>>& bp) {
  const int dim = u.dimension();
  const Box& S = u.support_box();
  const double sp = q.s * q.p;
  const double beta = q.p - sp;  // exponent of r in (|du|/r)^p r^{beta - 1}
  const double exit = S.exit_distance(x, w);
  const double cutoff = q.inner_cutoff;
  const double p = q.p;
  auto powp = [p](double v) { return p == 1.0 ? v : p == 2.0 ? v * v : std::pow(v, p); };

  double total = 0.0;
  if (ux != 0.0) total += 2.0 * powp(std::abs(ux)) * std::pow(std::max(exit, cutoff), -sp) / sp;
  if (cutoff >= exit) return total;

  const Rule1D& g = gauss_nodes_1d(opt.r_order);
  auto diff = [&](double r) { return std::abs(u(along(x, w, r, dim)) - ux); };

  double r_split = std::min(exit, std::max(opt.r_split, cutoff));
  // near part: Gauss in v = log r on [lo, r_split], integrand (|du|/r)^p r^beta
  double lo = cutoff;
  if (cutoff == 0.0) {
    lo = opt.tiny_fraction * r_split;
    double q0 = std::abs(dot(u.gradient(x), w, dim));
    total += powp(q0) * std::pow(lo, beta) / beta;
  }
  if (r_split > lo) {
    double a = std::log(lo), b = std::log(r_split);
    int np = std::max(1, static_cast<int>(std::ceil((b - a) / opt.log_panel_width)));
    double h = (b - a) / np;
    for (int k = 0; k < np; ++k) {
      double c = a + (k + 0.5) * h;
      for (std::size_t j = 0; j < g.size(); ++j) {
        double v = c + 0.5 * h * g.nodes[j];
        double r = std::exp(v);
        total += 0.5 * h * g.weights[j] * powp(diff(r) / r) * std::pow(r, beta);
      }
    }
  }
  // far part: uniform r panels on [r_split, exit], aligned with the places
  // where the ray crosses the field's breakpoint planes
  if (exit > r_split) {
    std::array<double, 64> cuts{};
    int nc = 0;
    cuts[nc++] = r_split;
    for (int i = 0; i < dim && i < static_cast<int>(bp.size()); ++i) {
      if (w[i] == 0.0) continue;
      for (double c : bp[i]) {
        double t = (c - x[i]) / w[i];
        if (t > r_split && t < exit && nc < 63) cuts[nc++] = t;
      }
    }
    cuts[nc++] = exit;
    std::sort(cuts.begin(), cuts.begin() + nc);
    const double span = exit - r_split;
    for (int seg = 0; seg + 1 < nc; ++seg) {
      double s0 = cuts[seg], s1 = cuts[seg + 1];
      if (s1 - s0 <= 1e-14 * span) continue;
      int np = std::max(1, static_cast<int>(std::lround(r_panels * (s1 - s0) / span)));
      double h = (s1 - s0) / np;
      for (int k = 0; k < np; ++k) {
        double c = s0 + (k + 0.5) * h;
        for (std::size_t j = 0; j < g.size(); ++j) {
          double r = c + 0.5 * h * g.nodes[j];
          total += 0.5 * h * g.weights[j] * powp(diff(r)) * std::pow(r, -1.0 - sp);
        }
      }
    }
  }
  return total;
}

double gagliardo_level(const SeminormQuery& q, const GagliardoOptions& opt, const Budget& b) {
  const ScalarField& u = q.field;
  const int dim = u.dimension();
  const auto bp = u.breakpoints();
  SphereRule sphere = sphere_rule(dim, b.sphere_order);
  TensorGrid grid = TensorGrid::over_box(u.support_box(), b.x_panels, opt.x_order, bp);
  return parallel_sum(grid.size(), opt.workers, [&](std::size_t k) {
    Point x{};
    double wx = grid.node(k, x);
    double ux = u(x);
    double s = 0.0;
    for (std::size_t j = 0; j < sphere.size(); ++j)
      s += sphere.weights[j] * ray_integral(u, q, opt, b.r_panels, x, ux, sphere.nodes[j], bp);
    return wx * s;
  });
}

}  // namespace

QuadratureResult gagliardo(const SeminormQuery& q, const GagliardoOptions& opt) {
  q.validate();
  if (opt.x_panels < 1 || opt.x_order < 1 || opt.sphere_order < 1 || opt.r_panels < 1 || opt.r_order < 1)
    throw InvalidParameter("gagliardo: budgets must be positive");
  QuadratureResult res;
  if (q.field.is_zero()) return res;
  const int dim = q.field.dimension();
  Budget fine{opt.x_panels, opt.sphere_order, opt.r_panels};
  res.value = gagliardo_level(q, opt, fine);
  res.nodes_used = std::pow(opt.x_panels * opt.x_order, dim);
  if (opt.estimate_error) {
    Budget coarse{std::max(1, opt.x_panels / 2), dim == 1 ? opt.sphere_order : std::max(2, opt.sphere_order / 2),
                  std::max(1, opt.r_panels / 2)};
    double c = gagliardo_level(q, opt, coarse);
    res.error_estimate = std::abs(res.value - c);
    res.nodes_used += std::pow(coarse.x_panels * opt.x_order, dim);
    res.converged = res.error_estimate <= opt.rtol * std::abs(res.value);
  }
  return res;
}

namespace {

double least_squares_slope(const std::vector<double>& t, const std::vector<double>& v) {
  double n = static_cast<double>(t.size());
  double mt = 0.0, mv = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    mt += t[i] / n;
    mv += v[i] / n;
  }
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    num += (t[i] - mt) * (v[i] - mv);
    den += (t[i] - mt) * (t[i] - mt);
  }
  return num / den;
}

}  // namespace

DivergenceProbe diagonal_divergence_probe(const ScalarField& u, double p, const std::vector<double>& deltas,
                                          const GagliardoOptions& opt) {
  if (deltas.size() < 2) throw InvalidParameter("divergence probe: need at least two cutoffs");
  const double ratio = deltas[1] / deltas[0];
  for (std::size_t i = 0; i < deltas.size(); ++i) {
    if (!(deltas[i] > 0.0)) throw InvalidParameter("divergence probe: cutoffs must be positive");
    if (i > 0 && (!(deltas[i] < deltas[i - 1]) || std::abs(deltas[i] / deltas[i - 1] - ratio) > 1e-9 * ratio))
      throw InvalidParameter("divergence probe: cutoff ladder must be geometric and decreasing");
  }
  DivergenceProbe d;
  d.deltas = deltas;
  std::vector<double> t;
  for (double delta : deltas) {
    QuadratureResult r = gagliardo(SeminormQuery{u, 1.0, p, delta}, opt);
    d.values.push_back(r.value);
    d.errors.push_back(r.error_estimate);
    t.push_back(std::log(1.0 / delta));
  }
  d.slope = least_squares_slope(t, d.values);
  d.predicted = k_closed_form(p, u.dimension()) * gradient_lp_norm(u, p).value;
  d.relative_error = d.predicted > 0.0 ? std::abs(d.slope - d.predicted) / d.predicted : std::abs(d.slope);
  return d;
}

BbmLadder bbm_factor(const ScalarField& u, double p, const std::vector<double>& s_ladder, const GagliardoOptions& opt) {
  if (s_ladder.empty()) throw InvalidParameter("bbm_factor: empty ladder");
  for (std::size_t i = 0; i < s_ladder.size(); ++i) {
    if (!(s_ladder[i] > 0.0 && s_ladder[i] < 1.0)) throw InvalidParameter("bbm_factor: s must lie in (0, 1)");
    if (i > 0 && !(s_ladder[i] > s_ladder[i - 1])) throw InvalidParameter("bbm_factor: ladder must increase");
  }
  BbmLadder b;
  b.s = s_ladder;
  for (double s : s_ladder) {
    QuadratureResult r = gagliardo(SeminormQuery{u, s, p, 0.0}, opt);
    b.values.push_back((1.0 - s) * r.value);
    b.errors.push_back((1.0 - s) * r.error_estimate);
  }
  b.plateau = b.values.back();
  double grad = gradient_lp_norm(u, p).value;
  b.predicted = k_closed_form(p, u.dimension()) / p * grad;
  b.measured_multiple = grad > 0.0 ? b.plateau / grad : 0.0;
  b.relative_error = b.predicted > 0.0 ? std::abs(b.plateau - b.predicted) / b.predicted : std::abs(b.plateau);
  return b;
}

}  // namespace weaklp
