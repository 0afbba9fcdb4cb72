#include "weaklp/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <string>

#include "weaklp/errors.hpp"
#include "weaklp/parallel.hpp"

namespace weaklp {

namespace {

Rule1D compute_gauss(int n) {
  Rule1D r;
  r.nodes.resize(n);
  r.weights.resize(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 1.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      // P_n'(x) from the three-term recurrence
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    double p0 = 1.0, p1 = x;
    for (int k = 2; k <= n; ++k) {
      double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    dp = (n == 1) ? 1.0 : n * (x * p1 - p0) / (x * x - 1.0);
    double w = 2.0 / ((1.0 - x * x) * dp * dp);
    r.nodes[i] = -x;
    r.nodes[n - 1 - i] = x;
    r.weights[i] = w;
    r.weights[n - 1 - i] = w;
  }
  if (n % 2 == 1) r.nodes[n / 2] = 0.0;
  return r;
}

}  // namespace

const Rule1D& gauss_nodes_1d(int n) {
  if (n < 1) throw InvalidParameter("gauss_nodes_1d: n must be >= 1, got " + std::to_string(n));
  static std::mutex mutex;
  static std::map<int, std::unique_ptr<Rule1D>> cache;
  std::lock_guard<std::mutex> lock(mutex);
  auto& slot = cache[n];
  if (!slot) {
    if (n == 1) slot = std::make_unique<Rule1D>(Rule1D{{0.0}, {2.0}});
    else slot = std::make_unique<Rule1D>(compute_gauss(n));
  }
  return *slot;
}

Rule1D composite_gauss(double a, double b, int panels, int order,
                       std::span<const double> breakpoints) {
  if (!(b > a)) throw InvalidParameter("composite_gauss: empty interval");
  if (panels < 1 || order < 1) throw InvalidParameter("composite_gauss: panels and order must be >= 1");
  std::vector<double> edges{a};
  std::vector<double> inner(breakpoints.begin(), breakpoints.end());
  std::sort(inner.begin(), inner.end());
  double min_gap = 1e-12 * (b - a);
  for (double bp : inner)
    if (bp > a + min_gap && bp < b - min_gap && bp > edges.back() + min_gap) edges.push_back(bp);
  edges.push_back(b);

  const Rule1D& g = gauss_nodes_1d(order);
  Rule1D out;
  std::size_t segments = edges.size() - 1;
  out.nodes.reserve(static_cast<std::size_t>(panels + segments) * order);
  out.weights.reserve(out.nodes.capacity());
  for (std::size_t s = 0; s < segments; ++s) {
    double lo = edges[s], hi = edges[s + 1];
    int np = std::max(1, static_cast<int>(std::lround(panels * (hi - lo) / (b - a))));
    double h = (hi - lo) / np;
    for (int k = 0; k < np; ++k) {
      double c = lo + (k + 0.5) * h;
      for (std::size_t j = 0; j < g.size(); ++j) {
        out.nodes.push_back(c + 0.5 * h * g.nodes[j]);
        out.weights.push_back(0.5 * h * g.weights[j]);
      }
    }
  }
  return out;
}

TensorGrid::TensorGrid(int dim, std::vector<Rule1D> axes) : dim_(dim), axes_(std::move(axes)), size_(1) {
  if (static_cast<int>(axes_.size()) != dim_) throw InvalidParameter("TensorGrid: one rule per axis required");
  for (const auto& a : axes_) size_ *= a.size();
}

TensorGrid TensorGrid::over_box(const Box& box, int panels, int order,
                                const std::vector<std::vector<double>>& breakpoints) {
  std::vector<Rule1D> axes;
  for (int i = 0; i < box.dim; ++i) {
    std::span<const double> bp;
    if (i < static_cast<int>(breakpoints.size())) bp = breakpoints[i];
    axes.push_back(composite_gauss(box.lo[i], box.hi[i], panels, order, bp));
  }
  return TensorGrid(box.dim, std::move(axes));
}

double TensorGrid::node(std::size_t index, Point& x) const {
  double w = 1.0;
  for (int i = dim_ - 1; i >= 0; --i) {
    std::size_t n = axes_[i].size();
    std::size_t k = index % n;
    index /= n;
    x[i] = axes_[i].nodes[k];
    w *= axes_[i].weights[k];
  }
  return w;
}

double sphere_area(int dim) {
  if (dim < 1) throw InvalidParameter("sphere_area: dimension must be >= 1");
  return 2.0 * std::pow(std::numbers::pi, 0.5 * dim) / std::tgamma(0.5 * dim);
}

SphereRule sphere_rule(int dim, int order) { return sphere_rule(dim, order, 2 * order); }

SphereRule sphere_rule(int dim, int polar_order, int azimuth_order) {
  if (dim < 1 || dim > 4)
    throw InvalidParameter("sphere_rule: unsupported dimension " + std::to_string(dim));
  SphereRule rule;
  rule.dim = dim;
  if (dim == 1) {
    Point a{}, b{};
    a[0] = -1.0;
    b[0] = 1.0;
    rule.nodes = {a, b};
    rule.weights = {1.0, 1.0};
    return rule;
  }
  if (dim == 2) {
    int n = std::max(polar_order, 2);
    for (int k = 0; k < n; ++k) {
      double t = 2.0 * std::numbers::pi * k / n;
      Point w{};
      w[0] = std::cos(t);
      w[1] = std::sin(t);
      rule.nodes.push_back(w);
      rule.weights.push_back(2.0 * std::numbers::pi / n);
    }
    return rule;
  }
  // Latitude phi in [-pi/2, pi/2], w = (cos(phi) * w', sin(phi)),
  // dw = cos(phi)^{N-2} dphi dw'.
  int per_half = std::max(1, polar_order / 2);
  const Rule1D& g = gauss_nodes_1d(per_half);
  SphereRule sub = (dim == 3) ? sphere_rule(2, azimuth_order, azimuth_order)
                              : sphere_rule(dim - 1, polar_order, azimuth_order);
  const double quarter = 0.25 * std::numbers::pi;
  for (int half = 0; half < 2; ++half) {
    double centre = half == 0 ? -quarter : quarter;
    for (std::size_t j = 0; j < g.size(); ++j) {
      double phi = centre + quarter * g.nodes[j];
      double wphi = quarter * g.weights[j] * std::pow(std::cos(phi), dim - 2);
      for (std::size_t k = 0; k < sub.size(); ++k) {
        Point w{};
        for (int i = 0; i < dim - 1; ++i) w[i] = std::cos(phi) * sub.nodes[k][i];
        w[dim - 1] = std::sin(phi);
        rule.nodes.push_back(w);
        rule.weights.push_back(wphi * sub.weights[k]);
      }
    }
  }
  return rule;
}

std::optional<SphereRule> antipodal_half(const SphereRule& rule) {
  SphereRule half;
  half.dim = rule.dim;
  std::vector<bool> used(rule.size(), false);
  for (std::size_t i = 0; i < rule.size(); ++i) {
    if (used[i]) continue;
    std::size_t partner = rule.size();
    for (std::size_t j = i + 1; j < rule.size(); ++j) {
      if (used[j]) continue;
      double d = 0.0;
      for (int a = 0; a < rule.dim; ++a) d = std::max(d, std::abs(rule.nodes[i][a] + rule.nodes[j][a]));
      if (d < 1e-12 && std::abs(rule.weights[i] - rule.weights[j]) <= 1e-14 * rule.weights[i]) {
        partner = j;
        break;
      }
    }
    if (partner == rule.size()) return std::nullopt;
    used[i] = used[partner] = true;
    half.nodes.push_back(rule.nodes[i]);
    half.weights.push_back(2.0 * rule.weights[i]);
  }
  return half;
}

double k_closed_form(double p, int dim) {
  if (!(p >= 1.0)) throw InvalidParameter("k_constant: p must be >= 1");
  if (dim < 1) throw InvalidParameter("k_constant: dimension must be >= 1");
  return 2.0 * std::pow(std::numbers::pi, 0.5 * (dim - 1)) * std::exp(std::lgamma(0.5 * (p + 1.0)) - std::lgamma(0.5 * (dim + p)));
}

SphereConstants k_constant(double p, int dim) {
  SphereConstants c;
  c.k = k_closed_form(p, dim);
  c.sigma = sphere_area(dim);
  if (dim > 4) throw InvalidParameter("k_constant: quadrature check supports N <= 4");
  // e is the last axis. For N >= 3 the integrand only depends on the latitude,
  // so the azimuthal factor integrates to sigma_{N-2} exactly.
  double s = 0.0;
  if (dim <= 2) {
    SphereRule rule = dim == 1 ? sphere_rule(1, 1) : sphere_rule(2, 1 << 16);
    for (std::size_t i = 0; i < rule.size(); ++i)
      s += rule.weights[i] * std::pow(std::abs(rule.nodes[i][dim - 1]), p);
  } else {
    const double half_pi = 0.5 * std::numbers::pi;
    const double zero[] = {0.0};
    Rule1D lat = composite_gauss(-half_pi, half_pi, 256, 16, zero);
    for (std::size_t i = 0; i < lat.size(); ++i)
      s += lat.weights[i] * std::pow(std::abs(std::sin(lat.nodes[i])), p) * std::pow(std::cos(lat.nodes[i]), dim - 2);
    s *= sphere_area(dim - 1);
  }
  c.k_quadrature = s;
  if (std::abs(c.k_quadrature - c.k) > 1e-6 * c.k)
    throw ConsistencyError("k_constant: closed form " + std::to_string(c.k) + " disagrees with quadrature " +
                           std::to_string(c.k_quadrature));
  return c;
}

double lower_constant_cN(int dim) {
  double sigma = sphere_area(dim);
  return k_closed_form(1.0, dim) * std::min(1.0 / dim, 1.0 / sigma);
}

QuadratureResult monte_carlo(const std::function<double(const Point&)>& integrand,
                             const Sampler& sampler, std::uint64_t n,
                             const RandomStream& stream, int workers) {
  if (n == 0) throw InvalidParameter("monte_carlo: n must be positive");
  std::uint64_t blocks = (n + kMonteCarloBlock - 1) / kMonteCarloBlock;
  // Moments are accumulated about the first sample so that a constant
  // integrand yields an exactly zero variance.
  const double shift = integrand(sampler.draw(stream, 0));
  std::vector<double> sum(blocks, 0.0), sum2(blocks, 0.0);
  parallel_for(blocks, workers, [&](std::size_t b) {
    std::uint64_t begin = b * kMonteCarloBlock;
    std::uint64_t end = std::min(n, begin + kMonteCarloBlock);
    double s = 0.0, s2 = 0.0;
    for (std::uint64_t i = begin; i < end; ++i) {
      double v = integrand(sampler.draw(stream, i)) - shift;
      s += v;
      s2 += v * v;
    }
    sum[b] = s;
    sum2[b] = s2;
  });
  double s = 0.0, s2 = 0.0;
  for (std::uint64_t b = 0; b < blocks; ++b) {
    s += sum[b];
    s2 += sum2[b];
  }
  double nn = static_cast<double>(n);
  double centred = s / nn;
  double mean = shift + centred;
  double var = n > 1 ? std::max(0.0, (s2 - nn * centred * centred) / (nn - 1.0)) : 0.0;
  QuadratureResult r;
  r.value = sampler.measure * mean;
  r.error_estimate = sampler.measure * std::sqrt(var / nn);
  r.nodes_used = n;
  r.converged = true;
  return r;
}

}  // namespace weaklp
