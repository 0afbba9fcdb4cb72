#include "weaklp/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <deque>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "weaklp/corollaries.hpp"
#include "weaklp/covering.hpp"
#include "weaklp/levelset.hpp"
#include "weaklp/maximal.hpp"
#include "weaklp/parallel.hpp"
#include "weaklp/quadrature.hpp"
#include "weaklp/seminorms.hpp"

namespace weaklp {

using json = nlohmann::json;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string join(const std::string& where, const std::string& key) { return where.empty() ? key : where + "." + key; }
std::string index(const std::string& where, std::size_t i) { return where + "[" + std::to_string(i) + "]"; }

void require(bool ok, const std::string& where, const std::string& what) {
  if (!ok) throw ConfigError(where, what);
}

// Typed access to one JSON object; every key read is remembered so that
// finish() can reject typos.
class Params {
 public:
  Params(const json& j, std::string where) : j_(j), where_(std::move(where)) {
    require(j_.is_object(), where_.empty() ? "config" : where_, "expected an object");
  }

  const std::string& where() const { return where_; }
  std::string at(const std::string& key) const { return join(where_, key); }

  bool has(const std::string& key) const {
    used_.insert(key);
    return j_.contains(key) && !j_.at(key).is_null();
  }

  const json& raw(const std::string& key) const {
    require(has(key), at(key), "missing");
    return j_.at(key);
  }

  double number(const std::string& key, std::optional<double> def = {}) const {
    if (!has(key)) {
      require(def.has_value(), at(key), "missing");
      return *def;
    }
    return to_number(j_.at(key), at(key));
  }

  double positive(const std::string& key, std::optional<double> def = {}) const {
    double v = number(key, def);
    require(v > 0.0 && std::isfinite(v), at(key), "must be positive and finite");
    return v;
  }

  int integer(const std::string& key, std::optional<int> def = {}) const {
    if (!has(key)) {
      require(def.has_value(), at(key), "missing");
      return *def;
    }
    const json& v = j_.at(key);
    require(v.is_number_integer(), at(key), "expected an integer");
    return v.get<int>();
  }

  int count(const std::string& key, std::optional<int> def = {}) const {
    int v = integer(key, def);
    require(v >= 1, at(key), "must be at least 1");
    return v;
  }

  std::uint64_t unsigned_integer(const std::string& key, std::optional<std::uint64_t> def = {}) const {
    if (!has(key)) {
      require(def.has_value(), at(key), "missing");
      return *def;
    }
    const json& v = j_.at(key);
    require(v.is_number_unsigned() || (v.is_number_integer() && v.get<std::int64_t>() >= 0), at(key),
            "expected a non-negative integer");
    return v.get<std::uint64_t>();
  }

  bool flag(const std::string& key, bool def) const {
    if (!has(key)) return def;
    require(j_.at(key).is_boolean(), at(key), "expected true or false");
    return j_.at(key).get<bool>();
  }

  std::string text(const std::string& key, std::optional<std::string> def = {}) const {
    if (!has(key)) {
      require(def.has_value(), at(key), "missing");
      return *def;
    }
    require(j_.at(key).is_string(), at(key), "expected a string");
    return j_.at(key).get<std::string>();
  }

  std::vector<double> numbers(const std::string& key, std::optional<std::vector<double>> def = {}) const {
    if (!has(key)) {
      require(def.has_value(), at(key), "missing");
      return *def;
    }
    const json& v = j_.at(key);
    require(v.is_array(), at(key), "expected an array of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < v.size(); ++i) out.push_back(to_number(v[i], index(at(key), i)));
    return out;
  }

  /// Nested object; an absent key yields an empty object.
  Params object(const std::string& key) const {
    static const json empty = json::object();
    return Params(has(key) ? j_.at(key) : empty, at(key));
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      require(used_.count(it.key()) > 0 || it.key() == "comment", at(it.key()), "unknown parameter");
  }

  static double to_number(const json& v, const std::string& where) {
    if (v.is_string()) {
      const std::string s = v.get<std::string>();
      if (s == "inf" || s == "infinity") return kInf;
    }
    require(v.is_number(), where, "expected a number");
    return v.get<double>();
  }

 private:
  const json& j_;
  std::string where_;
  mutable std::set<std::string> used_;
};

void each_positive(const std::vector<double>& v, const std::string& where) {
  require(!v.empty(), where, "must not be empty");
  for (std::size_t i = 0; i < v.size(); ++i)
    require(v[i] > 0.0 && std::isfinite(v[i]), index(where, i), "must be positive and finite");
}

void ascending(const std::vector<double>& v, const std::string& where) {
  for (std::size_t i = 1; i < v.size(); ++i) require(v[i] > v[i - 1], index(where, i), "must increase");
}

void descending(const std::vector<double>& v, const std::string& where) {
  for (std::size_t i = 1; i < v.size(); ++i) require(v[i] < v[i - 1], index(where, i), "must decrease");
}

double relative(double a, double b) {
  if (b == 0.0) return a == 0.0 ? 0.0 : kInf;
  return std::abs(a - b) / std::abs(b);
}

Point point_from(const Params& p, const std::string& key, int dim, std::optional<double> fill) {
  Point x{};
  if (!p.has(key)) {
    require(fill.has_value(), p.at(key), "missing");
    for (int i = 0; i < dim; ++i) x[i] = *fill;
    return x;
  }
  std::vector<double> v = p.numbers(key);
  require(static_cast<int>(v.size()) == dim, p.at(key), "expected " + std::to_string(dim) + " coordinates");
  for (int i = 0; i < dim; ++i) {
    require(std::isfinite(v[i]), index(p.at(key), i), "must be finite");
    x[i] = v[i];
  }
  return x;
}

int dimension(const Params& p) {
  int dim = p.integer("dim", 1);
  require(dim >= 1 && dim <= 4, p.at("dim"), "must lie in 1..4");
  return dim;
}

// ---------------------------------------------------------------------------
// Run context

struct Context {
  Params cfg;
  int workers = 0;
  std::uint64_t seed = 0;
  bool has_seed = false;
  ExperimentResult* out = nullptr;
  json results = json::object();
  std::chrono::steady_clock::time_point started = std::chrono::steady_clock::now();

  std::uint64_t require_seed() const {
    require(has_seed, cfg.at("seed"), "required for experiments that sample at random");
    return seed;
  }

  void stage(const std::string& name) {
    auto now = std::chrono::steady_clock::now();
    out->timing["stages"][name] = std::chrono::duration<double>(now - started).count();
    started = now;
  }

  void verdict(const std::string& key, bool ok, double measured, double expected, double tolerance,
               const std::string& rule, bool conclusive = true) {
    Verdict v{key, conclusive ? (ok ? Status::pass : Status::fail) : Status::inconclusive, measured, expected,
              tolerance, rule};
    out->verdicts.push_back(v);
  }

  // deque: references handed out stay valid while more tables are added
  std::deque<CsvTable> tables;

  CsvTable& table(const std::string& name, std::vector<std::string> columns) {
    tables.push_back(CsvTable{name, std::move(columns), {}});
    return tables.back();
  }

  void constant(const std::string& name, int dim, double p, double value) {
    results["empirical_constants"].push_back({{"name", name}, {"N", dim}, {"p", p}, {"value", value}});
  }
};

ScalarField field_of(Context& c) { return field_from_json(c.cfg.raw("field"), c.cfg.at("field")); }

double exponent_p(const Params& p, double def, bool strict = false) {
  double v = p.number("p", def);
  require(std::isfinite(v) && (strict ? v > 1.0 : v >= 1.0), p.at("p"),
          strict ? "must lie in (1, infinity)" : "must lie in [1, infinity)");
  return v;
}

PolarOptions polar_options(const Params& b, int workers) {
  PolarOptions po;
  po.x_panels = b.count("x_panels", po.x_panels);
  po.x_order = b.count("x_order", po.x_order);
  po.sphere_order = b.count("sphere_order", po.sphere_order);
  po.scan.scan = b.count("scan", po.scan.scan);
  require(po.scan.scan >= 16, b.at("scan"), "must be at least 16");
  po.rtol = b.positive("rtol", po.rtol);
  po.workers = workers;
  b.finish();
  return po;
}

PolarOptions doubled(PolarOptions po) {
  po.x_panels *= 2;
  po.sphere_order *= 2;
  po.scan.scan *= 2;
  return po;
}

GagliardoOptions gagliardo_options(const Params& b, int workers) {
  GagliardoOptions g;
  g.x_panels = b.count("x_panels", g.x_panels);
  g.sphere_order = b.count("sphere_order", g.sphere_order);
  g.r_panels = b.count("r_panels", g.r_panels);
  g.rtol = b.positive("rtol", g.rtol);
  g.workers = workers;
  b.finish();
  return g;
}

std::vector<double> lambda_grid(const Params& c, double scale, double lo, double hi, int points) {
  if (c.has("lambdas")) {
    std::vector<double> l = c.numbers("lambdas");
    each_positive(l, c.at("lambdas"));
    ascending(l, c.at("lambdas"));
    return l;
  }
  lo = c.positive("lambda_min_factor", lo);
  hi = c.positive("lambda_max_factor", hi);
  points = c.count("points", points);
  require(hi > lo, c.at("lambda_max_factor"), "must exceed lambda_min_factor");
  require(points >= 2, c.at("points"), "must be at least 2");
  return log_grid(lo * scale, hi * scale, points);
}

void profile_rows(CsvTable& t, const std::string& level, const DistributionProfile& prof) {
  for (std::size_t i = 0; i < prof.size(); ++i)
    t.add(level, prof.lambdas[i], prof.measures[i].value, prof.measures[i].error_estimate, prof.lambda_pow_p_mu(i),
          prof.measures[i].converged);
}

// ---------------------------------------------------------------------------
// Experiments

void run_constants(Context& c) {
  std::vector<double> dims = c.cfg.numbers("dims", std::vector<double>{1, 2, 3});
  std::vector<double> ps = c.cfg.numbers("ps", std::vector<double>{1, 1.25, 1.5, 2, 3, 4});
  const double tol = c.cfg.positive("tolerance", 1e-6);
  c.cfg.finish();
  require(!dims.empty(), c.cfg.at("dims"), "must not be empty");
  require(!ps.empty(), c.cfg.at("ps"), "must not be empty");
  for (std::size_t i = 0; i < dims.size(); ++i)
    require(dims[i] == std::floor(dims[i]) && dims[i] >= 1 && dims[i] <= 4, index(c.cfg.at("dims"), i),
            "must be an integer in 1..4");
  for (std::size_t i = 0; i < ps.size(); ++i)
    require(ps[i] >= 1.0 && std::isfinite(ps[i]), index(c.cfg.at("ps"), i), "must lie in [1, infinity)");
  CsvTable& t = c.table("constants.csv", {"N", "p", "k_closed", "k_quad", "sigma"});
  double worst = 0.0;
  for (double d : dims)
    for (double p : ps) {
      const int dim = static_cast<int>(d);
      double closed = k_closed_form(p, dim), quad = std::nan("");
      try {
        quad = k_constant(p, dim).k_quadrature;
      } catch (const ConsistencyError&) {
      }
      worst = std::max(worst, std::isnan(quad) ? kInf : relative(closed, quad));
      t.add(dim, p, closed, quad, sphere_area(dim));
      c.results["constants"].push_back(
          {{"N", dim}, {"p", p}, {"k_closed", closed}, {"k_quad", quad}, {"sigma", sphere_area(dim)}});
    }
  c.verdict("constants:closed_form_vs_quadrature", worst <= tol, worst, 0.0, tol,
            "max relative difference <= tolerance");
  c.stage("constants");
}

void run_limit(Context& c) {
  ScalarField u = field_of(c);
  const double p = exponent_p(c.cfg, 1.0);
  const int dim = u.dimension();
  require(dim <= 3, c.cfg.at("field"), "pair-measure experiments support N <= 3");
  const double L = u.lip();
  std::vector<double> lambdas = lambda_grid(c.cfg, L > 0 ? L : 1.0, 10.0, 1e4, 10);
  const int window = c.cfg.count("window", 4);
  require(window <= static_cast<int>(lambdas.size()), c.cfg.at("window"), "exceeds the number of lambdas");
  const double flatness = c.cfg.positive("flatness", 0.03);
  const double tol = c.cfg.positive("tolerance", 0.05);
  ProfileOptions po;
  po.estimator = estimator_from_string(c.cfg.text("estimator", std::string("polar")));
  po.mc_samples = c.cfg.unsigned_integer("mc_samples", 200000);
  if (po.estimator == Estimator::mc) {
    require(po.mc_samples >= 1000, c.cfg.at("mc_samples"), "must be at least 1000");
    po.stream = RandomStream(c.require_seed());
  }
  po.polar = polar_options(c.cfg.object("budget"), c.workers);
  po.workers = c.workers;
  const bool sandwich = c.cfg.has("sandwich");
  std::vector<double> factors, deltas;
  std::uint64_t samples = 0;
  if (sandwich) {
    Params s = c.cfg.object("sandwich");
    factors = s.numbers("lambda_factors", std::vector<double>{10, 100});
    deltas = s.numbers("deltas", std::vector<double>{0.25, 0.5});
    samples = s.unsigned_integer("samples", 10000);
    s.finish();
    for (std::size_t i = 0; i < factors.size(); ++i)
      require(factors[i] > 1.0 && std::isfinite(factors[i]), index(s.at("lambda_factors"), i),
              "must exceed 1 (the radii need lambda > L)");
    for (std::size_t i = 0; i < deltas.size(); ++i)
      require(deltas[i] > 0.0 && deltas[i] < 1.0, index(s.at("deltas"), i), "must lie in (0, 1)");
    require(samples >= 1, s.at("samples"), "must be at least 1");
    c.require_seed();
  }
  c.cfg.finish();

  DistributionProfile prof = distribution_profile(u, p, default_alpha(dim, p), lambdas, po);
  c.stage("profile");
  LimitEstimate lim = tail_limit(prof, window, flatness);
  const double predicted = limit_prediction(u, p);
  CsvTable& t = c.table("profile.csv", {"level", "lambda", "mu", "error", "lambda_p_mu", "converged"});
  profile_rows(t, "main", prof);
  double err = relative(lim.plateau, predicted);
  c.results["limit"] = {{"plateau", lim.plateau},     {"flatness", lim.flatness},
                        {"window", window},           {"predicted", predicted},
                        {"relative_error", err},      {"plateau_converged", lim.converged},
                        {"all_converged", prof.all_converged()},
                        {"monotonicity_violations", prof.monotonicity_violations.size()}};
  c.verdict("thm1.2:limit", err <= tol, lim.plateau, predicted, tol,
            "|plateau - k(p,N)/N ||grad u||_p^p| <= tolerance * prediction", lim.converged && prof.all_converged());

  if (sandwich) {
    CsvTable& st = c.table("sandwich.csv", {"lambda", "delta", "samples", "nonempty", "lower_violations",
                                            "upper_violations", "roundoff_skipped"});
    std::uint64_t bad = 0, stream = 1;
    for (double f : factors)
      for (double d : deltas) {
        SandwichVerdict v = verify_sandwich(u, p, f * L, samples, d, RandomStream(c.seed, stream++), ScanOptions{},
                                            c.workers);
        st.add(f * L, d, v.samples, v.nonempty, v.lower_violations, v.upper_violations, v.roundoff_skipped);
        bad += v.lower_violations + v.upper_violations;
      }
    c.verdict("thm1.2:sandwich", bad == 0, static_cast<double>(bad), 0.0, 0.0, "violations <= tolerance");
    c.stage("sandwich");
  }
}

void run_quasinorm(Context& c) {
  ScalarField u = field_of(c);
  const double p = exponent_p(c.cfg, 1.0);
  const int dim = u.dimension();
  require(dim <= 3, c.cfg.at("field"), "pair-measure experiments support N <= 3");
  const bool standard = !c.cfg.has("alpha");
  const double alpha = standard ? default_alpha(dim, p) : c.cfg.positive("alpha");
  std::vector<double> lambdas = lambda_grid(c.cfg, u.lip() > 0 ? u.lip() : 1.0, 0.1, 1e3, 24);
  const int refine = c.cfg.integer("refine", 6);
  require(refine >= 0, c.cfg.at("refine"), "must be non-negative");
  const double tol = c.cfg.positive("tolerance", 0.05);
  const bool refinement = c.cfg.flag("refinement", false);
  const double drift_tol = c.cfg.positive("drift_tolerance", 0.1);
  ProfileOptions po;
  po.polar = polar_options(c.cfg.object("budget"), c.workers);
  po.workers = c.workers;
  c.cfg.finish();

  const double grad = gradient_lp_norm(u, p).value;
  const double k_over_n = k_closed_form(p, dim) / dim;
  CsvTable& t = c.table("quasinorm.csv", {"level", "lambda", "mu", "error", "lambda_p_mu", "converged"});
  DistributionProfile prof = distribution_profile(u, p, alpha, lambdas, po);
  WeakQuasinorm w = weak_quasinorm(prof, refine);
  profile_rows(t, "main", prof);
  c.stage("profile");
  const double ratio = grad > 0 ? w.value / grad : 0.0;
  c.results["quasinorm"] = {{"alpha", alpha},           {"sup", w.value},
                            {"quasinorm", w.quasinorm}, {"lambda_at_sup", w.lambda_at_sup},
                            {"at_grid_edge", w.at_grid_edge}, {"converged", w.converged},
                            {"grad_lp_pow", grad},      {"ratio", ratio},
                            {"k_over_N", k_over_n}};
  c.constant("C_emp", dim, p, ratio);
  if (standard)
    c.verdict("thm1.1:lower_bound", ratio >= (1.0 - tol) * k_over_n || grad == 0.0, ratio, k_over_n, tol,
              "sup lambda^p mu / ||grad u||_p^p >= (1 - tolerance) k(p,N)/N", w.converged);
  if (refinement) {
    po.polar = doubled(po.polar);
    DistributionProfile fine = distribution_profile(u, p, alpha, lambdas, po);
    WeakQuasinorm wf = weak_quasinorm(fine, refine);
    profile_rows(t, "fine", fine);
    const double rf = grad > 0 ? wf.value / grad : 0.0;
    const double drift = relative(ratio, rf);
    c.results["quasinorm"]["fine_ratio"] = rf;
    c.results["quasinorm"]["drift"] = drift;
    c.verdict("thm1.1:upper_stable", drift <= drift_tol, drift, 0.0, drift_tol,
              "|C_emp - C_emp(refined)| / C_emp(refined) <= tolerance", w.converged && wf.converged);
    c.stage("refinement");
  }
}

void run_gagliardo(Context& c) {
  ScalarField u = field_of(c);
  const double s = c.cfg.number("s", 0.5);
  const double p = exponent_p(c.cfg, 2.0);
  const double cutoff = c.cfg.number("inner_cutoff", 0.0);
  require(s > 0.0 && s <= 1.0, c.cfg.at("s"), "must lie in (0, 1]");
  require(cutoff >= 0.0, c.cfg.at("inner_cutoff"), "must be non-negative");
  require(s < 1.0 || cutoff > 0.0, c.cfg.at("inner_cutoff"), "must be positive when s = 1");
  std::vector<double> scales = c.cfg.numbers("scales", std::vector<double>{1.0, 3.0});
  each_positive(scales, c.cfg.at("scales"));
  const double tol = c.cfg.positive("tolerance", 1e-6);
  std::vector<double> deltas;
  if (c.cfg.has("deltas")) {
    deltas = c.cfg.numbers("deltas");
    each_positive(deltas, c.cfg.at("deltas"));
    descending(deltas, c.cfg.at("deltas"));
    require(deltas.size() >= 2, c.cfg.at("deltas"), "needs at least two rungs");
  }
  GagliardoOptions g = gagliardo_options(c.cfg.object("budget"), c.workers);
  c.cfg.finish();

  CsvTable& t = c.table("gagliardo.csv", {"scale", "s", "p", "inner_cutoff", "value", "error", "converged"});
  double base = 0.0, worst = 0.0;
  bool converged = true;
  for (std::size_t i = 0; i < scales.size(); ++i) {
    QuadratureResult q = gagliardo(SeminormQuery{scales[i] == 1.0 ? u : scaled(u, scales[i]), s, p, cutoff}, g);
    t.add(scales[i], s, p, cutoff, q.value, q.error_estimate, q.converged);
    converged = converged && q.converged;
    double normalised = q.value / std::pow(scales[i], p);
    if (i == 0) base = normalised;
    worst = std::max(worst, relative(normalised, base));
    c.results["gagliardo"].push_back({{"scale", scales[i]}, {"value", q.value}, {"error", q.error_estimate}});
  }
  c.verdict("gagliardo:homogeneity", worst <= tol, worst, 0.0, tol,
            "max |V(c u) / c^p - V(u)| / V(u) <= tolerance", converged);
  c.stage("gagliardo");
  if (!deltas.empty()) {
    DivergenceProbe d = diagonal_divergence_probe(u, p, deltas, g);
    CsvTable& dt = c.table("divergence.csv", {"delta", "value", "error"});
    for (std::size_t i = 0; i < deltas.size(); ++i) dt.add(deltas[i], d.values[i], d.errors[i]);
    c.results["divergence"] = {{"slope", d.slope}, {"predicted", d.predicted}, {"relative_error", d.relative_error}};
    c.verdict("intro:s1_divergence", d.relative_error <= 0.1, d.slope, d.predicted, 0.1,
              "|slope - k(p,N) ||grad u||_p^p| <= tolerance * prediction");
    c.stage("divergence");
  }
}

void run_crosscheck(Context& c) {
  ScalarField u = field_of(c);
  const double p = exponent_p(c.cfg, 1.0);
  std::vector<double> deltas = c.cfg.numbers("deltas", std::vector<double>{1e-2, 1e-3, 1e-4, 1e-5});
  std::vector<double> ladder = c.cfg.numbers("s_ladder", std::vector<double>{0.9, 0.99, 0.999});
  each_positive(deltas, c.cfg.at("deltas"));
  descending(deltas, c.cfg.at("deltas"));
  each_positive(ladder, c.cfg.at("s_ladder"));
  ascending(ladder, c.cfg.at("s_ladder"));
  for (std::size_t i = 0; i < ladder.size(); ++i)
    require(ladder[i] < 1.0, index(c.cfg.at("s_ladder"), i), "must lie in (0, 1)");
  const double tol = c.cfg.positive("tolerance", 0.1);
  GagliardoOptions g = gagliardo_options(c.cfg.object("budget"), c.workers);
  c.cfg.finish();

  DivergenceProbe d = diagonal_divergence_probe(u, p, deltas, g);
  c.stage("divergence");
  BbmLadder b = bbm_factor(u, p, ladder, g);
  c.stage("bbm");
  CsvTable& dt = c.table("divergence.csv", {"delta", "value", "error"});
  for (std::size_t i = 0; i < deltas.size(); ++i) dt.add(deltas[i], d.values[i], d.errors[i]);
  CsvTable& bt = c.table("bbm.csv", {"s", "value", "error"});
  for (std::size_t i = 0; i < ladder.size(); ++i) bt.add(ladder[i], b.values[i], b.errors[i]);
  const double consistency = relative(p * b.plateau, d.slope);
  c.results["crosscheck"] = {{"slope", d.slope},
                             {"slope_predicted", d.predicted},
                             {"bbm_plateau", b.plateau},
                             {"bbm_predicted", b.predicted},
                             {"p_times_plateau", p * b.plateau},
                             {"consistency", consistency}};
  c.verdict("intro:s1_divergence", d.relative_error <= tol, d.slope, d.predicted, tol,
            "|slope - k(p,N) ||grad u||_p^p| <= tolerance * prediction");
  c.verdict("bbm:plateau", b.relative_error <= tol, b.plateau, b.predicted, tol,
            "|plateau - k(p,N)/p ||grad u||_p^p| <= tolerance * prediction");
  c.verdict("bbm:consistent_with_divergence", consistency <= tol, p * b.plateau, d.slope, tol,
            "|p * plateau - slope| <= tolerance * slope");
}

void run_covering(Context& c) {
  const int fields = c.cfg.count("fields", 100);
  const int cells = c.cfg.count("cells", 128);
  require(cells >= 16 && (cells & (cells - 1)) == 0, c.cfg.at("cells"), "must be a power of two >= 16");
  std::vector<double> gammas = c.cfg.numbers("gammas", std::vector<double>{0.5, 1.0, 2.0});
  each_positive(gammas, c.cfg.at("gammas"));
  const int dump = c.cfg.integer("cover_rows_fields", 1);
  require(dump >= 0, c.cfg.at("cover_rows_fields"), "must be non-negative");
  RandomStream stream(c.require_seed());
  c.cfg.finish();

  CsvTable& t = c.table("covering.csv", {"field", "gamma", "mass", "intervals", "selected", "pairs_checked",
                                         "pairs_in_set", "violations", "guarantee_violations", "disjoint",
                                         "energy", "selected_sum", "bound_mass", "empirical_c", "chain_holds"});
  CsvTable& ct = c.table("cover.csv", {"field", "gamma", "left", "right", "selected"});
  std::uint64_t overlapping = 0, uncovered = 0, chain_failures = 0, pairs = 0;
  double worst_c = 0.0;
  for (int i = 0; i < fields; ++i) {
    PiecewiseConstantField f = random_piecewise_field(cells, stream, static_cast<std::uint64_t>(i));
    for (double gamma : gammas) {
      IntervalFamily fam = admissible_intervals(f, gamma);
      VitaliCover cov = vitali_select(fam);
      CoverVerdict v = verify_5J_cover(f, gamma, fam, cov, c.workers);
      WeightedEnergy e = weighted_energy(f, gamma, fam, cov);
      overlapping += v.disjoint ? 0 : 1;
      uncovered += v.violations + v.guarantee_violations;
      chain_failures += e.chain_holds ? 0 : 1;
      pairs += v.pairs_in_set;
      if (e.bound_mass > 0) worst_c = std::max(worst_c, e.energy / e.bound_mass);
      t.add(i, gamma, f.total_mass(), static_cast<std::uint64_t>(fam.members.size()),
            static_cast<std::uint64_t>(cov.selected.size()), v.pairs_checked, v.pairs_in_set, v.violations,
            v.guarantee_violations, v.disjoint, e.energy, e.selected_sum, e.bound_mass, e.empirical_c,
            e.chain_holds);
      if (i < dump) {
        std::set<std::pair<int, int>> chosen;
        for (const GridInterval& j : cov.selected) chosen.insert({j.a, j.b});
        for (const GridInterval& m : fam.members)
          ct.add(i, gamma, f.point(m.a), f.point(m.b), chosen.count({m.a, m.b}) > 0);
      }
    }
  }
  c.results["covering"] = {{"fields", fields},
                           {"gammas", gammas},
                           {"pairs_in_set", pairs},
                           {"non_disjoint_covers", overlapping},
                           {"cover_violations", uncovered},
                           {"chain_failures", chain_failures},
                           {"max_energy_over_bound", worst_c}};
  c.verdict("prop2.1:vitali_disjoint", overlapping == 0, static_cast<double>(overlapping), 0.0, 0.0,
            "covers with overlapping selected intervals <= tolerance");
  c.verdict("prop2.1:5J_cover", uncovered == 0, static_cast<double>(uncovered), 0.0, 0.0,
            "pairs of E(f, gamma) outside every 5J x 5J <= tolerance");
  c.verdict("prop2.1:energy", chain_failures == 0, worst_c, 1.0, 0.0,
            "energy <= K sum |J|^{gamma+1} <= K ||f||_1 for every field (measured: max energy / K ||f||_1)");
  c.stage("covering");
}

Density density_of(const Params& d, const ScalarField& u) {
  const std::string kind = d.text("kind", std::string("gradient_power"));
  Density F;
  if (kind == "gradient_power") {
    double p = exponent_p(d, 1.0);
    F = density_gradient_power(u, p, d.positive("lambda", 1.0));
  } else if (kind == "abs") {
    F = density_abs(u, d.positive("kappa", 1.0));
  } else {
    throw ConfigError(d.at("kind"), "expected \"gradient_power\" or \"abs\"");
  }
  d.finish();
  return F;
}

void run_rotation(Context& c) {
  ScalarField u = field_of(c);
  const int dim = u.dimension();
  require(dim <= 3, c.cfg.at("field"), "rotation experiments support N <= 3");
  Density F = density_of(c.cfg.object("density"), u);
  const std::uint64_t mc_samples = c.cfg.unsigned_integer("mc_samples", 100000);
  require(mc_samples >= 1000, c.cfg.at("mc_samples"), "must be at least 1000");
  const std::uint64_t seed = c.require_seed();
  const bool refinement = c.cfg.flag("refinement", true);
  const double drift_tol = c.cfg.positive("drift_tolerance", 0.1);
  RotationOptions ro;
  {
    Params b = c.cfg.object("budget");
    ro.sphere_order = b.count("sphere_order", ro.sphere_order);
    ro.z_panels = b.count("z_panels", ro.z_panels);
    ro.t_panels = b.count("t_panels", ro.t_panels);
    ro.line_cells = b.count("line_cells", ro.line_cells);
    ro.scan = b.count("scan", ro.scan);
    b.finish();
  }
  ro.workers = c.workers;
  const bool half = dim <= 2 && c.cfg.flag("half_factor", true);
  const bool containment = c.cfg.has("containment");
  std::vector<double> cps;
  double cfactor = 2.0;
  std::uint64_t csamples = 0;
  if (containment) {
    Params h = c.cfg.object("containment");
    cps = h.numbers("ps", std::vector<double>{1.0, 2.0});
    for (std::size_t i = 0; i < cps.size(); ++i)
      require(cps[i] >= 1.0 && std::isfinite(cps[i]), index(h.at("ps"), i), "must lie in [1, infinity)");
    cfactor = h.positive("lambda_factor", 2.0);
    csamples = h.unsigned_integer("samples", 10000);
    require(csamples >= 1, h.at("samples"), "must be at least 1");
    h.finish();
  }
  c.cfg.finish();

  CsvTable& t = c.table("rotation.csv", {"method", "measure", "error", "l1", "c_emp", "theory"});
  RotationMeasure r = rotation_measure(F, ro);
  c.stage("rotation");
  QuadratureResult mc = rotation_measure_mc(F, mc_samples, RandomStream(seed), c.workers);
  c.stage("monte_carlo");
  t.add("rotation", r.measure.value, r.measure.error_estimate, r.l1, r.c_emp, r.theory);
  t.add("monte_carlo", mc.value, mc.error_estimate, r.l1, r.l1 > 0 ? mc.value / r.l1 : 0.0, r.theory);
  const double se = std::hypot(r.measure.error_estimate, mc.error_estimate);
  const double gap = std::abs(r.measure.value - mc.value);
  c.results["rotation"] = {{"measure", r.measure.value}, {"error", r.measure.error_estimate},
                           {"mc", mc.value},             {"mc_error", mc.error_estimate},
                           {"l1", r.l1},                 {"c_emp", r.c_emp},
                           {"theory", r.theory}};
  c.constant("C_emp_rotation", dim, 0.0, r.c_emp);
  c.verdict("prop2.2:rotation_vs_mc", gap <= 3.0 * se, se > 0 ? gap / se : (gap == 0 ? 0.0 : kInf), 0.0, 3.0,
            "|rotation - monte carlo| / combined standard error <= tolerance", r.measure.converged);
  c.verdict("prop2.2:theory_bound", r.within_theory, r.c_emp, r.theory, 0.0, "C_emp <= (C/2) 5^N sigma / N");
  if (refinement) {
    RotationOptions fine = ro;
    fine.sphere_order *= 2;
    fine.z_panels *= 2;
    fine.t_panels *= 2;
    fine.line_cells *= 2;
    fine.scan *= 2;
    RotationMeasure rf = rotation_measure(F, fine);
    t.add("rotation_refined", rf.measure.value, rf.measure.error_estimate, rf.l1, rf.c_emp, rf.theory);
    const double drift = relative(r.c_emp, rf.c_emp);
    c.results["rotation"]["c_emp_refined"] = rf.c_emp;
    c.results["rotation"]["drift"] = drift;
    c.verdict("prop2.2:c_emp_stable", drift <= drift_tol, drift, 0.0, drift_tol,
              "|C_emp - C_emp(refined)| / C_emp(refined) <= tolerance");
    c.stage("refinement");
  }
  if (half) {
    Point w{};
    w[0] = 1.0;
    HalfFactorCheck h = half_factor_check(F, w, 0.1);
    c.results["half_factor"] = {{"one_sided", h.one_sided}, {"two_sided", h.two_sided}, {"ratio", h.ratio}};
    c.verdict("prop2.2:half_factor", std::abs(h.ratio - 2.0) <= 0.02 || h.one_sided == 0.0, h.ratio, 2.0, 0.02,
              "|two-sided / one-sided - 2| <= tolerance");
    c.stage("half_factor");
  }
  if (containment) {
    CsvTable& ht = c.table("containment.csv", {"p", "lambda", "samples", "pairs_in_set", "violations",
                                               "roundoff_skipped", "worst_margin"});
    std::uint64_t bad = 0, stream = 1;
    for (double p : cps) {
      double lambda = cfactor * (u.lip() > 0 ? u.lip() : 1.0);
      ContainmentVerdict v = holder_containment_check(u, p, lambda, csamples, RandomStream(seed, stream++), c.workers);
      ht.add(p, lambda, v.samples, v.pairs_in_set, v.violations, v.roundoff_skipped, v.worst_margin);
      bad += v.violations;
    }
    c.verdict("sec2:holder_containment", bad == 0, static_cast<double>(bad), 0.0, 0.0, "violations <= tolerance");
    c.stage("containment");
  }
}

void run_maximal(Context& c) {
  ScalarField u = field_of(c);
  const int dim = u.dimension();
  require(dim <= 2, c.cfg.at("field"), "maximal experiments support N in {1, 2}");
  const double p = exponent_p(c.cfg, 2.0, true);
  std::vector<double> lambdas = lambda_grid(c.cfg, u.lip() > 0 ? u.lip() : 1.0, 1.0, 100.0, 6);
  const std::uint64_t samples = c.cfg.unsigned_integer("lusin_samples", 20000);
  require(samples >= 1, c.cfg.at("lusin_samples"), "must be at least 1");
  const int cells = c.cfg.integer("cells", 0);
  require(cells >= 0, c.cfg.at("cells"), "must be non-negative");
  const double scale = c.cfg.positive("scale", 3.0);
  const double scale_tol = c.cfg.positive("scale_tolerance", 1e-2);
  const std::uint64_t seed = c.require_seed();
  c.cfg.finish();

  MaximalRouteOptions mo;
  mo.cells = cells;
  mo.lusin_samples = samples;
  mo.stream = RandomStream(seed);
  mo.workers = c.workers;
  mo.direct.workers = c.workers;
  MaximalRouteRecord route = maximal_route_bound(u, p, lambdas, mo);
  c.stage("route");
  CsvTable& t = c.table("maximal_route.csv", {"lambda", "bound", "direct", "direct_error", "dominated"});
  std::uint64_t undominated = 0;
  for (std::size_t i = 0; i < route.lambdas.size(); ++i) {
    t.add(route.lambdas[i], route.bound[i], route.direct[i], route.direct_error[i], static_cast<bool>(route.dominated[i]));
    undominated += route.dominated[i] ? 0 : 1;
  }
  c.verdict("remark2.3:route_dominates", undominated == 0, static_cast<double>(undominated), 0.0, 0.0,
            "lambdas where bound < direct - 2 error <= tolerance");

  LusinOptions coarse, fine;
  coarse.cells = cells > 0 ? cells : (dim == 1 ? 256 : 32);
  fine.cells = 2 * coarse.cells;
  coarse.workers = fine.workers = c.workers;
  RandomStream ls(seed, 1);
  LusinRecord a = lusin_lipschitz_check(u, samples, ls, coarse);
  LusinRecord b = lusin_lipschitz_check(u, samples, ls, fine);
  LusinRecord s = lusin_lipschitz_check(scaled(u, scale), samples, ls, coarse);
  c.stage("lusin");
  CsvTable& lt = c.table("lusin.csv", {"case", "cells", "samples", "valid_pairs", "zero_denominator",
                                       "zero_denominator_mismatch", "c_emp"});
  lt.add("coarse", coarse.cells, a.samples, a.valid_pairs, a.zero_denominator, a.zero_denominator_mismatch, a.c_emp);
  lt.add("fine", fine.cells, b.samples, b.valid_pairs, b.zero_denominator, b.zero_denominator_mismatch, b.c_emp);
  lt.add("scaled", coarse.cells, s.samples, s.valid_pairs, s.zero_denominator, s.zero_denominator_mismatch, s.c_emp);
  const double lo = std::min(a.c_emp, b.c_emp), hi = std::max(a.c_emp, b.c_emp);
  const double stability = lo > 0 ? hi / lo : (hi == 0 ? 1.0 : kInf);
  const double invariance = relative(s.c_emp, a.c_emp);
  c.results["maximal"] = {{"constant", route.constant},  {"maximal_lp", route.maximal_lp},
                          {"lusin_coarse", a.c_emp},     {"lusin_fine", b.c_emp},
                          {"lusin_scaled", s.c_emp},     {"stability", stability},
                          {"scale_invariance", invariance}};
  c.constant("C_emp_lusin", dim, p, a.c_emp);
  c.verdict("remark2.3:lusin_zero_denominator", a.pass() && b.pass() && s.pass(),
            static_cast<double>(a.zero_denominator_mismatch + b.zero_denominator_mismatch +
                                s.zero_denominator_mismatch),
            0.0, 0.0, "pairs with M(x) + M(y) = 0 but u(x) != u(y) <= tolerance");
  c.verdict("remark2.3:lusin_stable", stability < 2.0, stability, 1.0, 2.0,
            "max / min of C_emp across one refinement < tolerance");
  c.verdict("remark2.3:lusin_scale_invariant", invariance <= scale_tol, invariance, 0.0, scale_tol,
            "|C_emp(c u) - C_emp(u)| / C_emp(u) <= tolerance");
}

CorollaryOptions corollary_options(const Params& b, int workers) {
  CorollaryOptions o;
  o.per_decade = b.count("per_decade", o.per_decade);
  o.refine = b.integer("refine", o.refine);
  require(o.refine >= 0, b.at("refine"), "must be non-negative");
  o.polar.x_panels = b.integer("x_panels", o.polar.x_panels);
  require(o.polar.x_panels >= 0, b.at("x_panels"), "must be non-negative (0 picks the default)");
  o.polar.sphere_order = b.count("sphere_order", o.polar.sphere_order);
  o.polar.scan.scan = b.count("scan", o.polar.scan.scan);
  require(o.polar.scan.scan >= 16, b.at("scan"), "must be at least 16");
  o.workers = o.polar.workers = o.gagliardo.workers = workers;
  b.finish();
  return o;
}

void run_corollary(Context& c) {
  ScalarField u = field_of(c);
  const int dim = u.dimension();
  require(dim <= 3, c.cfg.at("field"), "corollary experiments support N <= 3");
  const std::string check = c.cfg.text("check");
  std::vector<double> scales = c.cfg.numbers("scales", std::vector<double>{1.0, 3.0});
  each_positive(scales, c.cfg.at("scales"));
  const double tol = c.cfg.positive("tolerance", 1e-2);
  std::function<CorollaryReport(const ScalarField&, const CorollaryOptions&)> run;
  std::string prefix;
  double exponent_gap = -1.0;
  if (check == "cor1.4" || check == "cor1.5") {
    const double p = exponent_p(c.cfg, 2.0, true);
    prefix = check;
    if (check == "cor1.4") {
      require(dim == 1, c.cfg.at("field"), "cor1.4 needs a one-dimensional field");
      run = [p](const ScalarField& v, const CorollaryOptions& o) { return check_cor_1_4(v, p, o); };
    } else {
      run = [p](const ScalarField& v, const CorollaryOptions& o) { return check_cor_1_5(v, p, o); };
    }
  } else if (check == "cor1.6") {
    GNParams gn{c.cfg.number("theta", 0.5), c.cfg.number("p1", 2.0), c.cfg.number("s1", 0.5)};
    require(gn.theta > 0 && gn.theta < 1, c.cfg.at("theta"), "must lie in (0, 1)");
    require(gn.p1 > 1, c.cfg.at("p1"), "must exceed 1");
    require(gn.s1 > 0 && gn.s1 < 1, c.cfg.at("s1"), "must lie in (0, 1)");
    require(gn.s1 * gn.p1 >= 1, c.cfg.at("s1"), "s1 p1 < 1 is the strong regime; use check \"gn_strong\"");
    prefix = "cor1.6";
    run = [gn](const ScalarField& v, const CorollaryOptions& o) { return check_cor_1_6(v, gn, o); };
  } else if (check == "gn_strong") {
    const double theta = c.cfg.number("theta", 0.5), p1 = c.cfg.number("p1", 2.0);
    require(theta > 0 && theta < 1, c.cfg.at("theta"), "must lie in (0, 1)");
    require(p1 > 1 && std::isfinite(p1), c.cfg.at("p1"), "must lie in (1, infinity); the inequality fails at infinity");
    prefix = "sec5:gn_strong";
    run = [theta, p1](const ScalarField& v, const CorollaryOptions& o) { return check_gn_strong(v, theta, p1, o); };
  } else if (check == "sobolev_embedding") {
    const double s = c.cfg.number("s", 0.5);
    require(s > 0 && s < 1, c.cfg.at("s"), "must lie in (0, 1)");
    require(dim >= 2, c.cfg.at("field"), "needs N >= 2; for N = 1 run the \"failure\" experiment");
    prefix = "sec4:embedding";
    run = [s](const ScalarField& v, const CorollaryOptions& o) { return check_sobolev_embedding(v, s, o); };
    const double p = 1.0 / (1.0 - (1.0 - s) / dim);
    exponent_gap = std::abs(p - dim / (dim - 1.0 + s));
  } else {
    throw ConfigError(c.cfg.at("check"),
                      "expected one of cor1.4, cor1.5, cor1.6, gn_strong, sobolev_embedding");
  }
  CorollaryOptions o = corollary_options(c.cfg.object("budget"), c.workers);
  c.cfg.finish();

  CsvTable& t = c.table("corollary.csv", {"scale", "lhs", "rhs", "ratio", "converged", "at_grid_edge",
                                          "lambda_at_sup"});
  bool finite = true, converged = true;
  double base = 0.0, worst = 0.0;
  for (std::size_t i = 0; i < scales.size(); ++i) {
    CorollaryReport r = run(scales[i] == 1.0 ? u : scaled(u, scales[i]), o);
    t.add(scales[i], r.lhs, r.rhs, r.ratio, r.converged, r.at_grid_edge, r.lambda_at_sup);
    finite = finite && std::isfinite(r.lhs) && std::isfinite(r.rhs) && std::isfinite(r.ratio);
    converged = converged && r.converged;
    if (i == 0) base = r.ratio;
    worst = std::max(worst, relative(r.ratio, base));
    json params = json::object();
    for (const auto& [k, v] : r.params) params[k] = v;
    c.results["corollary"].push_back({{"scale", scales[i]}, {"lhs", r.lhs}, {"rhs", r.rhs}, {"ratio", r.ratio},
                                      {"params", params}, {"at_grid_edge", r.at_grid_edge}});
  }
  c.verdict(prefix + ":finite", finite, base, 0.0, 0.0, "lhs, rhs and ratio finite at every scale", converged);
  c.verdict(prefix + ":homogeneous", worst <= tol, worst, 0.0, tol,
            "max |ratio(c u) - ratio(u)| / ratio(u) <= tolerance", converged);
  if (exponent_gap >= 0.0)
    c.verdict(prefix + ":exponent", exponent_gap <= 1e-15, exponent_gap, 0.0, 1e-15,
              "|p - N/(N - 1 + s)| <= tolerance");
  c.stage("corollary");
}

void run_failure(Context& c) {
  const double p = exponent_p(c.cfg, 2.0);
  std::vector<double> eps = c.cfg.numbers("eps", std::vector<double>{0.2, 0.1, 0.05, 0.025});
  require(eps.size() >= 2, c.cfg.at("eps"), "needs at least two rungs");
  for (std::size_t i = 0; i < eps.size(); ++i)
    require(eps[i] > 0 && eps[i] < 0.5, index(c.cfg.at("eps"), i), "must lie in (0, 0.5)");
  descending(eps, c.cfg.at("eps"));
  const double inc_tol = c.cfg.positive("increment_tolerance", 0.25);
  const double spread_tol = c.cfg.positive("spread_tolerance", 3.0);
  CorollaryOptions o = corollary_options(c.cfg.object("budget"), c.workers);
  c.cfg.finish();

  FailureProbe f = failure_probe_ro4(p, eps, o);
  CsvTable& t = c.table("failure.csv", {"eps", "value", "error", "weak_lhs"});
  for (std::size_t i = 0; i < eps.size(); ++i)
    t.add(eps[i], f.values[i], f.errors[i], i < f.weak_lhs.size() ? f.weak_lhs[i] : std::nan(""));
  c.results["failure"] = {{"rate", f.rate},
                          {"last_increment_ratio", f.last_increment_ratio},
                          {"increasing", f.increasing},
                          {"diverges_at_diagonal", f.diverges_at_diagonal},
                          {"weak_spread", f.weak_spread}};
  if (f.diverges_at_diagonal) {
    c.verdict("sec4:strong_diverges", true, kInf, kInf, 0.0, "p = 1: the double integral is infinite at every eps");
  } else {
    const double dev = std::abs(f.last_increment_ratio - 1.0);
    c.verdict("sec4:strong_diverges", f.increasing && dev <= inc_tol, dev, 0.0, inc_tol,
              "increments positive and |last / previous - 1| <= tolerance");
    c.verdict("cor1.4:bounded", f.weak_spread <= spread_tol, f.weak_spread, 1.0, spread_tol,
              "max over eps of max(v / median, median / v) <= tolerance");
  }
  c.stage("failure");
}

// ---------------------------------------------------------------------------

Status summarise(const std::vector<Verdict>& verdicts) {
  Status s = Status::pass;
  for (const Verdict& v : verdicts) s = worst(s, v.status);
  return s;
}

json verdicts_json(const std::vector<Verdict>& verdicts) {
  json out = json::array();
  for (const Verdict& v : verdicts)
    out.push_back({{"key", v.key},
                   {"status", to_string(v.status)},
                   {"measured", v.measured},
                   {"expected", v.expected},
                   {"tolerance", v.tolerance},
                   {"rule", v.rule}});
  return out;
}

ExperimentResult run_single(const json& config, const RunOptions& opt, const std::string& kind) {
  ExperimentResult r;
  Context c{Params(config, ""), opt.workers, 0, false, &r};
  c.cfg.text("kind");
  if (opt.seed) {
    c.seed = *opt.seed;
    c.has_seed = true;
    c.cfg.has("seed");
  } else if (c.cfg.has("seed")) {
    c.seed = c.cfg.unsigned_integer("seed");
    c.has_seed = true;
  }
  r.timing = {{"kind", kind}, {"stages", json::object()}};
  if (kind == "constants") run_constants(c);
  else if (kind == "limit") run_limit(c);
  else if (kind == "quasinorm") run_quasinorm(c);
  else if (kind == "gagliardo") run_gagliardo(c);
  else if (kind == "crosscheck") run_crosscheck(c);
  else if (kind == "covering") run_covering(c);
  else if (kind == "rotation") run_rotation(c);
  else if (kind == "maximal") run_maximal(c);
  else if (kind == "corollary") run_corollary(c);
  else if (kind == "failure") run_failure(c);
  else
    throw ConfigError("kind", "unknown experiment kind \"" + kind + "\"");
  r.tables.assign(std::make_move_iterator(c.tables.begin()), std::make_move_iterator(c.tables.end()));
  r.status = summarise(r.verdicts);
  json echo = config;
  if (c.has_seed) echo["seed"] = c.seed;
  r.report = {{"schema", kReportSchema},
              {"tool", "weaklp"},
              {"version", kToolVersion},
              {"kind", kind},
              {"config", echo},
              {"results", c.results},
              {"verdicts", verdicts_json(r.verdicts)},
              {"status", to_string(r.status)}};
  json files = json::array();
  for (const CsvTable& t : r.tables) files.push_back(t.name);
  r.report["files"] = files;
  return r;
}

struct Job {
  std::string field;
  int dim = 0;
  double p = 0.0;
  bool has_p = false;
  json config;
};

ExperimentResult run_sweep(const json& config, const RunOptions& opt) {
  Params cfg(config, "");
  cfg.text("kind");
  const json& tmpl = cfg.raw("template");
  Params tp(tmpl, "template");
  const std::string kind = tp.text("kind");
  require(kind != "sweep", tp.at("kind"), "sweeps cannot be nested");
  Params grid = cfg.object("grid");
  require(grid.has("field") || grid.has("p") || grid.has("dim"), cfg.at("grid"), "empty parameter grid");
  std::vector<json> fields;
  if (grid.has("field")) {
    const json& fl = grid.raw("field");
    require(fl.is_array(), grid.at("field"), "expected an array");
    for (const json& f : fl) fields.push_back(f);
    require(!fields.empty(), grid.at("field"), "empty parameter grid");
  } else {
    fields.push_back(tp.raw("field"));
  }
  std::vector<double> dims = grid.numbers("dim", std::vector<double>{0.0});
  require(!dims.empty(), grid.at("dim"), "empty parameter grid");
  if (grid.has("dim"))
    for (std::size_t i = 0; i < dims.size(); ++i)
      require(dims[i] == std::floor(dims[i]) && dims[i] >= 1 && dims[i] <= 4, index(grid.at("dim"), i),
              "must be an integer in 1..4");
  std::vector<double> ps = grid.numbers("p", std::vector<double>{});
  require(!grid.has("p") || !ps.empty(), grid.at("p"), "empty parameter grid");
  grid.finish();
  std::optional<std::uint64_t> seed = opt.seed;
  if (!seed && cfg.has("seed")) seed = cfg.unsigned_integer("seed");
  if (!seed && tp.has("seed")) seed = tp.unsigned_integer("seed");
  cfg.finish();

  std::vector<Job> jobs;
  for (std::size_t fi = 0; fi < fields.size(); ++fi)
    for (double d : dims) {
      const json& f = fields[fi];
      Job base;
      base.dim = static_cast<int>(d);
      if (f.is_string()) {
        require(base.dim >= 1, index(cfg.at("grid.field"), fi), "a catalogue name needs grid.dim");
        base.field = f.get<std::string>();
        base.config = tmpl;
        base.config["field"] = {{"kind", "catalogue"}, {"name", base.field}, {"dim", base.dim}};
      } else {
        require(f.is_object(), index(cfg.at("grid.field"), fi), "expected a catalogue name or a field object");
        base.field = f.value("kind", std::string("field")) + "#" + std::to_string(fi);
        base.config = tmpl;
        base.config["field"] = f;
        base.dim = field_from_json(f, index(cfg.at("grid.field"), fi)).dimension();
      }
      if (ps.empty()) {
        jobs.push_back(base);
        continue;
      }
      for (double p : ps) {
        Job j = base;
        j.p = p;
        j.has_p = true;
        j.config["p"] = p;
        jobs.push_back(j);
      }
    }
  for (std::size_t i = 0; i < jobs.size(); ++i)
    if (seed) jobs[i].config["seed"] = *seed ^ static_cast<std::uint64_t>(i);

  // Jobs run in parallel with serial internals; results land in per-job slots
  // and are reduced in job order, so the output never depends on the workers.
  const int workers = opt.workers > 0 ? opt.workers : default_workers();
  const bool job_parallel = workers > 1 && jobs.size() > 1;
  std::vector<ExperimentResult> results(jobs.size());
  std::vector<std::string> errors(jobs.size());
  RunOptions inner;
  inner.workers = job_parallel ? 1 : workers;
  parallel_for(jobs.size(), job_parallel ? workers : 1, [&](std::size_t i) {
    try {
      results[i] = run_single(jobs[i].config, inner, kind);
    } catch (const std::exception& e) {
      errors[i] = e.what();
      results[i].status = Status::error;
    }
  });

  ExperimentResult r;
  r.timing = {{"kind", "sweep"}, {"jobs", json::array()}};
  CsvTable agg{"sweep.csv", {"job", "field", "dim", "p", "seed", "status", "failed_verdicts"}, {}};
  CsvTable per{"sweep_verdicts.csv", {"job", "verdict", "status", "measured", "expected", "tolerance"}, {}};
  json job_reports = json::array();
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    const ExperimentResult& jr = results[i];
    std::string failed;
    for (const Verdict& v : jr.verdicts) {
      per.add(static_cast<std::uint64_t>(i), v.key, to_string(v.status), v.measured, v.expected, v.tolerance);
      if (v.status != Status::pass) failed += (failed.empty() ? "" : ";") + v.key;
    }
    agg.add(static_cast<std::uint64_t>(i), jobs[i].field, jobs[i].dim,
            jobs[i].has_p ? CsvTable::cell(jobs[i].p) : std::string(),
            seed ? CsvTable::cell(*seed ^ static_cast<std::uint64_t>(i)) : std::string(), to_string(jr.status),
            failed);
    json entry = {{"job", i}, {"status", to_string(jr.status)}};
    if (!errors[i].empty()) entry["error"] = errors[i];
    else entry["report"] = jr.report;
    job_reports.push_back(entry);
    r.timing["jobs"].push_back(jr.timing);
    for (const CsvTable& t : jr.tables) {
      char prefix[32];
      std::snprintf(prefix, sizeof prefix, "job%03zu_", i);
      r.tables.push_back(CsvTable{prefix + t.name, t.columns, t.rows});
    }
    for (const Verdict& v : jr.verdicts) r.verdicts.push_back(v);
    r.status = worst(r.status, jr.status);
  }
  r.tables.insert(r.tables.begin(), std::move(per));
  r.tables.insert(r.tables.begin(), std::move(agg));
  json echo = config;
  if (seed) echo["seed"] = *seed;
  r.report = {{"schema", kReportSchema},
              {"tool", "weaklp"},
              {"version", kToolVersion},
              {"kind", "sweep"},
              {"config", echo},
              {"jobs", job_reports},
              {"status", to_string(r.status)}};
  json files = json::array();
  for (const CsvTable& t : r.tables) files.push_back(t.name);
  r.report["files"] = files;
  return r;
}

}  // namespace

nlohmann::json parse_config_text(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    std::size_t line = 1, column = 1;
    for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
      if (text[i] == '\n') {
        ++line;
        column = 1;
      } else {
        ++column;
      }
    }
    throw ConfigError("line " + std::to_string(line) + ", column " + std::to_string(column), "invalid JSON");
  }
}

nlohmann::json load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path.string(), "cannot open the config file");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

ScalarField field_from_json(const nlohmann::json& spec, const std::string& where) {
  if (spec.is_string()) throw ConfigError(where, "expected a field object such as {\"kind\": \"bump\", \"dim\": 1}");
  Params f(spec, where);
  const std::string kind = f.text("kind");
  ScalarField u;
  if (kind == "catalogue") {
    const std::string name = f.text("name");
    const int dim = dimension(f);
    std::vector<std::string> names = catalogue_names(dim);
    require(std::find(names.begin(), names.end(), name) != names.end(), f.at("name"),
            "unknown catalogue field \"" + name + "\"");
    u = catalogue_field(name, dim);
  } else if (kind == "bump") {
    const int dim = dimension(f);
    u = make_bump(point_from(f, "center", dim, 0.0), f.positive("radius", 1.0), f.number("amplitude", 1.0), dim);
  } else if (kind == "product_bump") {
    const int dim = dimension(f);
    Point radii = point_from(f, "radii", dim, 1.0);
    for (int i = 0; i < dim; ++i) require(radii[i] > 0, index(f.at("radii"), i), "must be positive");
    u = make_product_bump(point_from(f, "center", dim, 0.0), radii, f.number("amplitude", 1.0), dim);
  } else if (kind == "mollified_indicator") {
    const int dim = dimension(f);
    Box b{dim, point_from(f, "lo", dim, std::nullopt), point_from(f, "hi", dim, std::nullopt)};
    double shortest = kInf;
    for (int i = 0; i < dim; ++i) {
      require(b.hi[i] > b.lo[i], index(f.at("hi"), i), "must exceed lo");
      shortest = std::min(shortest, b.side(i));
    }
    const double eps = f.positive("epsilon");
    require(eps < 0.5 * shortest, f.at("epsilon"), "must be below half the shortest side");
    u = make_mollified_indicator(b, eps);
  } else if (kind == "sum") {
    const json& terms = f.raw("terms");
    require(terms.is_array() && !terms.empty(), f.at("terms"), "expected a non-empty array");
    std::vector<std::pair<double, ScalarField>> parts;
    int dim = 0;
    for (std::size_t i = 0; i < terms.size(); ++i) {
      Params t(terms[i], index(f.at("terms"), i));
      ScalarField v = field_from_json(t.raw("field"), t.at("field"));
      require(dim == 0 || v.dimension() == dim, t.at("field"), "dimension differs from the first term");
      dim = v.dimension();
      parts.emplace_back(t.number("weight", 1.0), v);
      t.finish();
    }
    u = make_sum(parts);
  } else if (kind == "zero") {
    u = make_zero(dimension(f));
  } else {
    throw ConfigError(f.at("kind"),
                      "expected bump, product_bump, mollified_indicator, sum, zero or catalogue");
  }
  if (f.has("scale")) u = scaled(u, f.number("scale"));
  if (f.has("shift")) u = translated(u, point_from(f, "shift", u.dimension(), std::nullopt));
  f.finish();
  return u;
}

std::string to_string(Status s) {
  switch (s) {
    case Status::pass: return "pass";
    case Status::inconclusive: return "inconclusive";
    case Status::fail: return "fail";
    case Status::error: return "error";
  }
  return "error";
}

int exit_code(Status s) {
  switch (s) {
    case Status::pass: return 0;
    case Status::inconclusive: return 3;
    case Status::fail: return 2;
    case Status::error: return 1;
  }
  return 1;
}

Status worst(Status a, Status b) { return static_cast<int>(a) >= static_cast<int>(b) ? a : b; }

std::string CsvTable::cell(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string CsvTable::cell(std::int64_t v) { return std::to_string(v); }
std::string CsvTable::cell(std::uint64_t v) { return std::to_string(v); }

std::string CsvTable::text() const {
  auto quote = [](const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char ch : s) q += ch == '"' ? std::string("\"\"") : std::string(1, ch);
    return q + "\"";
  };
  std::string out;
  for (std::size_t i = 0; i < columns.size(); ++i) out += (i ? "," : "") + quote(columns[i]);
  out += "\n";
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out += (i ? "," : "") + quote(row[i]);
    out += "\n";
  }
  return out;
}

ExperimentResult run_experiment(const nlohmann::json& config, const RunOptions& opt) {
  require(config.is_object(), "config", "expected a JSON object");
  require(config.contains("kind") && config.at("kind").is_string(), "kind", "missing experiment kind");
  const std::string kind = config.at("kind").get<std::string>();
  if (opt.workers > 0) set_default_workers(opt.workers);
  auto start = std::chrono::steady_clock::now();
  ExperimentResult r = kind == "sweep" ? run_sweep(config, opt) : run_single(config, opt, kind);
  r.timing["wall_seconds"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  r.timing["workers"] = opt.workers > 0 ? opt.workers : default_workers();
  return r;
}

void write_outputs(const ExperimentResult& result, const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  std::vector<std::pair<std::string, std::string>> files;
  for (const CsvTable& t : result.tables) files.emplace_back(t.name, t.text());
  files.emplace_back("report.json", result.report.dump(2) + "\n");
  files.emplace_back("timing.json", result.timing.dump(2) + "\n");
  fs::create_directories(dir);
  for (const auto& [name, body] : files)
    if (fs::exists(dir / name))
      throw std::runtime_error("refusing to overwrite " + (dir / name).string() + "; choose a fresh --out directory");
  for (const auto& [name, body] : files) {
    std::ofstream out(dir / name, std::ios::binary);
    out << body;
    if (!out) throw std::runtime_error("cannot write " + (dir / name).string());
  }
}

}  // namespace weaklp
