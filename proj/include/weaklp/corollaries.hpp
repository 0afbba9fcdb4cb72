#pragma once

#include <limits>
#include <map>
#include <string>
#include <vector>

#include "weaklp/fields.hpp"
#include "weaklp/levelset.hpp"
#include "weaklp/seminorms.hpp"

namespace weaklp {

/// s = theta s1 + (1 - theta), 1/p = theta / p1 + (1 - theta). p1 may be
/// infinite. Throws InvalidParameter unless theta in (0, 1), p1 > 1 and
/// s1 in [0, 1).
struct GNParams {
  double theta = 0.5;
  double p1 = 2.0;
  double s1 = 0.5;

  void validate() const;
  double s() const { return theta * s1 + (1.0 - theta); }
  double p() const { return 1.0 / (theta / p1 + (1.0 - theta)); }
};

struct CorollaryReport {
  std::string check;
  std::string field;
  std::map<std::string, double> params;
  double lhs = 0.0;
  double rhs = 0.0;
  double ratio = 0.0;              // lhs / rhs, 0 when rhs = 0
  bool converged = true;
  bool at_grid_edge = false;       // weak sup found at an end of the lambda grid
  double lambda_at_sup = 0.0;
};

struct CorollaryOptions {
  // x_panels = 0 picks 64 in 1-D and 16 otherwise: with alpha < N/p + 1 the
  // sup sits where pairs across the whole support still count
  PolarOptions polar = [] {
    PolarOptions po;
    po.x_panels = 0;
    return po;
  }();
  int per_decade = 6;              // lambda grid density
  double decades_below = 1.0;      // below 2 ||u||_inf / diam^alpha
  double decades_above = 1.0;      // above L^alpha (2 ||u||_inf)^{1 - alpha}
  int refine = 8;                  // golden-section steps at the sup
  GagliardoOptions gagliardo{};
  int norm_panels = 64;
  int workers = 0;
};

/// Lambda grid for the weak quasinorm with a general alpha: log-spaced from
/// 2 ||u||_inf / diam^alpha (pairs across the whole support) to
/// L^alpha (2 ||u||_inf)^{1 - alpha}, padded by the configured decades.
std::vector<double> corollary_lambda_grid(const ScalarField& u, double alpha, const CorollaryOptions& opt = {});

/// sup over lambda of lambda^p mu(E_lambda) with the given alpha, as the
/// quasinorm (its p-th root).
WeakQuasinorm weak_quasinorm_alpha(const ScalarField& u, double p, double alpha, const CorollaryOptions& opt = {});

/// max |u| over a fine grid of the support box (catalogue peaks lie on it).
double sup_norm_estimate(const ScalarField& u);

/// sup over x, w, r of |u(x + r w) - u(x)| / r^s on a grid x sphere x log-r
/// ladder.
double holder_seminorm(const ScalarField& u, double s);

/// N = 1, p > 1: weak quasinorm with alpha = 2/p against ||u'||_1.
CorollaryReport check_cor_1_4(const ScalarField& u, double p, const CorollaryOptions& opt = {});

/// p > 1: weak quasinorm with alpha = (N + 1)/p against
/// ||u||_inf^{1 - 1/p} ||grad u||_1^{1/p}.
CorollaryReport check_cor_1_5(const ScalarField& u, double p, const CorollaryOptions& opt = {});

/// s1 p1 >= 1: weak quasinorm with alpha = N/p + s against
/// |u|_{W^{s1,p1}}^theta ||grad u||_1^{1 - theta}. The Holder seminorm stands
/// in for p1 = infinity. Throws InvalidParameter when s1 p1 < 1 (use
/// check_gn_strong there).
CorollaryReport check_cor_1_6(const ScalarField& u, const GNParams& gn, const CorollaryOptions& opt = {});

/// s1 = 0, p1 < infinity: |u|_{W^{s,p}} against ||u||_{p1}^theta ||grad u||_1^{1 - theta}.
/// Throws InvalidParameter for p1 = infinity (the inequality fails there).
CorollaryReport check_gn_strong(const ScalarField& u, double theta, double p1, const CorollaryOptions& opt = {});

/// N >= 2, 1/p = 1 - (1 - s)/N: |u|_{W^{s,p}} against ||grad u||_1.
/// Throws InvalidParameter for N = 1 (see failure_probe_ro4).
CorollaryReport check_sobolev_embedding(const ScalarField& u, double s, const CorollaryOptions& opt = {});

struct FailureProbe {
  double p = 2.0;
  std::vector<double> eps;
  std::vector<double> values;       // double integral of |u(x) - u(y)|^p / |x - y|^2
  std::vector<double> errors;
  std::vector<double> increments;   // V(eps_{i+1}) - V(eps_i)
  double rate = 0.0;                // least squares slope of V against log(1/eps)
  double last_increment_ratio = 0.0;
  bool diverges_at_diagonal = false;  // p = 1: every value is infinite
  bool increasing = false;
  std::vector<double> weak_lhs;     // check_cor_1_4 on the same fields
  double weak_spread = 0.0;         // max over rungs of max(v/median, median/v)
};

/// Mollified indicators of [0, 1] along a decreasing eps ladder. Throws
/// InvalidParameter unless every eps lies in (0, 0.5) and the ladder decreases.
FailureProbe failure_probe_ro4(double p, const std::vector<double>& eps_ladder, const CorollaryOptions& opt = {});

}  // namespace weaklp
