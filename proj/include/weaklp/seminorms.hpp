#pragma once

#include <vector>

#include "weaklp/fields.hpp"
#include "weaklp/quadrature.hpp"

namespace weaklp {

/// |u|^p_{W^{s,p}} = double integral of |u(x) - u(y)|^p / |x - y|^{N + s p},
/// restricted to |x - y| >= inner_cutoff when that is positive.
struct SeminormQuery {
  ScalarField field;
  double s = 0.5;
  double p = 2.0;
  double inner_cutoff = 0.0;

  /// Throws InvalidParameter unless s in (0, 1], p >= 1, cutoff >= 0, and
  /// cutoff > 0 when s = 1 (the full integral is infinite for nonconstant u).
  void validate() const;
};

struct GagliardoOptions {
  int x_panels = 32;        // per axis, over the support box
  int x_order = 4;
  int sphere_order = 16;
  int r_panels = 16;        // uniform-r panels on [r_split, exit]
  int r_order = 8;
  double r_split = 0.02;    // below this, Gauss in log r
  double log_panel_width = 2.0;
  /// Below r_split * 1e-6 the quotient |u(x + r w) - u(x)| / r is replaced by
  /// |grad u(x) . w| and integrated in closed form (s < 1, no cutoff only).
  double tiny_fraction = 1e-6;
  double rtol = 1e-4;
  bool estimate_error = true;
  int workers = 0;
};

/// Polar pair coordinates (x, w, r) with x in the support box S. Pairs with
/// y = x + r w inside S are integrated numerically; pairs with y outside S
/// have u(y) = 0 and, counted twice by symmetry, contribute exactly
/// 2 |u(x)|^p max(exit, cutoff)^{-sp} / (sp).
QuadratureResult gagliardo(const SeminormQuery& q, const GagliardoOptions& opt = {});

struct DivergenceProbe {
  std::vector<double> deltas;
  std::vector<double> values;       // V(delta): s = 1 integral over |x - y| >= delta
  std::vector<double> errors;
  double slope = 0.0;               // least squares of V against log(1/delta)
  double predicted = 0.0;           // k(p, N) * ||grad u||_p^p
  double relative_error = 0.0;
};

/// Throws InvalidParameter unless the ladder is geometric, decreasing and
/// has at least two rungs.
DivergenceProbe diagonal_divergence_probe(const ScalarField& u, double p, const std::vector<double>& deltas,
                                          const GagliardoOptions& opt = {});

struct BbmLadder {
  std::vector<double> s;
  std::vector<double> values;       // (1 - s) * |u|^p_{W^{s,p}}
  std::vector<double> errors;
  double plateau = 0.0;             // value at the s closest to 1
  double predicted = 0.0;           // k(p, N) / p * ||grad u||_p^p
  double measured_multiple = 0.0;   // plateau / ||grad u||_p^p
  double relative_error = 0.0;
};

/// Throws InvalidParameter unless the ladder is increasing inside (0, 1).
BbmLadder bbm_factor(const ScalarField& u, double p, const std::vector<double>& s_ladder,
                     const GagliardoOptions& opt = {});

}  // namespace weaklp
