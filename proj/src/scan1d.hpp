#pragma once

// Sign-change scan shared by the level-set, rotation and maximal estimators.

#include <cmath>

namespace weaklp::detail {

/// Finds {r in (a, b] : g(r) >= 0} given the membership state just right of a.
/// Samples `scan` uniform points, refines every label change with Illinois
/// false position (bisection every 8th step) down to tol * (b - a), and emits
/// each interval (lo, hi]. An interval still open at b is closed at b and
/// reported with open_end = true so callers can extend it analytically.
/// Returns the number of label changes.
template <class G, class Emit>
int scan_intervals(G&& g, double a, double b, bool state, int scan, double tol, Emit&& emit,
                   bool* open_end = nullptr, double* open_start = nullptr) {
  int crossings = 0;
  double open_at = a;
  if (b > a) {
    const double width = tol * (b - a);
    double prev = a;
    double gprev = g(a);
    for (int k = 1; k <= scan; ++k) {
      double r = a + (b - a) * k / scan;
      double gr = g(r);
      bool s = gr >= 0.0;
      if (s != state) {
        double lo = prev, hi = r, glo = gprev, ghi = gr;
        int side = 0;
        for (int it = 0; it < 200 && hi - lo > width; ++it) {
          double mid = 0.5 * (lo + hi);
          if (it % 8 != 7 && glo != ghi) {
            double t = lo + (hi - lo) * glo / (glo - ghi);
            if (t > lo && t < hi) mid = t;
          }
          double gm = g(mid);
          if ((gm >= 0.0) == state) {
            lo = mid;
            glo = gm;
            if (side == -1) ghi *= 0.5;
            side = -1;
          } else {
            hi = mid;
            ghi = gm;
            if (side == 1) glo *= 0.5;
            side = 1;
          }
        }
        double c = 0.5 * (lo + hi);
        ++crossings;
        if (state) emit(open_at, c);
        else open_at = c;
        state = s;
      }
      prev = r;
      gprev = gr;
    }
  }
  if (open_end) *open_end = state;
  if (open_start) *open_start = open_at;
  if (state && !open_end) emit(open_at, b);
  return crossings;
}

}  // namespace weaklp::detail
