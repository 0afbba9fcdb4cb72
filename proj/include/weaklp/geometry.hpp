#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <utility>

namespace weaklp {

inline constexpr int kMaxDim = 4;

/// Point or vector in R^N, N <= kMaxDim. Only the first N entries are used;
/// the rest stay zero.
using Point = std::array<double, kMaxDim>;

inline double dot(const Point& a, const Point& b, int dim) {
  double s = 0.0;
  for (int i = 0; i < dim; ++i) s += a[i] * b[i];
  return s;
}

inline double norm(const Point& a, int dim) { return std::sqrt(dot(a, a, dim)); }

inline double distance(const Point& a, const Point& b, int dim) {
  double s = 0.0;
  for (int i = 0; i < dim; ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

/// x + t * dir
inline Point along(const Point& x, const Point& dir, double t, int dim) {
  Point y{};
  for (int i = 0; i < dim; ++i) y[i] = x[i] + t * dir[i];
  return y;
}

/// Axis-aligned box [lo, hi] in R^N.
struct Box {
  int dim = 1;
  Point lo{};
  Point hi{};

  double side(int axis) const { return hi[axis] - lo[axis]; }

  double volume() const {
    double v = 1.0;
    for (int i = 0; i < dim; ++i) v *= side(i);
    return v;
  }

  double diameter() const {
    double s = 0.0;
    for (int i = 0; i < dim; ++i) s += side(i) * side(i);
    return std::sqrt(s);
  }

  Point center() const {
    Point c{};
    for (int i = 0; i < dim; ++i) c[i] = 0.5 * (lo[i] + hi[i]);
    return c;
  }

  Box dilated(double r) const {
    Box b = *this;
    for (int i = 0; i < dim; ++i) {
      b.lo[i] -= r;
      b.hi[i] += r;
    }
    return b;
  }

  bool contains(const Point& x) const {
    for (int i = 0; i < dim; ++i)
      if (x[i] < lo[i] || x[i] > hi[i]) return false;
    return true;
  }

  bool covers(const Box& other) const {
    for (int i = 0; i < dim; ++i)
      if (other.lo[i] < lo[i] || other.hi[i] > hi[i]) return false;
    return true;
  }

  bool intersects(const Box& other) const {
    for (int i = 0; i < dim; ++i)
      if (other.hi[i] < lo[i] || other.lo[i] > hi[i]) return false;
    return true;
  }

  /// Euclidean distance from x to the box (0 inside).
  double distance_to(const Point& x) const {
    double s = 0.0;
    for (int i = 0; i < dim; ++i) {
      double d = std::max({lo[i] - x[i], 0.0, x[i] - hi[i]});
      s += d * d;
    }
    return std::sqrt(s);
  }

  /// Distance from an interior point x along unit direction w to the boundary.
  double exit_distance(const Point& x, const Point& w) const {
    double t = std::numeric_limits<double>::infinity();
    for (int i = 0; i < dim; ++i) {
      if (w[i] > 0.0) t = std::min(t, (hi[i] - x[i]) / w[i]);
      else if (w[i] < 0.0) t = std::min(t, (lo[i] - x[i]) / w[i]);
    }
    return std::max(t, 0.0);
  }

  /// Parameters [enter, leave] (enter >= 0) where the ray x + t w, t >= 0,
  /// meets the closed box; enter > leave when it misses.
  std::pair<double, double> ray_span(const Point& x, const Point& w) const {
    double t0 = 0.0, t1 = std::numeric_limits<double>::infinity();
    for (int i = 0; i < dim; ++i) {
      if (w[i] == 0.0) {
        if (x[i] < lo[i] || x[i] > hi[i]) return {1.0, 0.0};
        continue;
      }
      double a = (lo[i] - x[i]) / w[i], b = (hi[i] - x[i]) / w[i];
      if (a > b) std::swap(a, b);
      t0 = std::max(t0, a);
      t1 = std::min(t1, b);
    }
    return {t0, t1};
  }
};

inline Box hull(const Box& a, const Box& b) {
  Box r = a;
  for (int i = 0; i < a.dim; ++i) {
    r.lo[i] = std::min(a.lo[i], b.lo[i]);
    r.hi[i] = std::max(a.hi[i], b.hi[i]);
  }
  return r;
}

}  // namespace weaklp
