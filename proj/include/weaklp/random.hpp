#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

#include "weaklp/geometry.hpp"

namespace weaklp {

namespace detail {

inline constexpr std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace detail

/// Counter-based random stream: the k-th draw of sample i is a pure function
/// of (seed, stream_id, i, k). Nothing depends on which worker asks or in
/// which order, so parallel Monte Carlo is reproducible bit for bit.
class RandomStream {
 public:
  RandomStream(std::uint64_t seed = 0, std::uint64_t stream_id = 0)
      : seed_(seed), stream_id_(stream_id),
        key_(detail::splitmix64(detail::splitmix64(seed) ^
                                detail::splitmix64(stream_id + 0x5851f42d4c957f2dULL))) {}

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_id_; }

  /// Substream derived from this one (used for per-job and per-level splits).
  RandomStream split(std::uint64_t child) const {
    return RandomStream(detail::splitmix64(key_ ^ child), stream_id_ + child + 1);
  }

  std::uint64_t bits(std::uint64_t index, std::uint32_t draw) const {
    std::uint64_t c = key_ ^ detail::splitmix64(index * 0x2545f4914f6cdd1dULL + draw);
    return detail::splitmix64(detail::splitmix64(c) + key_);
  }

  /// Uniform in (0, 1): never returns exactly 0 or 1.
  double uniform(std::uint64_t index, std::uint32_t draw) const {
    return (static_cast<double>(bits(index, draw) >> 11) + 0.5) * 0x1.0p-53;
  }

  double normal(std::uint64_t index, std::uint32_t draw) const {
    double u1 = uniform(index, 2 * draw);
    double u2 = uniform(index, 2 * draw + 1);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  /// Uniform direction on S^{dim-1}. For dim >= 2 it consumes the uniform
  /// draws [2 first_draw, 2 (first_draw + dim)) through normal(); for dim = 1
  /// only draw first_draw.
  Point direction(std::uint64_t index, std::uint32_t first_draw, int dim) const {
    Point w{};
    if (dim == 1) {
      w[0] = uniform(index, first_draw) < 0.5 ? -1.0 : 1.0;
      return w;
    }
    double n2 = 0.0;
    for (int i = 0; i < dim; ++i) {
      w[i] = normal(index, first_draw + i);
      n2 += w[i] * w[i];
    }
    double inv = 1.0 / std::sqrt(n2);
    for (int i = 0; i < dim; ++i) w[i] *= inv;
    return w;
  }

  /// Uniform point in a box; consumes draws [first_draw, first_draw + dim).
  Point in_box(const Box& box, std::uint64_t index, std::uint32_t first_draw) const {
    Point x{};
    for (int i = 0; i < box.dim; ++i)
      x[i] = box.lo[i] + box.side(i) * uniform(index, first_draw + i);
    return x;
  }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::uint64_t key_;
};

}  // namespace weaklp
