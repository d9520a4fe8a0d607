#pragma once

#include <cmath>
#include <cstdint>

#include "lsp/matrix.hpp"

namespace lsp {

// Counter-based random streams. Every draw is a pure function of
// (root seed, key triple), so coupled trajectories can share noise
// bit-exactly and a single index can be perturbed surgically without
// touching any other draw. No hidden state anywhere.

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed) : seed_(seed) {}

  std::uint64_t seed() const { return seed_; }

  std::uint64_t bits(std::uint64_t a, std::uint64_t b, std::uint64_t c,
                     std::uint64_t salt = 0) const {
    std::uint64_t h = splitmix64(seed_);
    h = splitmix64(h ^ a);
    h = splitmix64(h ^ b);
    h = splitmix64(h ^ c);
    return splitmix64(h ^ salt);
  }

  /// Uniform on (0,1]; strictly positive so it can feed a logarithm.
  double uniform01(std::uint64_t a, std::uint64_t b, std::uint64_t c,
                   std::uint64_t salt = 0) const {
    return (static_cast<double>(bits(a, b, c, salt) >> 11) + 1.0) * 0x1.0p-53;
  }

  /// Standard normal via Box-Muller on two counter draws.
  double normal(std::uint64_t a, std::uint64_t b, std::uint64_t c) const {
    const double u1 = uniform01(a, b, c, 0x6e6f726d31ULL);
    const double u2 = uniform01(a, b, c, 0x6e6f726d32ULL);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
  }

  /// i.i.d. standard normal vector keyed by (stream, step, coordinate).
  Vec normal_vec(std::uint64_t stream, std::uint64_t step, std::size_t dim) const {
    Vec v(dim);
    for (std::size_t i = 0; i < dim; ++i) v[i] = normal(stream, step, i);
    return v;
  }

  /// Uniform vector in the ball of given radius around a center,
  /// keyed by a single stream index.
  Vec ball_point(std::uint64_t stream, const Vec& center, double radius) const {
    const std::size_t d = center.size();
    Vec g = normal_vec(stream, 0xba11ULL, d);
    const double n = norm2(g);
    const double u = uniform01(stream, 0xba11ULL, d, 0x726164ULL);
    const double r = radius * std::pow(u, 1.0 / static_cast<double>(d));
    Vec p(center);
    if (n > 0.0) {
      for (std::size_t i = 0; i < d; ++i) p[i] += r * g[i] / n;
    }
    return p;
  }

 private:
  std::uint64_t seed_;
};

}  // namespace lsp
