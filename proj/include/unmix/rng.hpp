#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

namespace unmix {

// xoshiro256** seeded through splitmix64. Hand-rolled so that streams are
// bit-reproducible across standard libraries and platforms; std::
// distributions are implementation-defined and would break the determinism
// contract of the CLI.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : origin_(seed) {
    std::uint64_t x = seed;
    for (auto& word : state_) word = splitmix64(x);
  }

  // Derived stream for run/worker k, a pure function of (seed, k).
  Rng derive(std::uint64_t stream) const {
    std::uint64_t x = origin_ ^ (0x9E3779B97F4A7C15ULL * (stream + 1));
    return Rng(splitmix64(x));
  }

  std::uint64_t next_u64() {
    const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  // Uniform in [0, 1), 53-bit resolution.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Standard normal via Marsaglia polar method (no trig, deterministic).
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * uniform() - 1.0;
      v = 2.0 * uniform() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double m = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * m;
    has_spare_ = true;
    return u * m;
  }

  // Uniform integer in [0, n).
  std::size_t index(std::size_t n) {
    return static_cast<std::size_t>(uniform() * static_cast<double>(n)) % n;
  }

  // k distinct indices from [0, n), in selection order.
  std::vector<std::size_t> distinct(std::size_t k, std::size_t n) {
    std::vector<std::size_t> pool(n);
    for (std::size_t i = 0; i < n; ++i) pool[i] = i;
    std::vector<std::size_t> out;
    out.reserve(k);
    for (std::size_t i = 0; i < k && i < n; ++i) {
      const std::size_t j = i + index(n - i);
      std::swap(pool[i], pool[j]);
      out.push_back(pool[i]);
    }
    return out;
  }

  // Uniform point on the probability simplex (symmetric Dirichlet, alpha=1)
  // via normalized exponentials.
  std::vector<double> simplex(std::size_t c) {
    std::vector<double> g(c);
    double total = 0.0;
    for (auto& gi : g) {
      gi = -std::log(1.0 - uniform());
      total += gi;
    }
    for (auto& gi : g) gi /= total;
    return g;
  }

 private:
  static std::uint64_t splitmix64(std::uint64_t& x) {
    x += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = x;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  static std::uint64_t splitmix64(std::uint64_t&& x) {
    std::uint64_t tmp = x;
    return splitmix64(tmp);
  }

  static std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }

  std::uint64_t state_[4]{};
  std::uint64_t origin_ = 0;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace unmix
