#pragma once

// Deterministic random draws. The standard distributions are implementation
// defined, so every draw in the pipeline goes through these fixed algorithms;
// a (seed, stream) pair yields the same bytes on any platform.

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "roadpheno/util.hpp"

namespace roadpheno::rng {

inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Independent stream seed from a master seed and a stream tag. Streams for
// named entities (classes, images) hash the name first.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
  std::uint64_t s = master ^ (0x6a09e667f3bcc909ULL + stream);
  std::uint64_t a = splitmix64(s);
  return splitmix64(s) ^ a;
}

inline std::uint64_t derive_seed(std::uint64_t master, const std::string& tag) {
  return derive_seed(master, fnv1a64(tag));
}

class Engine {
 public:
  explicit Engine(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t bits() { return gen_(); }

  // [0, n) without the library's distribution machinery
  std::uint64_t below(std::uint64_t n) {
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(gen_()) * n) >> 64);
  }

  // [0, 1) with 53-bit resolution
  double uniform01() {
    return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  double log_uniform(double lo, double hi) {
    return std::exp(uniform(std::log(lo), std::log(hi)));
  }

  // Box-Muller; one gaussian per two uniform draws, no cached spare
  double normal(double mean = 0.0, double sigma = 1.0) {
    double u1 = uniform01();
    double u2 = uniform01();
    while (u1 == 0.0) u1 = uniform01();
    double r = std::sqrt(-2.0 * std::log(u1));
    return mean + sigma * r * std::cos(2.0 * M_PI * u2);
  }

  template <class T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::mt19937_64 gen_;
};

}  // namespace roadpheno::rng
