#pragma once

#include <cstdint>
#include <random>

namespace affect {

// Deterministic random source. Every stochastic component takes one of these
// explicitly; nothing in the library reads global random state.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  float uniform(float lo, float hi) {
    std::uniform_real_distribution<float> d(lo, hi);
    return d(gen_);
  }

  double uniform_double(double lo, double hi) {
    std::uniform_real_distribution<double> d(lo, hi);
    return d(gen_);
  }

  // Inclusive on both ends.
  int uniform_int(int lo, int hi) {
    std::uniform_int_distribution<int> d(lo, hi);
    return d(gen_);
  }

  float normal(float mean, float stddev) {
    std::normal_distribution<float> d(mean, stddev);
    return d(gen_);
  }

  bool bernoulli(double p) {
    std::bernoulli_distribution d(p);
    return d(gen_);
  }

  std::uint64_t next_u64() { return gen_(); }

  std::mt19937_64& engine() { return gen_; }

  // splitmix64-style mixing for deriving independent child seeds.
  static std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
    std::uint64_t z = a + 0x9e3779b97f4a7c15ULL * (b + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

 private:
  std::mt19937_64 gen_;
};

}  // namespace affect
