#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace retro {

/// Identifier recorded in every output header next to the root seed.
/// mt19937_64 raw output is pinned by the C++ standard; uniform doubles use
/// the top 53 bits, normals use Marsaglia's polar method, so streams are
/// reproducible across platforms and standard libraries.
inline constexpr const char* kRngAlgorithm = "mt19937_64/u53/polar:v1";

/// splitmix64 finalizer, used to derive independent child seeds.
std::uint64_t mix64(std::uint64_t z);

/// Child seed for a (stream, index) pair under a root seed. Structural
/// derivation keeps results independent of scheduling: worker threads never
/// share generator state.
std::uint64_t derive_seed(std::uint64_t root, std::uint64_t stream, std::uint64_t index = 0);

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next_u64() { return gen_(); }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  /// Uniform index in [0, n). Requires n > 0.
  std::size_t uniform_index(std::size_t n);

  double normal(double mean = 0.0, double stddev = 1.0);

  /// Fisher-Yates shuffle driven by this generator.
  template <class T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = uniform_index(i);
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::mt19937_64 gen_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace retro
