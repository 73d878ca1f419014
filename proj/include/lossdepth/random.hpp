#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <vector>

namespace lossdepth {

/// Mixes a master seed with stream identifiers (experiment, run, n, ...)
/// into an independent 64-bit seed. Counter-based, so any stream can be
/// regenerated without replaying the others.
std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> stream);

/// Seeded generator with platform-independent uniform and normal draws.
/// std::normal_distribution is implementation-defined, so normals come from
/// Box-Muller on top of the (fully specified) mt19937_64 bit stream.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }
  /// Uniform in [0, 1).
  double uniform();
  double normal();
  /// Uniform integer in [0, bound).
  std::uint64_t uniform_index(std::uint64_t bound);

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(uniform_index(i));
      std::swap(v[i - 1], v[j]);
    }
  }

  /// k distinct indices from [0, n), in draw order.
  std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t k);

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace lossdepth
