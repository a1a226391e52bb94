#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace vsc {

// std:: distributions are implementation-defined, so draws are built directly
// on mt19937_64 output to keep seeded selections identical across toolchains.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  /// Uniform double in [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform integer in [0, bound), unbiased.
  std::uint64_t below(std::uint64_t bound);

  template <typename T>
  void shuffle(std::vector<T>& items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(below(i));
      std::swap(items[i - 1], items[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

/// Derives a seed from a base seed and a string salt (FNV-1a over the salt).
std::uint64_t salted_seed(std::uint64_t seed, std::string_view salt);

}  // namespace vsc
