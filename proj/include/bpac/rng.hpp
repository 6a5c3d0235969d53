#pragma once

#include <cstdint>

namespace bpac {

/// Independent random streams. Each component draws from its own stream so
/// that reordering work in one component cannot shift draws in another.
enum class Stream : std::uint64_t {
  kGenerator = 1,
  kEnv = 2,
  kPhase1 = 3,
  kPhase2 = 4,
  kOptimizer = 5,
  kCover = 6,
  kTest = 7,
};

/// Counter-based generator: the i-th output is a SplitMix64 finalization of
/// (key + i * golden). Outputs are bit-identical across platforms and
/// standard libraries, unlike the std:: distributions.
class Rng {
 public:
  Rng(std::uint64_t seed, Stream stream);

  std::uint64_t next_u64();
  /// Uniform in [0, 1) with 53 random bits.
  double uniform();
  /// Uniform integer in [0, n). n must be positive.
  std::uint64_t below(std::uint64_t n);
  bool bernoulli(double p) { return uniform() < p; }

  std::uint64_t counter() const { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

std::uint64_t splitmix64(std::uint64_t x);

}  // namespace bpac
