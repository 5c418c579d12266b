#pragma once

#include <cstdint>
#include <limits>

namespace franson::rng {

std::uint64_t splitmix64(std::uint64_t x);

/// Stream identifiers; detector channels use kDetector + channel.
enum Stream : std::uint64_t {
  kOutcome = 1,
  kPhase = 2,
  kBackground = 3,
  kDetector = 16,
};

/// Counter-based generator: the sequence is a pure function of
/// (seed, stream, key), so any bin or channel can be regenerated on its own.
/// Satisfies UniformRandomBitGenerator.
class CounterEngine {
 public:
  using result_type = std::uint64_t;

  CounterEngine(std::uint64_t seed, std::uint64_t stream, std::uint64_t key);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }
  result_type operator()() { return splitmix64(base_ + kGolden * ++counter_); }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

 private:
  static constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;
  std::uint64_t base_;
  std::uint64_t counter_ = 0;
};

}  // namespace franson::rng
