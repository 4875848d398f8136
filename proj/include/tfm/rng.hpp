#pragma once

#include <cstdint>
#include <random>

namespace tfm {

/// Deterministic random source used by every stochastic operation.
///
/// The engine is std::mt19937_64, whose output sequence is fixed by the C++
/// standard. The standard library distributions are not (their algorithms are
/// implementation-defined), so all transforms below are implemented here to
/// keep seeded runs bit-identical across toolchains.
class Rng
{
public:
  explicit Rng(std::uint64_t seed)
    : engine_(seed)
  {}

  std::uint64_t next_u64()
  {
    return engine_();
  }

  /// Uniform on the open interval (0, 1) with 53 bits of resolution.
  double uniform01()
  {
    return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
  }

  double uniform(double lo, double hi)
  {
    return lo + (hi - lo) * uniform01();
  }

  /// Unbiased integer in [0, n). n must be positive.
  std::uint64_t uniform_index(std::uint64_t n);

  /// Standard normal via the Marsaglia polar method.
  double normal();

  double normal(double mean, double sd)
  {
    return mean + sd * normal();
  }

  double exponential(double rate);

  bool bernoulli(double p)
  {
    return uniform01() < p;
  }

private:
  std::mt19937_64 engine_;
  double          spare_normal_     = 0.0;
  bool            has_spare_normal_ = false;
};

/// SplitMix64 finalizer: decorrelates seeds derived from (base, index) pairs.
std::uint64_t mix_seed(std::uint64_t x);

/// Seed for the index-th independent stream under a base seed.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index);

}  // namespace tfm
