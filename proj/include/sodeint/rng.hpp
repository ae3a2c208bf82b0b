#pragma once

#include <cstdint>
#include <random>
#include <string>

namespace sodeint {

// Reproducible random number generation.
//
// Every stream of variates is keyed by (seed, sample_index, driver) plus a
// purpose tag, hashed through splitmix64 into the seed of a mt19937_64
// engine.  Normal variates are produced by the inverse CDF (Wichura's
// AS 241, double precision), so a given key yields bit-identical draws on
// any platform.  The algorithm id below is echoed into report metadata.

inline const char* rng_algorithm_id() {
  return "mt19937_64(splitmix64-keyed)+icdf-as241";
}

/// splitmix64 finalizer; a stateless 64-bit mixing function.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Purpose tags keep unrelated streams (paths, condition sampling, ...)
/// disjoint even for equal (seed, sample, driver) triples.
enum class StreamPurpose : std::uint64_t {
  PathIncrements = 0,
  ConditionSampling = 1,
  ProbeSampling = 2,
};

inline std::uint64_t stream_key(std::uint64_t seed, std::uint64_t sample_index,
                                std::uint64_t driver,
                                StreamPurpose purpose = StreamPurpose::PathIncrements) {
  std::uint64_t k = splitmix64(seed);
  k = splitmix64(k ^ (0x1000 + static_cast<std::uint64_t>(purpose)));
  k = splitmix64(k ^ sample_index);
  k = splitmix64(k ^ driver);
  return k;
}

/// Inverse of the standard normal CDF (AS 241, PPND16).  u must lie in (0,1).
double normal_icdf(double u);

/// One substream of i.i.d. draws.  uniform() is strictly inside (0,1).
class RandomStream {
 public:
  RandomStream(std::uint64_t seed, std::uint64_t sample_index, std::uint64_t driver,
               StreamPurpose purpose = StreamPurpose::PathIncrements)
      : engine_(stream_key(seed, sample_index, driver, purpose)) {}

  double uniform() {
    // 53-bit mantissa, offset by half an ulp so 0 and 1 are excluded.
    return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
  }

  double normal() { return normal_icdf(uniform()); }

 private:
  std::mt19937_64 engine_;
};

}  // namespace sodeint
