#pragma once

#include <cstdint>

namespace smpc::rng {

inline constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ull;

/// splitmix64 finaliser.
std::uint64_t mix64(std::uint64_t z);

/// Substreams used by the simulator.
enum class Stream : std::uint64_t { Disturbance = 0, Measurement = 1, Arrival = 2 };

/// Stateless counter-based generator: draw i of a stream is a pure function
/// of (seed, stream, i), so any draw can be reproduced in isolation.
///   key  = mix64(seed + golden (stream + 1))
///   bits = mix64(key + golden (counter + 1))
///   uniform = ((bits >> 11) + 0.5) 2^-53
///   normal  = inverse_normal_cdf(uniform)
class CounterStream {
 public:
  CounterStream(std::uint64_t seed, Stream stream);

  std::uint64_t bits(std::uint64_t counter) const;
  /// In (0, 1), never 0 or 1.
  double uniform(std::uint64_t counter) const;
  double normal(std::uint64_t counter) const;

 private:
  std::uint64_t key_;
};

/// Quantile of the standard normal: rational approximation followed by one
/// Halley correction against erfc.
double inverse_normal_cdf(double p);

}  // namespace smpc::rng
