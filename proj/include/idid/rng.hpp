#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace idid {

/// Standard normal CDF.
double norm_cdf(double x);

/// Inverse standard normal CDF, accurate to ~1e-15 (rational approximation
/// plus one Halley refinement).
double inv_norm_cdf(double p);

/// Deterministic stream derivation: splitmix64 chaining over
/// (master_seed, id_0, id_1, ...). Streams with distinct paths are
/// statistically independent, and the derivation is schedule-independent,
/// so parallel consumers can each derive their own stream.
class RngStream {
 public:
  explicit RngStream(std::uint64_t master_seed,
                     std::initializer_list<std::uint64_t> path = {});

  /// Uniform on the open interval (0, 1).
  double uniform();
  /// Standard normal via inverse-CDF sampling.
  double normal();
  bool bernoulli(double p);
  /// Truncated standard normal on (-1, 1) via inverse-CDF sampling.
  double truncated_normal();

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace idid
