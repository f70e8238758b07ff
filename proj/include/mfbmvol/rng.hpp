#pragma once

#include <cstdint>
#include <random>
#include <span>

namespace mfbmvol {

/// Identifies one independent random stream.
///
/// The engine state is a pure function of all three fields, so a replication
/// can be regenerated in isolation regardless of which worker ran it.
/// `substream` separates the different noise sources (Brownian part, fGn
/// part, experiment cell) that belong to the same replication.
struct RngSeed {
  std::uint64_t master_seed = 0;
  std::uint64_t stream_index = 0;
  std::uint32_t substream = 0;

  RngSeed with_substream(std::uint32_t tag) const {
    return RngSeed{master_seed, stream_index, tag};
  }

  friend bool operator==(const RngSeed&, const RngSeed&) = default;
};

/// Map 64 random bits to a uniform in the open interval (0, 1).
double open_uniform(std::uint64_t bits) noexcept;

/// Standard normal quantile, used as the fixed Gaussian transform.
double standard_normal_quantile(double u);

/// Standard normal variates by inverse-CDF transform of an mt19937_64 stream.
///
/// The engine is seeded through std::seed_seq, and both are fully specified
/// by the standard, so a given RngSeed yields bit-identical output on any
/// conforming implementation.
class NormalStream {
 public:
  explicit NormalStream(const RngSeed& seed);

  double next();
  void fill(std::span<double> out);

 private:
  std::mt19937_64 engine_;
};

}  // namespace mfbmvol
