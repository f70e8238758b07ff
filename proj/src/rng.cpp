#include "mfbmvol/rng.hpp"

#include <boost/math/special_functions/erf.hpp>

#include <cmath>
#include <numbers>

namespace mfbmvol {

namespace {

std::mt19937_64 seeded_engine(const RngSeed& seed) {
  const auto lo = [](std::uint64_t v) { return static_cast<std::uint32_t>(v); };
  const auto hi = [](std::uint64_t v) { return static_cast<std::uint32_t>(v >> 32); };
  std::seed_seq seq{lo(seed.master_seed), hi(seed.master_seed),
                    lo(seed.stream_index), hi(seed.stream_index),
                    seed.substream, 0x6d66626du};
  return std::mt19937_64(seq);
}

}  // namespace

double open_uniform(std::uint64_t bits) noexcept {
  // top 52 bits, offset by half a step: the largest value 1 - 2^-53 is still
  // representable, so neither 0 nor 1 can occur
  return (static_cast<double>(bits >> 12) + 0.5) * 0x1.0p-52;
}

double standard_normal_quantile(double u) {
  return -std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * u);
}

NormalStream::NormalStream(const RngSeed& seed) : engine_(seeded_engine(seed)) {}

double NormalStream::next() {
  return standard_normal_quantile(open_uniform(engine_()));
}

void NormalStream::fill(std::span<double> out) {
  for (double& v : out) v = next();
}

}  // namespace mfbmvol
