#pragma once

#include <cstdint>
#include <limits>

namespace gaplab {

/// SplitMix64 finalizer. A bijection on 64-bit words.
[[nodiscard]] std::uint64_t mix64(std::uint64_t z) noexcept;

/**
 * Counter-based random stream.
 *
 * The stream state is a 64-bit counter seeded from a hash of
 * (master_seed, stream_index); draw k is mix64(state0 + (k + 1) * golden).
 * Two streams with the same key produce the same sequence on every platform,
 * independent of which thread consumes them. Distributions are implemented
 * here rather than through <random> so that outputs do not depend on the
 * standard library vendor.
 *
 * Satisfies UniformRandomBitGenerator.
 */
class RngStream {
 public:
  using result_type = std::uint64_t;

  RngStream(std::uint64_t master_seed, std::uint64_t stream_index) noexcept;

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()() noexcept { return next_u64(); }

  std::uint64_t next_u64() noexcept;
  /// Uniform on [0, 1) with 53 random bits.
  double uniform() noexcept;
  /// Uniform on {0, ..., bound - 1}; bound must be positive.
  std::uint64_t below(std::uint64_t bound) noexcept;
  /// Standard normal via the Marsaglia polar method.
  double normal() noexcept;

  [[nodiscard]] std::uint64_t master_seed() const noexcept { return master_seed_; }
  [[nodiscard]] std::uint64_t stream_index() const noexcept { return stream_index_; }

  friend bool operator==(const RngStream&, const RngStream&) = default;

 private:
  std::uint64_t master_seed_;
  std::uint64_t stream_index_;
  std::uint64_t state_;
  double spare_normal_ = 0.0;
  bool has_spare_ = false;
};

/// Stream for trial `trial_index` of a run seeded with `master_seed`.
/// Injective in trial_index for a fixed seed.
[[nodiscard]] RngStream derive_trial_stream(std::uint64_t master_seed,
                                            std::uint64_t trial_index) noexcept;

}  // namespace gaplab
