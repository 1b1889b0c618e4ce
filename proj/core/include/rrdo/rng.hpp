#pragma once

#include <cstdint>
#include <limits>

namespace rrdo {

/// Counter-based random stream.
///
/// Algorithm (pinned, part of the reproducibility contract):
///   key      = splitmix64(seed ^ splitmix64(stream_index))
///   word_k   = splitmix64(key + k * 0x9E3779B97F4A7C15), k = 1, 2, ...
///   uniform  = (word >> 11) * 2^-53               in [0, 1)
/// where splitmix64(z) is the SplitMix64 output finalizer. Normals use
/// Box-Muller on two open uniforms and gamma variates use Marsaglia-Tsang,
/// so no standard-library distribution enters a sample path.
class RngStream {
 public:
  using result_type = std::uint64_t;

  RngStream(std::uint64_t seed, std::uint64_t stream_index);

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t stream_index() const noexcept { return stream_; }
  std::uint64_t counter() const noexcept { return counter_; }

  std::uint64_t next_u64() noexcept;
  std::uint64_t operator()() noexcept { return next_u64(); }
  static constexpr std::uint64_t min() { return 0; }
  static constexpr std::uint64_t max() { return std::numeric_limits<std::uint64_t>::max(); }

  /// Uniform on [0, 1).
  double uniform() noexcept;
  /// Uniform on (0, 1).
  double uniform_open() noexcept;
  double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }
  double normal() noexcept;
  /// Gamma(shape, 1).
  double gamma(double shape);

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  bool has_spare_normal_ = false;
  double spare_normal_ = 0.0;
};

std::uint64_t splitmix64(std::uint64_t z) noexcept;

}  // namespace rrdo
