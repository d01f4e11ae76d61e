#ifndef SSM_RNG_HPP
#define SSM_RNG_HPP

#include <array>
#include <cstdint>
#include <limits>

namespace ssm {

/// Philox4x32-10 block function (Salmon et al., Random123).
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key) noexcept;

/// Counter-based random stream addressed by (seed, path).
///
/// A stream is a value: copying it copies its position. `child(i)` derives an
/// independent stream whose path is the parent's path extended by `i`; the
/// derivation is a pure function, so the draws a particle sees depend only on
/// its (seed, path) address and never on scheduling.
class RngStream {
 public:
  using result_type = std::uint64_t;

  explicit RngStream(std::uint64_t seed) noexcept;

  RngStream child(std::uint64_t index) const noexcept;

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t path_hash() const noexcept { return path_; }

  std::uint64_t next_u64() noexcept;
  /// Uniform on [0, 1) with 53 random bits.
  double uniform() noexcept;
  /// Uniform on the open interval (0, 1).
  double uniform_open() noexcept;
  /// Standard normal draw (Box-Muller, both variates used).
  double normal() noexcept;

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }
  result_type operator()() noexcept { return next_u64(); }

 private:
  RngStream(std::uint64_t seed, std::uint64_t path) noexcept;

  std::uint64_t seed_;
  std::uint64_t path_;
  std::uint64_t block_ = 0;
  std::array<std::uint64_t, 2> buffer_{};
  int buffered_ = 0;
  double spare_normal_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace ssm

#endif  // SSM_RNG_HPP
