#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace hamsel {

/// Philox4x32-10 counter-based generator (Salmon et al., Random123). The
/// 64-bit key is the experiment seed and the upper half of the counter is a
/// stream id, so every replication owns an independent, addressable stream
/// and results do not depend on how replications are scheduled.
class Philox4x32 {
 public:
  using result_type = std::uint64_t;
  using Block = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  Philox4x32(std::uint64_t seed, std::uint64_t stream) noexcept;

  static Block bijection(Block counter, Key key) noexcept;

  result_type operator()() noexcept;

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept {
    return std::numeric_limits<result_type>::max();
  }

 private:
  void refill() noexcept;

  Key key_;
  std::uint64_t stream_;
  std::uint64_t block_index_ = 0;
  Block buffer_{};
  int used_ = 4;
};

/// Random variates on top of one Philox stream.
class Rng {
 public:
  Rng(std::uint64_t seed, std::uint64_t stream) noexcept : engine_(seed, stream) {}

  /// Stream for replication `rep` of an experiment seeded with `seed`.
  static Rng for_replication(std::uint64_t seed, std::uint64_t rep) noexcept {
    return Rng(seed, rep);
  }

  std::uint64_t bits() noexcept { return engine_(); }
  /// Uniform on [0, 1).
  double uniform() noexcept;
  /// Uniform integer on [0, n), unbiased. n must be > 0.
  std::uint64_t below(std::uint64_t n) noexcept;
  double normal() noexcept;
  bool bernoulli(double p) noexcept { return uniform() < p; }
  std::int64_t poisson(double lambda);

  Philox4x32& engine() noexcept { return engine_; }

 private:
  Philox4x32 engine_;
  double spare_normal_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace hamsel
