#pragma once

#include <array>
#include <complex>
#include <cstdint>

namespace polsar {

/// Philox4x32-10 counter-based block function (Salmon et al., SC'11).
/// Stateless: the same (counter, key) always yields the same block.
struct Philox4x32 {
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  [[nodiscard]] static Counter block(Counter counter, Key key);
};

/// Deterministic random stream keyed by (seed, stream_id). Draw k of the
/// stream is a pure function of (seed, stream_id, k), so streams can be
/// consumed from any thread in any order without changing their values.
class CounterStream {
 public:
  CounterStream(std::uint64_t seed, std::uint64_t stream_id);

  std::uint32_t next_u32();
  std::uint64_t next_u64();

  /// Uniform double in the open interval (0, 1), 53-bit resolution.
  double uniform();
  /// Uniform double in [lo, hi).
  double uniform(double lo, double hi);

  /// Circular complex Gaussian with E|z|^2 = 1 (variance 1/2 per real
  /// component), Box-Muller on two uniforms.
  std::complex<double> complex_normal();

  /// Standard real normal (variance 1).
  double normal();

  [[nodiscard]] std::uint64_t blocks_used() const { return block_index_; }

 private:
  void refill();

  Philox4x32::Key key_{};
  std::uint64_t stream_id_ = 0;
  std::uint64_t block_index_ = 0;
  Philox4x32::Counter buffer_{};
  int cursor_ = 4;
  double spare_normal_ = 0.0;
  bool has_spare_ = false;
};

/// splitmix64 finalizer, used to derive independent seeds from one master seed.
[[nodiscard]] std::uint64_t mix_seed(std::uint64_t x);

}  // namespace polsar
