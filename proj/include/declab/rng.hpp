#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace declab {

// Philox4x32-10 block function (Salmon et al., SC'11).
using PhiloxCounter = std::array<std::uint32_t, 4>;
using PhiloxKey = std::array<std::uint32_t, 2>;
PhiloxCounter philox4x32_10(PhiloxCounter counter, PhiloxKey key) noexcept;

// Substream tags. Each consumer of randomness draws from its own tag so that
// e.g. the decoupled copy never shares words with the original path.
enum class Substream : std::uint32_t {
  path = 0,
  decoupled_copy = 1,
  rademacher = 2,
  gaussian_inner = 3,
  search = 4,
  model = 5,
  driver = 6,
  driver_copy = 7,
  coefficients = 8,
};

// Counter-based generator: the output sequence is a pure function of
// (seed, stream, substream), so any replica can be regenerated independently
// of scheduling. Satisfies UniformRandomBitGenerator.
class CounterRng {
 public:
  using result_type = std::uint32_t;

  CounterRng(std::uint64_t seed, std::uint64_t stream, Substream sub = Substream::path) noexcept
      : CounterRng(seed, stream, static_cast<std::uint32_t>(sub)) {}
  CounterRng(std::uint64_t seed, std::uint64_t stream, std::uint32_t sub) noexcept;

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() noexcept;
  std::uint64_t next_u64() noexcept;
  // Uniform on [0, 1) with 53 random bits.
  double uniform() noexcept;
  // Uniform on (0, 1).
  double uniform_open() noexcept;
  // Standard normal via Box-Muller; pairs are cached.
  double normal() noexcept;
  // Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) noexcept;
  double rademacher() noexcept { return (operator()() & 1u) ? 1.0 : -1.0; }

 private:
  void refill() noexcept;

  PhiloxKey key_;
  PhiloxCounter counter_;
  PhiloxCounter block_{};
  unsigned used_ = 4;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace declab
