#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string>

namespace ztsim {

/// Seeded deterministic randomness source. Every byte of randomness in the
/// system (keys, nonces, share polynomials, scheduler choices) is drawn from
/// one of these so that a run is a pure function of its seed.
class DeterministicRng {
 public:
  explicit DeterministicRng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform in [0, bound); bound must be nonzero.
  std::uint64_t next_below(std::uint64_t bound);

  void fill(std::span<std::uint8_t> out);

  /// Engine state round-trips through a string so world files can resume.
  std::string save_state() const;
  bool restore_state(const std::string& state);

 private:
  std::mt19937_64 engine_;
};

}  // namespace ztsim
