#include "ztsim/rng.hpp"

#include <sstream>

namespace ztsim {

std::uint64_t DeterministicRng::next_below(std::uint64_t bound) {
  // Rejection sampling to avoid modulo bias.
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
  std::uint64_t v;
  do {
    v = engine_();
  } while (v >= limit);
  return v % bound;
}

void DeterministicRng::fill(std::span<std::uint8_t> out) {
  std::size_t i = 0;
  while (i < out.size()) {
    std::uint64_t v = engine_();
    for (int b = 0; b < 8 && i < out.size(); ++b, ++i) {
      out[i] = static_cast<std::uint8_t>(v >> (8 * b));
    }
  }
}

std::string DeterministicRng::save_state() const {
  std::ostringstream os;
  os << engine_;
  return os.str();
}

bool DeterministicRng::restore_state(const std::string& state) {
  std::istringstream is(state);
  is >> engine_;
  return !is.fail();
}

}  // namespace ztsim
