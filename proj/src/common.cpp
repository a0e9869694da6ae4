#include "slicefed/common.hpp"

namespace slicefed {

std::string_view slice_name(Slice s) {
  switch (s) {
    case Slice::EMBB:
      return "embb";
    case Slice::URLLC:
      return "urllc";
    case Slice::MMTC:
      return "mmtc";
  }
  return "unknown";
}

Rng make_stream(std::uint64_t seed, std::uint64_t purpose, std::uint64_t entity) {
  auto lo = [](std::uint64_t v) { return static_cast<std::uint32_t>(v & 0xffffffffu); };
  auto hi = [](std::uint64_t v) { return static_cast<std::uint32_t>(v >> 32); };
  std::seed_seq seq{lo(seed), hi(seed), lo(purpose), hi(purpose), lo(entity), hi(entity)};
  return Rng(seq);
}

bool Action::valid() const {
  for (double f : fractions) {
    if (!std::isfinite(f) || f < 0.0 || f > 1.0) return false;
  }
  return true;
}

Action Action::equal_split() { return Action{{1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0}}; }

}  // namespace slicefed
