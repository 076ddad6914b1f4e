#include "wrs/rng.hpp"

#include <limits>

namespace wrs {

std::uint64_t RandomStream::uniform_below(std::uint64_t n) {
  if (n == 0) return engine_();
  if ((n & (n - 1)) == 0) return engine_() & (n - 1);
  // Reject the top partial block so every residue is equally likely.
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              (std::numeric_limits<std::uint64_t>::max() % n) - 1;
  std::uint64_t x = engine_();
  while (x > limit) x = engine_();
  return x % n;
}

}  // namespace wrs
