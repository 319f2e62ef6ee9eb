#pragma once

#include <cmath>
#include <cstddef>

namespace reprindt {

// Round-half-up of a nonnegative product such as p * n. The small guard
// absorbs representation error so that 0.5 * 5 and 0.85 * 30 land on the
// intended side.
inline std::size_t round_half_up(double x) {
  if (!(x > 0.0)) return 0;
  return static_cast<std::size_t>(std::floor(x + 0.5 + 1e-9));
}

}  // namespace reprindt
