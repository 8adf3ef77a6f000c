#include "mpfb/rng.hpp"

#include <cmath>

#include "mpfb/types.hpp"

namespace mpfb {

double CounterRng::normal(std::uint64_t counter) const noexcept {
  // Shift u1 away from 0 so the log stays finite.
  const double u1 = 1.0 - uniform(counter);
  const double u2 = uniform(counter + 1);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
}

}  // namespace mpfb
