#include "eegpref/rng.hpp"

#include <cmath>
#include <numbers>

namespace eegpref {

double Rng64::next_gaussian() noexcept {
  // 1 - u keeps the log argument in (0, 1].
  const double u1 = 1.0 - next_unit();
  const double u2 = next_unit();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace eegpref
