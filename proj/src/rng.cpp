#include "mirrortrain/rng.hpp"

#include <cmath>

namespace mirrortrain {

double RngKey::gaussian(std::uint64_t counter) const {
    const double u1 = uniform(2 * counter);
    const double u2 = uniform(2 * counter + 1);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

}  // namespace mirrortrain
