#include "gsw/rng.hpp"

#include <cmath>
#include <numbers>

namespace gsw {

double RandomStream::next_normal() {
    double u1 = next_open_double();
    double u2 = next_double();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace gsw
