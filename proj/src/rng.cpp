#include "lidarsynth/rng.hpp"

#include <cmath>

namespace lidarsynth {

double Rng::normal(double mean, double sigma) {
  double u1 = next_double();
  const double u2 = next_double();
  if (u1 <= 0.0) u1 = 0x1.0p-53;
  const double mag = std::sqrt(-2.0 * std::log(u1));
  return mean + sigma * mag * std::cos(2.0 * M_PI * u2);
}

}  // namespace lidarsynth
