// Computes the declination and its seat-denominated scaling for a small
// hypothetical election.

#include <cstdio>

#include "declin/declination.hpp"

int main() {
  const double shares[] = {0.37, 0.40, 0.43, 0.46, 0.60, 0.63, 0.66, 0.69, 0.72, 0.75};
  const auto distribution = declin::validate_distribution(shares);

  const auto split = declin::seat_split(distribution);
  const auto result = declin::declination(distribution);

  std::printf("districts: %d (dem %d, rep %d)\n", result.n, split.dem, split.rep);
  std::printf("delta: %.4f\n", result.delta);
  std::printf("S-declination: %.4f seats\n", result.s_declination);
  std::printf("rounded seat estimate: %d\n", declin::state_seat_estimate(distribution));
  return 0;
}
