// Walks through one simulated cracking step: flips the narrowest democratic
// district to the Republicans and prints the redistribution trace.

#include <cstdio>

#include "declin/spc.hpp"

int main() {
  const double shares[] = {0.37, 0.40, 0.43, 0.46, 0.60, 0.63, 0.66, 0.69, 0.72, 0.75};
  const auto before = declin::validate_distribution(shares);

  declin::SpcRequest request;
  request.beneficiary = declin::Party::Republicans;
  request.method = declin::SpcMethod::Crack;

  const auto outcome = declin::spc(before, request);

  std::printf("flipped district index: %d (share %.2f -> %.2f)\n", outcome.flipped_index,
              before.shares()[static_cast<std::size_t>(outcome.flipped_index)],
              outcome.flipped_share_after);
  std::printf("republican trend line: %.4f + %.4f x\n", outcome.regression.intercept,
              outcome.regression.slope);
  std::printf("redistribution passes: %d\n", outcome.iterations);
  std::printf("result:");
  for (double s : outcome.result.shares()) std::printf(" %.4f", s);
  std::printf("\n");
  std::printf("mean before %.6f, after %.6f\n", before.mean(), outcome.result.mean());
  return 0;
}
