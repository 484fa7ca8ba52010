#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <vector>

#include "declin/declination.hpp"
#include "declin/spc.hpp"
#include "support/synthetic.hpp"

using namespace declin;
namespace ts = declin::testsupport;

namespace {

const std::vector<double> kTenDistricts{0.37, 0.40, 0.43, 0.46, 0.60,
                                        0.63, 0.66, 0.69, 0.72, 0.75};

void require_shares(const ElectionDistribution& got, const std::vector<double>& want,
                    double margin = 1e-12) {
  REQUIRE(got.shares().size() == want.size());
  for (std::size_t i = 0; i < want.size(); ++i) {
    INFO("index " << i);
    REQUIRE(got.shares()[i] == Catch::Approx(want[i]).margin(margin));
  }
}

}  // namespace

TEST_CASE("cracking the ten-district election for the Republicans", "[spc]") {
  const auto before = validate_distribution(kTenDistricts);
  const auto outcome = spc(before, SpcRequest{});

  require_shares(outcome.result,
                 {0.45, 0.45, 0.45, 0.45, 0.46, 0.63, 0.66, 0.69, 0.72, 0.75});
  REQUIRE(outcome.flipped_index == 4);
  REQUIRE(outcome.flipped_share_after == Catch::Approx(0.45).margin(1e-12));
  REQUIRE(outcome.regression.intercept == Catch::Approx(0.355).margin(1e-12));
  REQUIRE(outcome.regression.slope == Catch::Approx(0.3).margin(1e-12));
  REQUIRE(outcome.iterations == 2);

  // The trend line predicts 0.49 for the flipped district, past the
  // threshold, so the value is clamped.
  const double predicted = outcome.regression.predict(district_abscissa(4, 10));
  REQUIRE(predicted == Catch::Approx(0.49).margin(1e-12));
  REQUIRE(predicted > 0.45);
}

TEST_CASE("cracking with no clamping iteration", "[spc]") {
  const auto before = validate_distribution(std::vector<double>{0.10, 0.20, 0.30, 0.55, 0.9});
  const auto outcome = spc(before, SpcRequest{});

  // Trend over (0.1,0.1),(0.3,0.2),(0.5,0.3) is 0.05 + 0.5x, predicting 0.40
  // at the flipped abscissa 0.7; the displaced 0.15 spreads evenly.
  require_shares(outcome.result, {0.15, 0.25, 0.35, 0.40, 0.9});
  REQUIRE(outcome.flipped_index == 3);
  REQUIRE(outcome.flipped_share_after == Catch::Approx(0.40).margin(1e-12));
  REQUIRE(outcome.regression.intercept == Catch::Approx(0.05).margin(1e-12));
  REQUIRE(outcome.regression.slope == Catch::Approx(0.5).margin(1e-12));
  REQUIRE(outcome.iterations == 1);
}

TEST_CASE("cracking fails when every recipient is already at the threshold", "[spc]") {
  const auto before = validate_distribution(std::vector<double>{0.45, 0.45, 0.45, 0.55, 0.9});
  try {
    spc(before, SpcRequest{});
    FAIL("expected SpcError");
  } catch (const SpcError& err) {
    REQUIRE(err.kind() == SpcFailure::NotEnoughRoom);
  }
}

TEST_CASE("cracking for the Democrats mirrors the kernel", "[spc]") {
  const auto before = validate_distribution(
      std::vector<double>{0.25, 0.28, 0.31, 0.45, 0.56, 0.60, 0.66, 0.70});
  const auto outcome =
      spc(before, SpcRequest{.beneficiary = Party::Democrats, .method = SpcMethod::Crack});

  // Hand-run of the swapped kernel: flip the 0.45 district to 0.55, pull the
  // democratic districts down toward 0.55 with one clamping pass.
  require_shares(outcome.result, {0.25, 0.28, 0.31, 0.55, 0.55, 0.57, 0.63, 0.67});
  REQUIRE(outcome.flipped_index == 3);
  REQUIRE(outcome.flipped_share_after == Catch::Approx(0.55).margin(1e-12));
  REQUIRE(outcome.regression.intercept == Catch::Approx(0.342).margin(1e-12));
  REQUIRE(outcome.regression.slope == Catch::Approx(0.384).margin(1e-12));
  REQUIRE(outcome.iterations == 2);

  const auto before_split = seat_split(before);
  const auto after_split = seat_split(outcome.result);
  REQUIRE(after_split.dem == before_split.dem + 1);
  REQUIRE(after_split.rep == before_split.rep - 1);
}

TEST_CASE("packing for the Republicans sends votes into kept democratic districts",
          "[spc]") {
  const auto before = validate_distribution(
      std::vector<double>{0.30, 0.40, 0.44, 0.55, 0.60, 0.70, 0.80});

  SECTION("even spread") {
    const auto outcome = spc(before, SpcRequest{.method = SpcMethod::Pack});
    require_shares(outcome.result,
                   {0.30, 0.40, 0.44, 0.45, 0.60 + 0.1 / 3, 0.70 + 0.1 / 3, 0.80 + 0.1 / 3});
    REQUIRE(outcome.flipped_index == 3);
    REQUIRE(outcome.flipped_share_after == Catch::Approx(0.45).margin(1e-12));
    REQUIRE(outcome.regression.intercept == Catch::Approx(0.275).margin(1e-12));
    REQUIRE(outcome.regression.slope == Catch::Approx(0.49).margin(1e-12));
    REQUIRE(outcome.iterations == 1);
  }

  SECTION("greedy fill saturates the most lopsided district first") {
    const auto outcome =
        spc(before, SpcRequest{.method = SpcMethod::Pack, .strategy = SpcStrategy::Greedy});
    require_shares(outcome.result, {0.30, 0.40, 0.44, 0.45, 0.60, 0.70, 0.90});
    REQUIRE(outcome.iterations == 1);
  }
}

TEST_CASE("packing fails when the kept districts are saturated", "[spc]") {
  const auto before =
      validate_distribution(std::vector<double>{0.2, 0.3, 0.4, 0.55, 1.0, 1.0, 1.0});
  try {
    spc(before, SpcRequest{.method = SpcMethod::Pack});
    FAIL("expected SpcError");
  } catch (const SpcError& err) {
    REQUIRE(err.kind() == SpcFailure::NotEnoughRoom);
  }
}

TEST_CASE("spc failure taxonomy", "[spc]") {
  SECTION("beneficiary already sweeps") {
    try {
      spc(validate_distribution(std::vector<double>{0.1, 0.2, 0.3}), SpcRequest{});
      FAIL("expected SpcError");
    } catch (const SpcError& err) {
      REQUIRE(err.kind() == SpcFailure::NoFlippableDistrict);
    }
  }

  SECTION("other party sweeps, violating the pre-flip seat constraint") {
    try {
      spc(validate_distribution(std::vector<double>{0.6, 0.7, 0.8}), SpcRequest{});
      FAIL("expected SpcError");
    } catch (const SpcError& err) {
      REQUIRE(err.kind() == SpcFailure::ConstraintViolated);
    }
  }

  SECTION("flip would leave the losing party with no seat") {
    try {
      spc(validate_distribution(std::vector<double>{0.1, 0.2, 0.3, 0.4, 0.6}), SpcRequest{});
      FAIL("expected SpcError");
    } catch (const SpcError& err) {
      REQUIRE(err.kind() == SpcFailure::ConstraintViolated);
    }
  }

  SECTION("recipient pool below the minimum") {
    try {
      spc(validate_distribution(std::vector<double>{0.3, 0.4, 0.55, 0.6, 0.7}), SpcRequest{});
      FAIL("expected SpcError");
    } catch (const SpcError& err) {
      REQUIRE(err.kind() == SpcFailure::ConstraintViolated);
    }
  }

  SECTION("malformed requests are caller errors") {
    const auto d = validate_distribution(kTenDistricts);
    REQUIRE_THROWS_AS(spc(d, SpcRequest{.threshold = 0.6}), std::invalid_argument);
    REQUIRE_THROWS_AS(spc(d, SpcRequest{.threshold = 0.0}), std::invalid_argument);
    REQUIRE_THROWS_AS(spc(d, SpcRequest{.min_recipients = 0}), std::invalid_argument);
  }
}

TEST_CASE("successful spc conserves votes and flips exactly one seat", "[spc]") {
  std::mt19937_64 rng(2024);
  int successes = 0;
  for (int trial = 0; trial < 300; ++trial) {
    const auto before = validate_distribution(ts::random_shares(rng, ts::uniform_int(rng, 5, 40)));
    const auto before_split = seat_split(before);
    for (const auto& request : all_variants(0.45, trial % 2 == 0 ? SpcStrategy::Even
                                                                 : SpcStrategy::Greedy)) {
      try {
        const auto outcome = spc(before, request);
        ++successes;
        REQUIRE(std::abs(outcome.result.mean() - before.mean()) < 1e-12);

        const auto after_split = seat_split(outcome.result);
        const int gain = request.beneficiary == Party::Republicans
                             ? after_split.rep - before_split.rep
                             : after_split.dem - before_split.dem;
        REQUIRE(gain == 1);
        REQUIRE(after_split.dem + after_split.rep == before.size());
      } catch (const SpcError&) {
        // failures are exercised elsewhere
      }
    }
  }
  REQUIRE(successes > 200);
}

TEST_CASE("cracking never pushes a recipient past the threshold", "[spc]") {
  std::mt19937_64 rng(2025);
  const double threshold = 0.45;
  int checked = 0;
  for (int trial = 0; trial < 300; ++trial) {
    const auto before = validate_distribution(ts::random_shares(rng, ts::uniform_int(rng, 5, 30)));
    try {
      const auto outcome = spc(before, SpcRequest{.threshold = threshold});
      ++checked;
      // Republican-won districts that started at or below the threshold must
      // stay there; districts above it must be untouched.
      std::vector<double> above_before;
      for (double s : before.shares()) {
        if (!democrats_win(s) && s > threshold + kShareTolerance) above_before.push_back(s);
      }
      std::vector<double> above_after;
      for (double s : outcome.result.shares()) {
        if (!democrats_win(s) && s > threshold + kShareTolerance) above_after.push_back(s);
      }
      REQUIRE(above_after == above_before);
    } catch (const SpcError&) {
    }
  }
  REQUIRE(checked > 50);
}

TEST_CASE("spc mirror symmetry across the party swap", "[spc]") {
  std::mt19937_64 rng(2026);
  int checked = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const auto d = validate_distribution(ts::random_shares(rng, ts::uniform_int(rng, 6, 30)));
    for (SpcMethod method : {SpcMethod::Pack, SpcMethod::Crack}) {
      const SpcRequest pro_dem{.beneficiary = Party::Democrats, .method = method};
      const SpcRequest pro_rep{.beneficiary = Party::Republicans, .method = method};
      try {
        const auto direct = spc(d, pro_dem);
        const auto mirrored = spc(reflected(d), pro_rep);
        ++checked;
        const auto mapped = reflected(mirrored.result);
        REQUIRE(direct.result.shares().size() == mapped.shares().size());
        for (std::size_t i = 0; i < mapped.shares().size(); ++i) {
          REQUIRE(direct.result.shares()[i] ==
                  Catch::Approx(mapped.shares()[i]).margin(1e-12));
        }
        REQUIRE(direct.flipped_index == d.size() - 1 - mirrored.flipped_index);
      } catch (const SpcError&) {
      }
    }
  }
  REQUIRE(checked > 50);
}

TEST_CASE("redistribution ends within one pass per recipient", "[spc]") {
  std::mt19937_64 rng(2027);
  for (int trial = 0; trial < 200; ++trial) {
    const auto before = validate_distribution(ts::random_shares(rng, ts::uniform_int(rng, 5, 30)));
    const auto split = seat_split(before);
    try {
      const auto outcome = spc(before, SpcRequest{});
      REQUIRE(outcome.iterations >= 1);
      REQUIRE(outcome.iterations <= split.rep);
    } catch (const SpcError&) {
    }
  }
}

TEST_CASE("spc_sweep skips small or swept state-years", "[spc]") {
  StateYearRecord four_districts;
  four_districts.state = "AA";
  four_districts.year = 2000;
  for (double s : {0.3, 0.4, 0.6, 0.7}) {
    four_districts.districts.push_back({s, {}, Incumbency::OpenOrMixed, false});
  }

  StateYearRecord swept;
  swept.state = "BB";
  swept.year = 2000;
  for (double s : {0.55, 0.6, 0.65, 0.7, 0.75}) {
    swept.districts.push_back({s, {}, Incumbency::OpenOrMixed, false});
  }

  const std::vector<StateYearRecord> records{four_districts, swept};
  const auto requests = all_variants();
  const auto report = spc_sweep(
      records, requests,
      [](const StateYearRecord&, const ElectionDistribution& d) { return s_declination(d); },
      "s-declination");

  REQUIRE(report.eligible_state_years == 0);
  REQUIRE(report.total_cases == 0);
  REQUIRE(report.cases.empty());
}

TEST_CASE("spc_sweep on one symmetric ten-district state", "[spc]") {
  StateYearRecord record;
  record.state = "AA";
  record.year = 2000;
  for (double s : {0.30, 0.35, 0.40, 0.45, 0.48, 0.52, 0.55, 0.60, 0.65, 0.70}) {
    record.districts.push_back({s, {}, Incumbency::OpenOrMixed, false});
  }
  const std::vector<StateYearRecord> records{record};

  const auto requests = all_variants();
  const auto report = spc_sweep(
      records, requests,
      [](const StateYearRecord&, const ElectionDistribution& d) { return s_declination(d); },
      "s-declination");

  REQUIRE(report.eligible_state_years == 1);
  REQUIRE(report.total_cases == 4);
  REQUIRE(report.ok_cases == 4);
  for (const auto& entry : report.cases) {
    REQUIRE(entry.status == SweepStatus::Ok);
    const double expected_sign = entry.request.beneficiary == Party::Republicans ? 1.0 : -1.0;
    REQUIRE(entry.delta_metric * expected_sign > 0.5);
    REQUIRE(std::abs(entry.delta_metric) < 1.5);
  }
  // All four cases share one district count, so no line can be fit.
  REQUIRE_FALSE(report.pro_republican.delta_vs_n.has_value());
  REQUIRE(report.pro_republican.count_ok == 2);
  REQUIRE(report.pro_democratic.count_ok == 2);
}

TEST_CASE("spc_sweep bookkeeping partitions the case list", "[spc]") {
  const auto records = ts::ramp_ensemble(40, 31337, 2000, 5, 14);
  const auto report = spc_sweep(
      records, all_variants(),
      [](const StateYearRecord&, const ElectionDistribution& d) { return s_declination(d); },
      "s-declination");

  REQUIRE(report.total_cases == static_cast<int>(report.cases.size()));
  REQUIRE(report.ok_cases + report.not_enough_room + report.constraint_violated ==
          report.total_cases);
  REQUIRE(report.total_cases == report.eligible_state_years * 4);

  int ok = 0;
  for (const auto& entry : report.cases) {
    if (entry.status == SweepStatus::Ok) ++ok;
  }
  REQUIRE(ok == report.ok_cases);
  REQUIRE(report.pro_republican.count_ok + report.pro_democratic.count_ok == ok);
}
