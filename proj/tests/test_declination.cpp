#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <vector>

#include "declin/declination.hpp"
#include "support/synthetic.hpp"

using namespace declin;
namespace ts = declin::testsupport;

namespace {

// Distributions where both parties win at least one seat.
std::vector<double> competitive_shares(std::mt19937_64& rng) {
  while (true) {
    auto shares = ts::random_shares(rng, ts::uniform_int(rng, 2, 40));
    const auto split = seat_split(validate_distribution(shares));
    if (split.dem > 0 && split.rep > 0) return shares;
  }
}

}  // namespace

TEST_CASE("declination of the hand-derived four-district case", "[declination]") {
  const auto d = validate_distribution(std::vector<double>{0.4, 0.45, 0.6, 0.8});
  const auto result = declination(d);

  // Centroids F=(0.25, 0.425), H=(0.75, 0.7) around G=(0.5, 0.5) give
  // segment slopes 0.3 and 0.8.
  const double oracle = (2.0 / std::numbers::pi) * (std::atan(0.8) - std::atan(0.3));
  REQUIRE(result.delta == Catch::Approx(oracle).margin(1e-12));
  REQUIRE(result.delta == Catch::Approx(0.244006).margin(1e-6));
  REQUIRE(result.k == 2);
  REQUIRE(result.f_point.x == Catch::Approx(0.25).margin(1e-12));
  REQUIRE(result.f_point.y == Catch::Approx(0.425).margin(1e-12));
  REQUIRE(result.g_point.x == Catch::Approx(0.5).margin(1e-12));
  REQUIRE(result.g_point.y == 0.5);
  REQUIRE(result.h_point.x == Catch::Approx(0.75).margin(1e-12));
  REQUIRE(result.h_point.y == Catch::Approx(0.7).margin(1e-12));
}

TEST_CASE("declination vanishes for a symmetric distribution", "[declination]") {
  const auto d = validate_distribution(std::vector<double>{0.3, 0.4, 0.6, 0.7});
  REQUIRE(std::abs(declination(d).delta) < 1e-12);
  REQUIRE(std::abs(s_declination(d)) < 1e-12);
}

TEST_CASE("declination is undefined when one party sweeps", "[declination]") {
  REQUIRE_THROWS_AS(declination(validate_distribution(std::vector<double>{0.6, 0.7})),
                    UndefinedDeclination);
  REQUIRE_THROWS_AS(declination(validate_distribution(std::vector<double>{0.2, 0.3})),
                    UndefinedDeclination);
  REQUIRE_THROWS_AS(s_declination(validate_distribution(std::vector<double>{0.5, 0.5})),
                    UndefinedDeclination);
}

TEST_CASE("party swap negates the declination", "[declination]") {
  std::mt19937_64 rng(101);
  for (int trial = 0; trial < 200; ++trial) {
    const auto d = validate_distribution(competitive_shares(rng));
    const double forward = declination(d).delta;
    const double swapped = declination(reflected(d)).delta;
    REQUIRE(std::abs(forward + swapped) < 1e-12);
  }
}

TEST_CASE("declination stays inside (-1, 1)", "[declination]") {
  std::mt19937_64 rng(102);
  for (int trial = 0; trial < 200; ++trial) {
    const auto d = validate_distribution(competitive_shares(rng));
    const double delta = declination(d).delta;
    REQUIRE(delta > -1.0);
    REQUIRE(delta < 1.0);
  }
}

TEST_CASE("centroid abscissas sit at k/2N and (N+k)/2N", "[declination]") {
  std::mt19937_64 rng(103);
  for (int trial = 0; trial < 100; ++trial) {
    const auto d = validate_distribution(competitive_shares(rng));
    const auto result = declination(d);
    const double n = result.n;
    REQUIRE(result.f_point.x == Catch::Approx(result.k / (2.0 * n)).margin(1e-12));
    REQUIRE(result.h_point.x == Catch::Approx((n + result.k) / (2.0 * n)).margin(1e-12));
  }
}

TEST_CASE("s_declination scales delta by 5N/12", "[declination]") {
  std::mt19937_64 rng(104);
  for (int trial = 0; trial < 100; ++trial) {
    const auto d = validate_distribution(competitive_shares(rng));
    const auto result = declination(d);
    REQUIRE(result.s_declination ==
            kSeatScalePerDistrict * result.n * result.delta);
  }
}

TEST_CASE("round_seats rounds to nearest with ties away from zero", "[declination]") {
  REQUIRE(round_seats(2.925) == 3);
  REQUIRE(round_seats(-0.4) == 0);
  REQUIRE(round_seats(0.5) == 1);
  REQUIRE(round_seats(-0.5) == -1);
  REQUIRE(round_seats(2.5) == 3);
  REQUIRE(round_seats(-2.5) == -3);
}

TEST_CASE("state_seat_estimate rounds the S-declination", "[declination]") {
  std::mt19937_64 rng(105);
  for (int trial = 0; trial < 100; ++trial) {
    const auto d = validate_distribution(competitive_shares(rng));
    const double s = s_declination(d);
    const int estimate = state_seat_estimate(d);
    REQUIRE(estimate == round_seats(s));
    REQUIRE(std::abs(estimate - s) <= 0.5);
  }
}

TEST_CASE("sweep states contribute a zero seat estimate", "[declination]") {
  REQUIRE(state_seat_estimate(validate_distribution(std::vector<double>{0.6, 0.7, 0.9})) == 0);
  REQUIRE(state_seat_estimate(validate_distribution(std::vector<double>{0.1, 0.2})) == 0);
}

TEST_CASE("net_seats_by_year sums rounded estimates per year", "[declination]") {
  StateYearRecord symmetric;
  symmetric.state = "AA";
  symmetric.year = 2000;
  for (double s : {0.3, 0.4, 0.6, 0.7}) symmetric.districts.push_back({s, {}, Incumbency::OpenOrMixed, false});

  StateYearRecord sweep;
  sweep.state = "BB";
  sweep.year = 2000;
  for (double s : {0.6, 0.7, 0.8}) sweep.districts.push_back({s, {}, Incumbency::OpenOrMixed, false});

  StateYearRecord skewed;
  skewed.state = "AA";
  skewed.year = 2002;
  for (double s : {0.37, 0.40, 0.43, 0.46, 0.60, 0.63, 0.66, 0.69, 0.72, 0.75}) {
    skewed.districts.push_back({s, {}, Incumbency::OpenOrMixed, false});
  }

  const std::vector<StateYearRecord> records{symmetric, sweep, skewed};
  const auto table = net_seats_by_year(records);

  REQUIRE(table.net_seats.size() == 2);
  REQUIRE(table.net_seats.at(2000) == 0);
  REQUIRE(table.net_seats.at(2002) ==
          state_seat_estimate(skewed.distribution()));
}
