#pragma once

// The declination angle and its seat-denominated scaling. The declination
// compares, for each party, the average winning margin against the fraction
// of seats won; geometrically it is the bend at the midpoint G between the
// centroids of the losing-side and winning-side point plots.

#include <cmath>
#include <map>
#include <numbers>
#include <span>
#include <vector>

#include "declin/core.hpp"

namespace declin {

/// Raised when one party wins every district, leaving the angle undefined.
class UndefinedDeclination final : public Error {
 public:
  using Error::Error;
};

/// Seats-per-district scaling applied to N*delta. Calibrated so that one
/// packed-or-cracked seat moves the scaled value by about one.
inline constexpr double kSeatScalePerDistrict = 5.0 / 12.0;

/// Earlier N*delta/2 scaling, kept only for comparison; it slightly
/// overcounts seats in large delegations and is not used by s_declination.
inline constexpr double kAlternativeSeatScalePerDistrict = 0.5;

struct DeclinationResult {
  double delta = 0.0;          // in (-1, 1); positive favors Republicans
  double s_declination = 0.0;  // (5N/12) * delta, in seats
  int n = 0;
  int k = 0;                   // districts the Democrats lose
  PlotPoint f_point;           // centroid of republican-won district points
  PlotPoint g_point;           // (k/N, 1/2)
  PlotPoint h_point;           // centroid of democratic-won district points
};

/// Computes the declination of a sorted distribution. Requires each party to
/// win at least one seat; throws UndefinedDeclination otherwise.
///
/// delta = 2/pi * (angle of G->H above horizontal - angle of F->G above
/// horizontal), each angle taken as the arctangent of the segment slope. The
/// x-spans k/(2N) and (N-k)/(2N) are strictly positive, so both slopes are
/// finite and no quadrant ambiguity arises.
inline DeclinationResult declination(const ElectionDistribution& d) {
  const auto& shares = d.shares();
  const int n = d.size();
  const auto split = seat_split(d);
  const int k = split.rep;
  if (k == 0 || k == n) {
    throw UndefinedDeclination("declination undefined: one party wins every seat");
  }

  // Sorted order puts the k republican-won districts first.
  double f_x = 0.0, f_y = 0.0, h_x = 0.0, h_y = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = district_abscissa(static_cast<std::size_t>(i),
                                       static_cast<std::size_t>(n));
    if (i < k) {
      f_x += x;
      f_y += shares[static_cast<std::size_t>(i)];
    } else {
      h_x += x;
      h_y += shares[static_cast<std::size_t>(i)];
    }
  }
  f_x /= k;
  f_y /= k;
  h_x /= n - k;
  h_y /= n - k;

  DeclinationResult result;
  result.n = n;
  result.k = k;
  result.f_point = {f_x, f_y};
  result.g_point = {static_cast<double>(k) / n, 0.5};
  result.h_point = {h_x, h_y};

  const double theta_fg =
      std::atan((result.g_point.y - f_y) / (result.g_point.x - f_x));
  const double theta_gh =
      std::atan((h_y - result.g_point.y) / (h_x - result.g_point.x));
  result.delta = (2.0 / std::numbers::pi) * (theta_gh - theta_fg);
  result.s_declination = kSeatScalePerDistrict * n * result.delta;
  return result;
}

/// (5N/12) * delta: the declination denominated in seats.
inline double s_declination(const ElectionDistribution& d) {
  return declination(d).s_declination;
}

/// Round to nearest with ties away from zero.
inline int round_seats(double s_decl) noexcept {
  return static_cast<int>(std::round(s_decl));
}

/// Rounded S-declination for one state-year; 0 when one party sweeps, so
/// sweep states simply do not contribute to yearly totals.
inline int state_seat_estimate(const ElectionDistribution& d) {
  const auto split = seat_split(d);
  if (split.dem == 0 || split.rep == 0) return 0;
  return round_seats(s_declination(d));
}

/// Yearly sums of rounded per-state S-declinations. Positive totals favor
/// Republicans.
struct NetSeatsTable {
  std::map<int, int> net_seats;
};

/// Adds up state_seat_estimate over every state present in each year. No
/// district-count or recipient-count filters apply here: the totals rely
/// only on actual vote distributions.
inline NetSeatsTable net_seats_by_year(std::span<const StateYearRecord> records) {
  NetSeatsTable table;
  for (const auto& record : records) {
    table.net_seats[record.year] += state_seat_estimate(record.distribution());
  }
  return table;
}

}  // namespace declin
