#pragma once

// Simulated packing and cracking: perturb a vote distribution so that
// exactly one district flips to the beneficiary party, redistributing the
// displaced vote share under fixed conventions.
//
// The pro-republican kernel is written once; pro-democratic requests run it
// on the party-swapped distribution and map the outcome back. Cracking
// spreads the displaced votes over the beneficiary's won districts up to the
// competitiveness threshold; packing spreads them over the flipped party's
// remaining districts up to the physical cap of 1.

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "declin/core.hpp"
#include "declin/regress.hpp"

namespace declin {

enum class Party { Republicans, Democrats };
enum class SpcMethod { Pack, Crack };
enum class SpcStrategy { Even, Greedy };

inline const char* to_string(Party p) noexcept {
  return p == Party::Republicans ? "republicans" : "democrats";
}
inline const char* to_string(SpcMethod m) noexcept {
  return m == SpcMethod::Pack ? "pack" : "crack";
}
inline const char* to_string(SpcStrategy s) noexcept {
  return s == SpcStrategy::Even ? "even" : "greedy";
}

enum class SpcFailure {
  NotEnoughRoom,       // displaced votes left over with every recipient full
  ConstraintViolated,  // seat-count precondition or recipient minimum failed
  NoFlippableDistrict  // the beneficiary already holds every seat
};

inline const char* to_string(SpcFailure f) noexcept {
  switch (f) {
    case SpcFailure::NotEnoughRoom: return "not-enough-room";
    case SpcFailure::ConstraintViolated: return "constraint-violated";
    case SpcFailure::NoFlippableDistrict: return "no-flippable-district";
  }
  return "constraint-violated";
}

class SpcError final : public Error {
 public:
  SpcError(SpcFailure kind, const std::string& what_arg)
      : Error(what_arg), kind_(kind) {}

  SpcFailure kind() const noexcept { return kind_; }

 private:
  SpcFailure kind_;
};

struct SpcRequest {
  Party beneficiary = Party::Republicans;
  SpcMethod method = SpcMethod::Crack;
  double threshold = 0.45;  // max share of the flipped party in new opponent districts
  SpcStrategy strategy = SpcStrategy::Even;
  int min_recipients = 3;
};

struct SpcOutcome {
  ElectionDistribution result;  // re-sorted ascending
  int flipped_index = 0;        // position of the flipped district in the input order
  double flipped_share_after = 0.0;
  OlsFit regression;            // trend over the beneficiary's districts, input coordinates
  int iterations = 0;           // spread passes (even) or recipients filled (greedy)
};

namespace detail {

// Spreads `excess` evenly over the pool, clamping anyone pushed past `cap`
// and re-spreading the overflow across the recipients still strictly below
// the cap. Ends in at most one pass per recipient.
inline int distribute_evenly(std::vector<double>& shares, std::span<const int> pool,
                             double cap, double excess) {
  int passes = 0;
  std::vector<int> below;
  below.reserve(pool.size());
  while (excess > kShareTolerance) {
    below.clear();
    for (int i : pool) {
      if (shares[static_cast<std::size_t>(i)] < cap - kShareTolerance) below.push_back(i);
    }
    if (below.empty()) {
      throw SpcError(SpcFailure::NotEnoughRoom,
                     "displaced votes remain but every recipient district is full");
    }
    const double per_district = excess / static_cast<double>(below.size());
    excess = 0.0;
    for (int i : below) {
      double& share = shares[static_cast<std::size_t>(i)];
      share += per_district;
      if (share > cap) {
        excess += share - cap;
        share = cap;
      }
    }
    ++passes;
  }
  return passes;
}

// Fills recipients one at a time, most lopsided first, each up to `cap`.
inline int distribute_greedily(std::vector<double>& shares, std::span<const int> pool,
                               double cap, double excess) {
  std::vector<int> order(pool.begin(), pool.end());
  std::stable_sort(order.begin(), order.end(), [&shares](int a, int b) {
    return std::abs(shares[static_cast<std::size_t>(a)] - 0.5) >
           std::abs(shares[static_cast<std::size_t>(b)] - 0.5);
  });
  int filled = 0;
  for (int i : order) {
    if (excess <= kShareTolerance) break;
    double& share = shares[static_cast<std::size_t>(i)];
    const double room = cap - share;
    if (room <= kShareTolerance) continue;
    const double take = std::min(room, excess);
    share += take;
    excess -= take;
    ++filled;
  }
  if (excess > kShareTolerance) {
    throw SpcError(SpcFailure::NotEnoughRoom,
                   "displaced votes remain but every recipient district is full");
  }
  return filled;
}

// The kernel, stated for a republican-benefiting gerrymander.
inline SpcOutcome spc_pro_republican(const ElectionDistribution& d, const SpcRequest& req) {
  const auto& input = d.shares();
  const int n = d.size();

  int first_dem = 0;
  while (first_dem < n && !democrats_win(input[static_cast<std::size_t>(first_dem)])) {
    ++first_dem;
  }
  const int rep_count = first_dem;
  const int dem_count = n - first_dem;

  if (dem_count == 0) {
    throw SpcError(SpcFailure::NoFlippableDistrict,
                   "Republicans already hold every seat");
  }
  if (rep_count == 0) {
    throw SpcError(SpcFailure::ConstraintViolated,
                   "each party must win at least one seat before the flip");
  }
  if (dem_count < 2) {
    throw SpcError(SpcFailure::ConstraintViolated,
                   "the flip would leave the Democrats without a seat");
  }
  if (rep_count < 2) {
    throw SpcError(SpcFailure::ConstraintViolated,
                   "the trend line needs at least two republican districts");
  }

  // The flipped district is the democratic district won by the narrowest
  // margin; sorted order makes that the first democratic entry, which also
  // resolves ties toward the lowest index.
  const int flip = first_dem;

  std::vector<PlotPoint> rep_points;
  rep_points.reserve(static_cast<std::size_t>(rep_count));
  for (int i = 0; i < rep_count; ++i) {
    rep_points.push_back({district_abscissa(static_cast<std::size_t>(i),
                                            static_cast<std::size_t>(n)),
                          input[static_cast<std::size_t>(i)]});
  }
  const OlsFit trend = ols(rep_points);

  // New value for the flipped district: the republican trend evaluated at
  // its abscissa, capped at the competitiveness threshold and floored at 0.
  const double predicted = trend.predict(
      district_abscissa(static_cast<std::size_t>(flip), static_cast<std::size_t>(n)));
  const double new_value = std::clamp(predicted, 0.0, req.threshold);

  // Recipients. Cracking sends the displaced democratic votes into
  // republican districts capped at the threshold; packing sends them into
  // the districts the Democrats keep, capped at 1. Districts already past
  // the cap stay in the pool but never receive votes.
  std::vector<int> pool;
  double cap = 0.0;
  if (req.method == SpcMethod::Crack) {
    cap = req.threshold;
    for (int i = 0; i < rep_count; ++i) pool.push_back(i);
  } else {
    cap = 1.0;
    for (int i = first_dem; i < n; ++i) {
      if (i != flip) pool.push_back(i);
    }
  }
  if (static_cast<int>(pool.size()) < req.min_recipients) {
    throw SpcError(SpcFailure::ConstraintViolated,
                   "fewer recipient districts than the required minimum");
  }

  std::vector<double> shares = input;
  const double excess = shares[static_cast<std::size_t>(flip)] - new_value;
  shares[static_cast<std::size_t>(flip)] = new_value;

  SpcOutcome outcome{
      .result = d,  // placeholder, replaced below
      .flipped_index = flip,
      .flipped_share_after = new_value,
      .regression = trend,
      .iterations = 0,
  };
  outcome.iterations = req.strategy == SpcStrategy::Even
                           ? distribute_evenly(shares, pool, cap, excess)
                           : distribute_greedily(shares, pool, cap, excess);
  outcome.result = validate_distribution(shares);
  return outcome;
}

}  // namespace detail

/// Applies one simulated packing or cracking to `d`, flipping exactly one
/// district to `req.beneficiary`. The result conserves the mean share and
/// moves each party's seat count by exactly one. Throws SpcError when the
/// request cannot be satisfied and std::invalid_argument on a malformed
/// request.
inline SpcOutcome spc(const ElectionDistribution& d, const SpcRequest& req) {
  if (!(req.threshold > 0.0 && req.threshold < 0.5)) {
    throw std::invalid_argument("threshold must lie in (0, 0.5)");
  }
  if (req.min_recipients < 1) {
    throw std::invalid_argument("min_recipients must be at least 1");
  }

  if (req.beneficiary == Party::Republicans) {
    return detail::spc_pro_republican(d, req);
  }

  // Pro-democratic requests run the kernel on the party-swapped
  // distribution, then map the outcome back into original coordinates.
  const int n = d.size();
  SpcOutcome swapped = detail::spc_pro_republican(reflected(d), req);
  SpcOutcome outcome{
      .result = reflected(swapped.result),
      .flipped_index = n - 1 - swapped.flipped_index,
      .flipped_share_after = 1.0 - swapped.flipped_share_after,
      .regression = swapped.regression,
      .iterations = swapped.iterations,
  };
  // A line y' = a + b x' over swapped coordinates (x' = 1-x, y' = 1-y) is
  // y = (1 - a - b) + b x in the original frame.
  outcome.regression.intercept = 1.0 - swapped.regression.intercept - swapped.regression.slope;
  return outcome;
}

// ---------------------------------------------------------------------------
// Ensemble sweeps

enum class SweepStatus { Ok, NotEnoughRoom, ConstraintViolated };

inline const char* to_string(SweepStatus s) noexcept {
  switch (s) {
    case SweepStatus::Ok: return "ok";
    case SweepStatus::NotEnoughRoom: return "not-enough-room";
    case SweepStatus::ConstraintViolated: return "constraint-violated";
  }
  return "constraint-violated";
}

struct SweepCase {
  std::string state;
  int year = 0;
  int n = 0;
  SpcRequest request;
  SweepStatus status = SweepStatus::ConstraintViolated;
  double delta_metric = 0.0;  // meaningful only when status == Ok
  double plot_x = 0.0;        // n, optionally jittered for plot exports
};

struct DirectionSummary {
  int count_ok = 0;
  std::optional<std::pair<double, double>> central_95;  // empirical 2.5%/97.5%
  std::optional<OlsFit> delta_vs_n;
};

struct SweepReport {
  std::string metric_label;
  int eligible_state_years = 0;
  int total_cases = 0;
  int ok_cases = 0;
  int not_enough_room = 0;
  int constraint_violated = 0;
  std::vector<SweepCase> cases;  // sorted by state, year, request order
  DirectionSummary pro_republican;
  DirectionSummary pro_democratic;
};

/// Metric evaluated before and after each perturbation. The record supplies
/// year context for year-dependent metrics; the distribution is the one to
/// score.
using MetricFn = std::function<double(const StateYearRecord&, const ElectionDistribution&)>;

namespace detail {

inline DirectionSummary summarize_direction(std::span<const SweepCase> cases, Party direction) {
  DirectionSummary summary;
  std::vector<double> deltas;
  std::vector<PlotPoint> by_n;
  for (const auto& c : cases) {
    if (c.request.beneficiary != direction || c.status != SweepStatus::Ok) continue;
    deltas.push_back(c.delta_metric);
    by_n.push_back({static_cast<double>(c.n), c.delta_metric});
  }
  summary.count_ok = static_cast<int>(deltas.size());
  if (!deltas.empty()) {
    std::sort(deltas.begin(), deltas.end());
    summary.central_95 = std::make_pair(quantile(deltas, 0.025), quantile(deltas, 0.975));
  }
  if (by_n.size() >= 2) {
    try {
      summary.delta_vs_n = ols(by_n);
    } catch (const DegenerateDesign&) {
      // single district count in the ensemble; leave the line absent
    }
  }
  return summary;
}

}  // namespace detail

/// Runs every request against every eligible state-year and records the
/// change in `metric`. A state-year is eligible when it has at least five
/// districts and each party wins at least one seat; individual requests may
/// still fail and are recorded under their failure category rather than
/// raised. Output is deterministic: cases are ordered by state, year, then
/// request order.
inline SweepReport spc_sweep(std::span<const StateYearRecord> records,
                             std::span<const SpcRequest> requests,
                             const MetricFn& metric,
                             std::string metric_label) {
  SweepReport report;
  report.metric_label = std::move(metric_label);

  std::vector<const StateYearRecord*> ordered;
  ordered.reserve(records.size());
  for (const auto& r : records) ordered.push_back(&r);
  std::sort(ordered.begin(), ordered.end(),
            [](const StateYearRecord* a, const StateYearRecord* b) {
              return std::tie(a->state, a->year) < std::tie(b->state, b->year);
            });

  for (const StateYearRecord* record : ordered) {
    const ElectionDistribution before = record->distribution();
    const auto split = seat_split(before);
    if (before.size() < 5 || split.dem == 0 || split.rep == 0) continue;
    ++report.eligible_state_years;
    const double metric_before = metric(*record, before);

    for (const auto& request : requests) {
      SweepCase entry;
      entry.state = record->state;
      entry.year = record->year;
      entry.n = before.size();
      entry.request = request;
      entry.plot_x = static_cast<double>(entry.n);
      try {
        const SpcOutcome outcome = spc(before, request);
        entry.status = SweepStatus::Ok;
        entry.delta_metric = metric(*record, outcome.result) - metric_before;
        ++report.ok_cases;
      } catch (const SpcError& err) {
        entry.status = err.kind() == SpcFailure::NotEnoughRoom
                           ? SweepStatus::NotEnoughRoom
                           : SweepStatus::ConstraintViolated;
        if (entry.status == SweepStatus::NotEnoughRoom) {
          ++report.not_enough_room;
        } else {
          ++report.constraint_violated;
        }
      }
      ++report.total_cases;
      report.cases.push_back(std::move(entry));
    }
  }

  report.pro_republican = detail::summarize_direction(report.cases, Party::Republicans);
  report.pro_democratic = detail::summarize_direction(report.cases, Party::Democrats);
  return report;
}

/// The four pack/crack-by-beneficiary combinations at one threshold and
/// strategy, in a fixed order.
inline std::vector<SpcRequest> all_variants(double threshold = 0.45,
                                            SpcStrategy strategy = SpcStrategy::Even,
                                            int min_recipients = 3) {
  std::vector<SpcRequest> requests;
  for (Party beneficiary : {Party::Republicans, Party::Democrats}) {
    for (SpcMethod method : {SpcMethod::Pack, SpcMethod::Crack}) {
      requests.push_back({beneficiary, method, threshold, strategy, min_recipients});
    }
  }
  return requests;
}

}  // namespace declin
