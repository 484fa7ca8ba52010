#pragma once

// Ensemble experiments built on the sweep engine: S-declination response to
// simulated packing and cracking, the logistic seat model's response to the
// same perturbations, and presidential-versus-legislative share fits.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "declin/core.hpp"
#include "declin/declination.hpp"
#include "declin/regress.hpp"
#include "declin/spc.hpp"

namespace declin {

class EmptyEnsemble final : public Error {
 public:
  using Error::Error;
};

enum class LinkChoice { Identity, Fitted };

inline const char* to_string(LinkChoice link) noexcept {
  return link == LinkChoice::Identity ? "identity" : "fitted";
}

// ---------------------------------------------------------------------------
// S-declination sweeps

/// One sweep per (threshold, strategy) setting, each covering all four
/// pack/crack-by-beneficiary variants with the S-declination as the metric.
inline std::vector<SweepReport> declination_sweep(std::span<const StateYearRecord> records,
                                                  std::span<const double> thresholds,
                                                  std::span<const SpcStrategy> strategies) {
  const MetricFn metric = [](const StateYearRecord&, const ElectionDistribution& d) {
    return s_declination(d);
  };
  std::vector<SweepReport> reports;
  for (double threshold : thresholds) {
    for (SpcStrategy strategy : strategies) {
      SweepReport report =
          spc_sweep(records, all_variants(threshold, strategy), metric,
                    std::string("s-declination threshold=") + std::to_string(threshold) +
                        " strategy=" + to_string(strategy));
      reports.push_back(std::move(report));
    }
  }
  return reports;
}

// ---------------------------------------------------------------------------
// Logistic-model sensitivity sweeps

/// Change in the expected republican seat count under the logistic model,
/// for every variant at the default threshold and strategy. State-years
/// whose year has no coefficients are skipped. With LinkChoice::Identity the
/// legislative share feeds the logistic directly; with Fitted it passes
/// through the year's linear link first.
inline SweepReport sensitivity_sweep(std::span<const StateYearRecord> records,
                                     std::span<const YearCoefficients> coefficients,
                                     LinkChoice link) {
  std::map<int, YearCoefficients> by_year;
  for (const auto& c : coefficients) {
    by_year[c.year] = link == LinkChoice::Identity ? identity_link(c) : c;
  }

  std::vector<StateYearRecord> covered;
  for (const auto& record : records) {
    if (by_year.contains(record.year)) covered.push_back(record);
  }

  // Negated expected democratic seats, so that delta = E(before) - E(after),
  // the expected change in republican seats; positive matches a
  // pro-republican flip.
  const MetricFn metric = [&by_year](const StateYearRecord& record,
                                     const ElectionDistribution& d) {
    const YearCoefficients& c = by_year.at(record.year);
    double total = 0.0;
    for (double l : d.shares()) {
      total += logistic_cdf(c.beta0 + c.beta1 * link_g(l, c));
    }
    return -total;
  };

  return spc_sweep(covered, all_variants(), metric,
                   std::string("expected-seats link=") + to_string(link));
}

/// Median absolute metric change over the successful cases of one year's
/// sensitivity sweep. Throws EmptyEnsemble when no case succeeds.
inline double median_abs_sensitivity(std::span<const StateYearRecord> records,
                                     std::span<const YearCoefficients> coefficients,
                                     LinkChoice link, int year) {
  std::vector<StateYearRecord> subset;
  for (const auto& record : records) {
    if (record.year == year) subset.push_back(record);
  }
  const SweepReport report = sensitivity_sweep(subset, coefficients, link);
  std::vector<double> magnitudes;
  for (const auto& c : report.cases) {
    if (c.status == SweepStatus::Ok) magnitudes.push_back(std::abs(c.delta_metric));
  }
  if (magnitudes.empty()) {
    throw EmptyEnsemble("no successful perturbation for year " + std::to_string(year));
  }
  std::sort(magnitudes.begin(), magnitudes.end());
  return median(magnitudes);
}

// ---------------------------------------------------------------------------
// Plot-export jitter

/// Deterministic horizontal jitter (+-0.4 district) for plot exports, pinned
/// to `seed` and the stored case order. Summary statistics never read
/// plot_x, so jitter cannot corrupt them.
inline void apply_plot_jitter(SweepReport& report, std::uint64_t seed) {
  std::uint64_t state = seed ^ 0x9e3779b97f4a7c15ull;
  auto next_unit = [&state]() {
    // splitmix64 step, mapped to [0,1)
    state += 0x9e3779b97f4a7c15ull;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    z ^= z >> 31;
    return static_cast<double>(z >> 11) * 0x1.0p-53;
  };
  for (auto& c : report.cases) {
    c.plot_x = static_cast<double>(c.n) + (next_unit() * 0.8 - 0.4);
  }
}

// ---------------------------------------------------------------------------
// Interval comparison

/// Fraction of the shorter interval covered by the intersection; 1 when one
/// interval contains the other, 0 when they are disjoint.
inline double interval_overlap_fraction(std::pair<double, double> a,
                                        std::pair<double, double> b) {
  const double lo = std::max(a.first, b.first);
  const double hi = std::min(a.second, b.second);
  if (hi <= lo) return 0.0;
  const double shorter = std::min(a.second - a.first, b.second - b.first);
  if (shorter <= 0.0) return 0.0;
  return (hi - lo) / shorter;
}

// ---------------------------------------------------------------------------
// Presidential-versus-legislative fits

struct LabeledSharePoint {
  double legislative = 0.0;
  double presidential = 0.0;
  Incumbency incumbency = Incumbency::OpenOrMixed;
};

struct PresLegFit {
  OlsFit fit;
  std::vector<LabeledSharePoint> points;
};

/// OLS of presidential share on legislative share over contested districts
/// carrying both values, pooled over `years` (all years when empty). Points
/// keep their incumbency class for labeled exports.
inline PresLegFit pres_vs_leg_fit(std::span<const StateYearRecord> records,
                                  std::span<const int> years = {}) {
  PresLegFit result;
  for (const auto& record : records) {
    if (!years.empty() &&
        std::find(years.begin(), years.end(), record.year) == years.end()) {
      continue;
    }
    for (const auto& district : record.districts) {
      if (district.imputed || !district.pres_dem_share.has_value()) continue;
      result.points.push_back(
          {district.dem_share, *district.pres_dem_share, district.incumbency});
    }
  }
  std::vector<PlotPoint> pts;
  pts.reserve(result.points.size());
  for (const auto& p : result.points) pts.push_back({p.legislative, p.presidential});
  result.fit = ols(pts);
  return result;
}

}  // namespace declin
