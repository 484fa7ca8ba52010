#pragma once

// Core domain types for district-level two-party election returns: the
// validated vote-share sequence, its point-plot geometry, per-district
// records as read from data files, and per-year model coefficients.
//
// Everything here is immutable after construction and every operation is
// a pure function, so values may be shared across threads freely.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace declin {

/// Absolute tolerance for comparisons against 0.5 and competitiveness
/// thresholds. Redistribution arithmetic accumulates rounding, so exact
/// boundary comparisons would misclassify districts.
inline constexpr double kShareTolerance = 1e-12;

// ---------------------------------------------------------------------------
// Errors

/// Base class of every error thrown by this library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class EmptyInput final : public Error {
 public:
  using Error::Error;
};

/// A vote share outside [0,1]. `index` identifies the offending element for
/// in-memory input, or the line number for file input.
class ValueOutOfRange final : public Error {
 public:
  ValueOutOfRange(std::size_t index, const std::string& what_arg)
      : Error(what_arg), index_(index) {}

  std::size_t index() const noexcept { return index_; }

 private:
  std::size_t index_;
};

// ---------------------------------------------------------------------------
// Vote distributions

/// Did the Democrats win a district with this two-party share? A share of
/// exactly 0.5 (within tolerance) counts as a loss: a tie is not a win, and
/// one fixed convention keeps the loss count well defined.
inline bool democrats_win(double share) noexcept {
  return share > 0.5 + kShareTolerance;
}

/// A weakly increasing sequence of democratic two-party vote fractions, one
/// per district of a single state-year election. Construct through
/// validate_distribution().
class ElectionDistribution {
 public:
  const std::vector<double>& shares() const noexcept { return shares_; }
  int size() const noexcept { return static_cast<int>(shares_.size()); }

  double mean() const noexcept {
    double sum = 0.0;
    for (double s : shares_) sum += s;
    return sum / static_cast<double>(shares_.size());
  }

  friend ElectionDistribution validate_distribution(std::span<const double> raw);

 private:
  explicit ElectionDistribution(std::vector<double> sorted)
      : shares_(std::move(sorted)) {}

  std::vector<double> shares_;
};

/// Sorts `raw` ascending and checks every element lies in [0,1].
/// Throws EmptyInput or ValueOutOfRange (index refers to the input order).
inline ElectionDistribution validate_distribution(std::span<const double> raw) {
  if (raw.empty()) throw EmptyInput("vote distribution must have at least one district");
  for (std::size_t i = 0; i < raw.size(); ++i) {
    if (!(raw[i] >= 0.0 && raw[i] <= 1.0)) {
      throw ValueOutOfRange(i, "vote share at index " + std::to_string(i) +
                                   " is outside [0,1]: " + std::to_string(raw[i]));
    }
  }
  std::vector<double> sorted(raw.begin(), raw.end());
  std::sort(sorted.begin(), sorted.end());
  return ElectionDistribution(std::move(sorted));
}

struct SeatSplit {
  int dem = 0;
  int rep = 0;
};

/// Counts districts won by each party. Exactly-0.5 districts count as
/// republican (lost) districts.
inline SeatSplit seat_split(const ElectionDistribution& d) noexcept {
  SeatSplit split;
  for (double s : d.shares()) {
    if (democrats_win(s)) {
      ++split.dem;
    } else {
      ++split.rep;
    }
  }
  return split;
}

/// The party-swapped distribution: shares'[i] = 1 - shares[n-1-i]. Still
/// weakly increasing, so no re-sort is needed.
inline ElectionDistribution reflected(const ElectionDistribution& d) {
  std::vector<double> out(d.shares().size());
  const auto& s = d.shares();
  for (std::size_t i = 0; i < s.size(); ++i) {
    out[i] = 1.0 - s[s.size() - 1 - i];
  }
  return validate_distribution(out);
}

// ---------------------------------------------------------------------------
// Point-plot geometry

/// One plotted district: x is the district abscissa on (0,1), y a vote share.
struct PlotPoint {
  double x = 0.0;
  double y = 0.0;
};

/// Abscissa of district `index` (0-based) among `n`: (index + 1/2) / n.
inline double district_abscissa(std::size_t index, std::size_t n) noexcept {
  return (static_cast<double>(index) + 0.5) / static_cast<double>(n);
}

inline std::vector<PlotPoint> plot_points(const ElectionDistribution& d) {
  std::vector<PlotPoint> pts;
  pts.reserve(d.shares().size());
  for (std::size_t i = 0; i < d.shares().size(); ++i) {
    pts.push_back({district_abscissa(i, d.shares().size()), d.shares()[i]});
  }
  return pts;
}

// ---------------------------------------------------------------------------
// Per-district records

enum class Incumbency { DemIncumbent, RepIncumbent, OpenOrMixed };

inline const char* to_string(Incumbency inc) noexcept {
  switch (inc) {
    case Incumbency::DemIncumbent: return "D";
    case Incumbency::RepIncumbent: return "R";
    case Incumbency::OpenOrMixed: return "O";
  }
  return "O";
}

struct DistrictReturn {
  double dem_share = 0.0;
  std::optional<double> pres_dem_share;
  Incumbency incumbency = Incumbency::OpenOrMixed;
  bool imputed = false;
};

/// All districts of one state in one election year, sorted by legislative
/// share. `imputed` marks districts whose legislative share was filled in
/// upstream for an uncontested race; no imputation happens in this library.
struct StateYearRecord {
  std::string state;
  int year = 0;
  std::vector<DistrictReturn> districts;

  ElectionDistribution distribution() const {
    std::vector<double> shares;
    shares.reserve(districts.size());
    for (const auto& d : districts) shares.push_back(d.dem_share);
    return validate_distribution(shares);
  }
};

// ---------------------------------------------------------------------------
// Per-year model coefficients

/// Linear link p = gamma0 + gamma1 * l from legislative to presidential
/// share, and logistic coefficients for the district-win probability
/// F(beta0 + beta1 * p), both specific to one election year.
struct YearCoefficients {
  int year = 0;
  double gamma0 = 0.0;
  double gamma1 = 1.0;
  double beta0 = 0.0;
  double beta1 = 0.0;
};

/// Same logistic coefficients with the identity link (gamma = (0,1)), the
/// simplest defensible map between the two vote kinds.
inline YearCoefficients identity_link(const YearCoefficients& c) noexcept {
  return {c.year, 0.0, 1.0, c.beta0, c.beta1};
}

}  // namespace declin
