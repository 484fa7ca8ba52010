#pragma once

// Statistical kernel: closed-form ordinary least squares, per-year logistic
// regression via damped Newton iteration, the expected-seat model built on
// the fits, and small summary-statistics helpers shared by the sweep code.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include "declin/core.hpp"

namespace declin {

class DegenerateDesign final : public Error {
 public:
  using Error::Error;
};

class SingleClass final : public Error {
 public:
  using Error::Error;
};

// ---------------------------------------------------------------------------
// Ordinary least squares

struct OlsFit {
  double intercept = 0.0;
  double slope = 0.0;
  double r_squared = 0.0;
  double rmse = 0.0;

  double predict(double x) const noexcept { return intercept + slope * x; }
};

/// Least-squares line through `points`. r_squared is 1 - SSE/SYY, defined as
/// 1 for a zero-variance response (a constant is a perfect fit of itself);
/// rmse is sqrt(SSE / n). Throws DegenerateDesign for fewer than two points
/// or a constant regressor.
inline OlsFit ols(std::span<const PlotPoint> points) {
  if (points.size() < 2) {
    throw DegenerateDesign("least squares needs at least two points");
  }
  bool all_x_equal = true;
  for (const auto& p : points) {
    if (p.x != points.front().x) {
      all_x_equal = false;
      break;
    }
  }
  if (all_x_equal) {
    throw DegenerateDesign("least squares regressor is constant");
  }

  const double n = static_cast<double>(points.size());
  double mean_x = 0.0;
  double mean_y = 0.0;
  for (const auto& p : points) {
    mean_x += p.x;
    mean_y += p.y;
  }
  mean_x /= n;
  mean_y /= n;

  double sxx = 0.0;
  double sxy = 0.0;
  double syy = 0.0;
  for (const auto& p : points) {
    const double dx = p.x - mean_x;
    const double dy = p.y - mean_y;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }

  OlsFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = mean_y - fit.slope * mean_x;

  double sse = 0.0;
  for (const auto& p : points) {
    const double r = p.y - fit.predict(p.x);
    sse += r * r;
  }
  fit.rmse = std::sqrt(sse / n);
  fit.r_squared = syy > 0.0 ? std::clamp(1.0 - sse / syy, 0.0, 1.0) : 1.0;
  return fit;
}

// ---------------------------------------------------------------------------
// Logistic regression

struct LogisticObservation {
  double p = 0.0;
  bool dem_won = false;
};

struct LogisticFit {
  double beta0 = 0.0;
  double beta1 = 0.0;
  bool converged = false;
  int iterations = 0;
};

/// F(x) = 1 / (1 + e^-x), evaluated without overflow on either tail.
inline double logistic_cdf(double x) noexcept {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

/// log(1 + e^x) without overflow.
inline double softplus(double x) noexcept {
  if (x > 30.0) return x + std::log1p(std::exp(-x));
  return std::log1p(std::exp(x));
}

inline double logistic_log_likelihood(std::span<const LogisticObservation> data,
                                      double beta0, double beta1) noexcept {
  double ll = 0.0;
  for (const auto& obs : data) {
    const double eta = beta0 + beta1 * obs.p;
    ll += (obs.dem_won ? eta : 0.0) - softplus(eta);
  }
  return ll;
}

/// Gradient of the log-likelihood: (sum(y - mu), sum(p * (y - mu))).
inline std::array<double, 2> logistic_score(std::span<const LogisticObservation> data,
                                            double beta0, double beta1) noexcept {
  double g0 = 0.0;
  double g1 = 0.0;
  for (const auto& obs : data) {
    const double resid = (obs.dem_won ? 1.0 : 0.0) - logistic_cdf(beta0 + beta1 * obs.p);
    g0 += resid;
    g1 += obs.p * resid;
  }
  return {g0, g1};
}

inline constexpr int kLogisticMaxIterations = 100;
inline constexpr double kLogisticScoreTolerance = 1e-8;
inline constexpr double kLogisticSlopeGuard = 100.0;

/// Maximum-likelihood fit of F(beta0 + beta1 * p) by damped Newton steps.
/// Converged means the score dropped below kLogisticScoreTolerance in at
/// most kLogisticMaxIterations steps with the slope inside the separation
/// guard; a guard trip reports the slope clamped at +-kLogisticSlopeGuard
/// with converged = false. Throws SingleClass when every outcome is equal.
inline LogisticFit fit_logistic(std::span<const LogisticObservation> data) {
  if (data.empty()) throw EmptyInput("logistic fit needs observations");
  bool any_true = false;
  bool any_false = false;
  for (const auto& obs : data) {
    (obs.dem_won ? any_true : any_false) = true;
  }
  if (!any_true || !any_false) {
    throw SingleClass("logistic fit needs both outcome classes");
  }

  LogisticFit fit;
  double ll = logistic_log_likelihood(data, fit.beta0, fit.beta1);

  for (int iter = 1; iter <= kLogisticMaxIterations; ++iter) {
    const auto score = logistic_score(data, fit.beta0, fit.beta1);
    if (std::max(std::abs(score[0]), std::abs(score[1])) <= kLogisticScoreTolerance) {
      fit.converged = true;
      return fit;
    }
    fit.iterations = iter;

    double h00 = 0.0;
    double h01 = 0.0;
    double h11 = 0.0;
    for (const auto& obs : data) {
      const double mu = logistic_cdf(fit.beta0 + fit.beta1 * obs.p);
      const double w = mu * (1.0 - mu);
      h00 += w;
      h01 += w * obs.p;
      h11 += w * obs.p * obs.p;
    }
    const double det = h00 * h11 - h01 * h01;
    if (!(det > 1e-300)) break;  // weights collapsed, no usable step

    const double step0 = (h11 * score[0] - h01 * score[1]) / det;
    const double step1 = (h00 * score[1] - h01 * score[0]) / det;

    double lambda = 1.0;
    bool accepted = false;
    while (lambda >= 1e-8) {
      const double b0 = fit.beta0 + lambda * step0;
      const double b1 = fit.beta1 + lambda * step1;
      const double candidate = logistic_log_likelihood(data, b0, b1);
      if (candidate > ll - 1e-12) {
        fit.beta0 = b0;
        fit.beta1 = b1;
        ll = candidate;
        accepted = true;
        break;
      }
      lambda *= 0.5;
    }
    if (!accepted) break;

    if (std::abs(fit.beta1) > kLogisticSlopeGuard) {
      // Quasi-separable data: report at the guard rather than diverging.
      fit.beta1 = std::copysign(kLogisticSlopeGuard, fit.beta1);
      fit.converged = false;
      return fit;
    }
  }

  const auto score = logistic_score(data, fit.beta0, fit.beta1);
  fit.converged =
      std::max(std::abs(score[0]), std::abs(score[1])) <= kLogisticScoreTolerance;
  return fit;
}

// ---------------------------------------------------------------------------
// Expected-seat model

/// Expected democratic seat count: sum over districts of F(beta0 + beta1*p_i).
inline double expected_dem_seats(std::span<const double> presidential_shares,
                                 const YearCoefficients& coeffs) noexcept {
  double total = 0.0;
  for (double p : presidential_shares) {
    total += logistic_cdf(coeffs.beta0 + coeffs.beta1 * p);
  }
  return total;
}

/// Affine link from legislative to presidential share.
inline double link_g(double legislative_share, const YearCoefficients& coeffs) noexcept {
  return coeffs.gamma0 + coeffs.gamma1 * legislative_share;
}

/// Expected change in republican seats credited by the logistic model when a
/// distribution moves from `before` to `after`, with presidential shares
/// taken through the linear link: E(g(before)) - E(g(after)). Positive means
/// the model registers a republican gain.
inline double spc_sensitivity(const ElectionDistribution& before,
                              const ElectionDistribution& after,
                              const YearCoefficients& coeffs) {
  if (before.size() != after.size()) {
    throw std::invalid_argument("sensitivity requires equal-length distributions");
  }
  auto expectation = [&coeffs](const ElectionDistribution& d) {
    double total = 0.0;
    for (double l : d.shares()) {
      total += logistic_cdf(coeffs.beta0 + coeffs.beta1 * link_g(l, coeffs));
    }
    return total;
  };
  return expectation(before) - expectation(after);
}

// ---------------------------------------------------------------------------
// Bundled coefficients

/// Per-year link and logistic coefficients fitted to presidential-year House
/// elections 1972-2012. Bundled so expected-seat computations run without
/// refitting; data/year_coefficients.csv carries the same values.
inline constexpr std::array<YearCoefficients, 11> kBundledYearCoefficients{{
    {1972, 0.197, 0.362, -3.55, 9.6},
    {1976, 0.292, 0.391, -7.91, 17.3},
    {1980, 0.234, 0.427, -5.49, 12.7},
    {1984, 0.183, 0.451, -6.19, 16.0},
    {1988, 0.255, 0.395, -5.58, 13.1},
    {1992, 0.250, 0.527, -7.71, 15.8},
    {1996, 0.234, 0.625, -11.37, 20.8},
    {2000, 0.210, 0.592, -8.22, 16.3},
    {2004, 0.176, 0.622, -10.63, 21.7},
    {2008, 0.157, 0.691, -9.38, 18.9},
    {2012, 0.082, 0.850, -19.18, 37.2},
}};

inline std::span<const YearCoefficients> bundled_year_coefficients() noexcept {
  return kBundledYearCoefficients;
}

// ---------------------------------------------------------------------------
// Summary statistics

/// Empirical quantile with linear interpolation between order statistics.
/// `sorted` must be ascending and nonempty.
inline double quantile(std::span<const double> sorted, double q) {
  if (sorted.empty()) throw EmptyInput("quantile of an empty sample");
  if (q <= 0.0) return sorted.front();
  if (q >= 1.0) return sorted.back();
  const double h = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(h);
  if (lo + 1 >= sorted.size()) return sorted.back();
  const double frac = h - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

inline double median(std::span<const double> sorted) { return quantile(sorted, 0.5); }

}  // namespace declin
