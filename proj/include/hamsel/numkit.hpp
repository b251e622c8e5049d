#pragma once

#include <cstdint>
#include <utility>

// Scalar special functions shared by the risk formulas, the selectors and
// the Monte Carlo engine. Everything here is a pure function.
namespace hamsel::numkit {

/// Standard normal CDF. Computed directly from y (Cody's rational
/// approximations with the split exponential), so lower tails keep full
/// relative accuracy down to y = -37.5 instead of suffering 1 - (...)
/// cancellation.
double gaussian_cdf(double y) noexcept;

/// Upper tail 1 - Phi(y), evaluated as Phi(-y).
double gaussian_sf(double y) noexcept;

/// log(1 - Phi(y)). Falls back to the asymptotic Mills-ratio series once the
/// tail underflows a double.
double log_gaussian_tail(double y) noexcept;

struct TailBounds {
  double lower;
  double upper;
};

/// Abramowitz-Stegun type bracket for the Gaussian upper tail:
///   sqrt(2/pi) e^{-y^2/2} / (y + sqrt(y^2 + 4))   <  1 - Phi(y)
///   sqrt(2/pi) e^{-y^2/2} / (y + sqrt(y^2 + 8/pi)) >= 1 - Phi(y).
/// Throws std::invalid_argument for y < 0.
TailBounds gaussian_tail_bounds(double y);

/// Inverse hyperbolic cosine on [1, inf). Uses log(2u) - 1/(4u^2) above
/// kArccoshAsymptoticFrom so u*u never overflows. Throws for u < 1.
double arccosh(double u);
inline constexpr double kArccoshAsymptoticFrom = 1e8;

/// arccosh(exp(log_u)) without forming exp(log_u) when it would overflow.
/// Throws for log_u < 0.
double arccosh_of_exp(double log_u);

/// P(X <= k) for X ~ Poisson(lambda); k = -1 gives 0. Direct summation when
/// lambda <= kPoissonSummationMaxRate, regularized incomplete gamma Q(k+1, lambda)
/// otherwise. Throws for lambda <= 0 or k < -1.
double poisson_cdf(std::int64_t k, double lambda);

/// P(X > k) for X ~ Poisson(lambda), computed without 1 - cdf cancellation.
double poisson_sf(std::int64_t k, double lambda);

inline constexpr double kPoissonSummationMaxRate = 50.0;

namespace detail {
// Both Poisson routes, exposed so the seam can be tested.
double poisson_cdf_summation(std::int64_t k, double lambda);
double poisson_cdf_gamma(std::int64_t k, double lambda);
}  // namespace detail

}  // namespace hamsel::numkit
