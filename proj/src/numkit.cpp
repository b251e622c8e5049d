#include "hamsel/numkit.hpp"

#include <boost/math/special_functions/gamma.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

namespace hamsel::numkit {

namespace {

constexpr double kInvSqrt2Pi = 0.398942280401432677939946059934;

// Cody (1993), "Algorithm 715", rational approximations for the normal
// integral on |x| <= 0.67448975, |x| <= sqrt(32) and beyond.
constexpr std::array<double, 5> kA = {2.2352520354606839287, 161.02823106855587881,
                                      1067.6894854603709582, 18154.981253343561249,
                                      0.065682337918207449113};
constexpr std::array<double, 4> kB = {47.20258190468824187, 976.09855173777669322,
                                      10260.932208618978205, 45507.789335026729956};
constexpr std::array<double, 9> kC = {0.39894151208813466764, 8.8831497943883759412,
                                      93.506656132177855979,  597.27027639480026226,
                                      2494.5375852903726711,  6848.1904505362823326,
                                      11602.651437647350124,  9842.7148383839780218,
                                      1.0765576773720192317e-8};
constexpr std::array<double, 8> kD = {22.266688044328115691, 235.38790178262499861,
                                      1519.377599407554805,  6485.558298266760755,
                                      18615.571640885098091, 34900.952721145977266,
                                      38912.003286093271411, 19685.429676859990727};
constexpr std::array<double, 6> kP = {0.21589853405795699,     0.1274011611602473639,
                                      0.022235277870649807,    0.001421619193227893466,
                                      2.9112874951168792e-5,   0.02307344176494017303};
constexpr std::array<double, 5> kQ = {1.28426009614491121, 0.468238212480865118,
                                      0.0659881378689285515, 0.00378239633202758244,
                                      7.29751555083966205e-5};

// exp(-y^2/2) * factor with y^2 split into an exactly representable part.
double split_gauss_kernel(double y, double factor) {
  const double head = std::trunc(y * 16.0) / 16.0;
  const double del = (y - head) * (y + head);
  return std::exp(-head * head * 0.5) * std::exp(-del * 0.5) * factor;
}

// Returns Phi(-|x|), the smaller tail.
double lower_tail_abs(double x) {
  const double y = std::fabs(x);
  if (y <= 0.67448975) {
    double num = 0.0;
    double den = 0.0;
    if (y > 1.11e-16) {
      const double xsq = x * x;
      num = kA[4] * xsq;
      den = xsq;
      for (int i = 0; i < 3; ++i) {
        num = (num + kA[i]) * xsq;
        den = (den + kB[i]) * xsq;
      }
    }
    const double temp = y * (num + kA[3]) / (den + kB[3]);
    return 0.5 - temp;
  }
  if (y <= std::sqrt(32.0)) {
    double num = kC[8] * y;
    double den = y;
    for (int i = 0; i < 7; ++i) {
      num = (num + kC[i]) * y;
      den = (den + kD[i]) * y;
    }
    return split_gauss_kernel(y, (num + kC[7]) / (den + kD[7]));
  }
  const double xsq = 1.0 / (y * y);
  double num = kP[5] * xsq;
  double den = xsq;
  for (int i = 0; i < 4; ++i) {
    num = (num + kP[i]) * xsq;
    den = (den + kQ[i]) * xsq;
  }
  double temp = xsq * (num + kP[4]) / (den + kQ[4]);
  temp = (kInvSqrt2Pi - temp) / y;
  return split_gauss_kernel(y, temp);
}

}  // namespace

double gaussian_cdf(double y) noexcept {
  if (std::isnan(y)) return y;
  if (y == 0.0) return 0.5;
  if (y < -40.0) return 0.0;
  if (y > 40.0) return 1.0;
  const double small = lower_tail_abs(y);
  return y < 0.0 ? small : 1.0 - small;
}

double gaussian_sf(double y) noexcept { return gaussian_cdf(-y); }

double log_gaussian_tail(double y) noexcept {
  if (y < 37.0) return std::log(gaussian_sf(y));
  // log(phi(y)/y) + log(1 - 1/y^2 + 3/y^4 - 15/y^6)
  const double inv2 = 1.0 / (y * y);
  const double series = 1.0 - inv2 * (1.0 - inv2 * (3.0 - 15.0 * inv2));
  return -0.5 * y * y - std::log(y) + std::log(kInvSqrt2Pi) + std::log(series);
}

TailBounds gaussian_tail_bounds(double y) {
  if (!(y >= 0.0)) {
    throw std::invalid_argument("gaussian_tail_bounds: y must be nonnegative, got " +
                                std::to_string(y));
  }
  const double lead = std::sqrt(2.0 / std::numbers::pi) * std::exp(-0.5 * y * y);
  return {lead / (y + std::sqrt(y * y + 4.0)),
          lead / (y + std::sqrt(y * y + 8.0 / std::numbers::pi))};
}

double arccosh(double u) {
  if (!(u >= 1.0)) {
    throw std::invalid_argument("arccosh: argument must be >= 1, got " + std::to_string(u));
  }
  if (u > kArccoshAsymptoticFrom) {
    return std::log(2.0 * u) + std::log1p(-0.25 / (u * u));
  }
  const double e = u - 1.0;
  return std::log1p(e + std::sqrt(e * (u + 1.0)));
}

double arccosh_of_exp(double log_u) {
  if (!(log_u >= 0.0)) {
    throw std::invalid_argument("arccosh_of_exp: log argument must be >= 0");
  }
  if (log_u > std::log(kArccoshAsymptoticFrom)) {
    return log_u + std::numbers::ln2 + std::log1p(-0.25 * std::exp(-2.0 * log_u));
  }
  return arccosh(std::exp(log_u));
}

namespace detail {

double poisson_cdf_summation(std::int64_t k, double lambda) {
  if (k < 0) return 0.0;
  double term = std::exp(-lambda);
  double sum = term;
  for (std::int64_t i = 1; i <= k; ++i) {
    term *= lambda / static_cast<double>(i);
    sum += term;
    if (static_cast<double>(i) > lambda && term < sum * 1e-18) break;
  }
  return std::min(sum, 1.0);
}

double poisson_cdf_gamma(std::int64_t k, double lambda) {
  if (k < 0) return 0.0;
  return boost::math::gamma_q(static_cast<double>(k) + 1.0, lambda);
}

}  // namespace detail

namespace {
void check_poisson_args(std::int64_t k, double lambda) {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) {
    throw std::invalid_argument("poisson: rate must be positive and finite");
  }
  if (k < -1) throw std::invalid_argument("poisson: k must be >= -1");
}
}  // namespace

double poisson_cdf(std::int64_t k, double lambda) {
  check_poisson_args(k, lambda);
  if (lambda <= kPoissonSummationMaxRate) return detail::poisson_cdf_summation(k, lambda);
  return detail::poisson_cdf_gamma(k, lambda);
}

double poisson_sf(std::int64_t k, double lambda) {
  check_poisson_args(k, lambda);
  if (k < 0) return 1.0;
  return boost::math::gamma_p(static_cast<double>(k) + 1.0, lambda);
}

}  // namespace hamsel::numkit
