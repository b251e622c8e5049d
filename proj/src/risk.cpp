#include "hamsel/risk.hpp"

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "hamsel/numkit.hpp"
#include "hamsel/selectors.hpp"
#include "hamsel/simulate.hpp"

namespace hamsel {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};

[[noreturn]] void reject(const std::string& what) { throw std::invalid_argument(what); }

using numkit::gaussian_cdf;

void check_instance(std::size_t d, std::size_t s, double a, double sigma) {
  if (s < 1 || s >= d) {
    reject("need 0 < s < d (got d=" + std::to_string(d) + ", s=" + std::to_string(s) + ")");
  }
  if (!(std::isfinite(a) && a > 0.0)) reject("signal level a must be positive and finite");
  if (!(std::isfinite(sigma) && sigma > 0.0)) reject("sigma must be positive and finite");
}

void check_below_half(std::size_t d, std::size_t s) {
  if (s < 1 || 2 * s >= d) {
    reject("need 0 < s < d/2 (got d=" + std::to_string(d) + ", s=" + std::to_string(s) + ")");
  }
}

double odds(std::size_t d, std::size_t s) {
  return static_cast<double>(d - s) / static_cast<double>(s);
}

}  // namespace

double psi_plus(std::size_t d, std::size_t s, double a, double sigma) {
  check_instance(d, s, a, sigma);
  const double r = odds(d, s);
  const double shift = (sigma / a) * std::log(r);
  const double half = a / (2.0 * sigma);
  return r * gaussian_cdf(-half - shift) + gaussian_cdf(-half + shift);
}

double psi_two_sided(std::size_t d, std::size_t s, double a, double sigma) {
  check_instance(d, s, a, sigma);
  const double r = odds(d, s);
  const double shift = (sigma / a) * std::log(r);
  const double half = a / (2.0 * sigma);
  return r * gaussian_cdf(-half - shift) + gaussian_cdf(-std::max(half - shift, 0.0));
}

double psi_bar(std::size_t d, std::size_t s, double a, double sigma) {
  check_instance(d, s, a, sigma);
  const double r = odds(d, s);
  const double log_u = a * a / (2.0 * sigma * sigma) + std::log(r);
  if (log_u <= 0.0) return r;
  const double q = (sigma / a) * numkit::arccosh_of_exp(log_u);
  const double snr = a / sigma;
  return r * 2.0 * gaussian_cdf(-q) + (gaussian_cdf(q - snr) - gaussian_cdf(-q - snr));
}

double psi_general(std::size_t d, std::size_t s, const FamilyParams& family) {
  if (s < 1 || s >= d) reject("need 0 < s < d");
  validate(family);
  const double r = odds(d, s);
  const double cut = std::log(r);
  return std::visit(
      Overloaded{
          [&](const GaussianShift& g) {
            const double delta = g.a1 - g.a0;
            const double half = delta / (2.0 * g.sigma);
            const double shift = (g.sigma / delta) * cut;
            return gaussian_cdf(-half + shift) + r * gaussian_cdf(-half - shift);
          },
          [&](const BernoulliRates& b) {
            // The likelihood ratio is increasing, so x = 0 selected implies x = 1 selected.
            if (llr_selects(family, 0.0, cut)) return r;
            if (!llr_selects(family, 1.0, cut)) return 1.0;
            return 1.0 - b.a1 + b.a0 * r;
          },
          [&](const PoissonRates& p) {
            // Smallest selected count k_cut; miss = P1(X < k_cut), false alarm = P0(X >= k_cut).
            const double t = mlr_threshold(family, cut);
            std::int64_t k = t <= 0.0 ? 0 : static_cast<std::int64_t>(std::ceil(t));
            while (k > 0 && llr_selects(family, static_cast<double>(k - 1), cut)) --k;
            while (!llr_selects(family, static_cast<double>(k), cut)) ++k;
            return numkit::poisson_cdf(k - 1, p.a1) + r * numkit::poisson_sf(k - 1, p.a0);
          },
      },
      family);
}

double psi_crowd_enumerate(std::span<const WorkerRates> rates, std::size_t d, std::size_t s) {
  validate_rates(rates);
  if (s < 1 || s >= d) reject("need 0 < s < d");
  const std::size_t m = rates.size();
  if (m > kMaxEnumeratedWorkers) {
    reject("crowd enumeration supports at most " + std::to_string(kMaxEnumeratedWorkers) +
           " workers (got " + std::to_string(m) + ")");
  }
  const double r = odds(d, s);
  const double cut = std::log(r);
  std::vector<std::uint8_t> votes(m);
  double miss = 0.0;
  double false_alarm = 0.0;
  std::uint64_t selected = 0;
  const std::uint64_t patterns = std::uint64_t{1} << m;
  for (std::uint64_t pattern = 0; pattern < patterns; ++pattern) {
    double p0 = 1.0;
    double p1 = 1.0;
    for (std::size_t i = 0; i < m; ++i) {
      const bool v = (pattern >> i) & 1u;
      votes[i] = v;
      p0 *= v ? rates[i].a0 : 1.0 - rates[i].a0;
      p1 *= v ? rates[i].a1 : 1.0 - rates[i].a1;
    }
    if (crowd_llr_selects(rates, votes, cut)) {
      false_alarm += p0;
      ++selected;
    } else {
      miss += p1;
    }
  }
  // Whole-space events have probability exactly 1, not a rounded sum of masses.
  if (selected == 0) return 1.0;
  if (selected == patterns) return r;
  return miss + r * false_alarm;
}

CrowdRisk psi_crowd(std::span<const WorkerRates> rates, std::size_t d, std::size_t s,
                    CrowdMode mode, std::size_t replications, std::uint64_t seed,
                    unsigned threads) {
  if (mode == CrowdMode::Enumerate) {
    return {psi_crowd_enumerate(rates, d, s), std::nullopt, 0};
  }
  const auto est = simulate_crowd_risk(rates, d, s, replications, seed, threads);
  return {est.mean, est.stderr_, replications};
}

WrongRecoveryBounds wrong_recovery_bounds(std::size_t d, std::size_t s, double a,
                                          double sigma) {
  const double n = static_cast<double>(s);
  const double plus = n * psi_plus(d, s, a, sigma);
  const double bar = n * psi_bar(d, s, a, sigma);
  const double two = 2.0 * n * psi_two_sided(d, s, a, sigma);
  return {plus, bar, two, plus / (1.0 + plus), bar / (1.0 + bar)};
}

RecoveryBounds delta_bounds(std::size_t d, std::size_t s, double a, double sigma) {
  check_instance(d, s, a, sigma);
  check_below_half(d, s);
  const double n = static_cast<double>(s);
  const double lr = std::log(odds(d, s));
  const double W = a * a / (sigma * sigma) - 2.0 * lr;
  if (W < 0.0) return {W, std::nullopt, 0.0, kDeltaUpperFactor * n / 2.0};
  const double delta = W / (2.0 * std::sqrt(2.0 * lr + W));
  const double tail = gaussian_cdf(-delta);
  return {W, delta, n * tail, kDeltaUpperFactor * n * tail};
}

PhasePoint phase_point(std::size_t d, std::size_t s, double sigma) {
  if (s < 2 || 2 * s >= d) {
    reject("phase_point needs 2 <= s < d/2 (got d=" + std::to_string(d) +
           ", s=" + std::to_string(s) + ")");
  }
  if (!(sigma > 0.0)) reject("sigma must be positive");
  const double log_rest = std::log(static_cast<double>(d - s));
  const double log_s = std::log(static_cast<double>(s));
  return {d,
          s,
          sigma * std::sqrt(2.0 * std::log(odds(d, s))),
          sigma * (std::sqrt(2.0 * log_rest) + std::sqrt(2.0 * log_s)),
          sigma * std::sqrt(2.0 * log_rest),
          4.0 * (log_s + std::sqrt(log_s * log_rest))};
}

double a0_adaptive(std::size_t d, std::size_t s, double A, double sigma) {
  check_below_half(d, s);
  if (!(A >= 0.0) || !std::isfinite(A)) reject("A must be a finite value >= 0");
  if (!(sigma > 0.0)) reject("sigma must be positive");
  const double lr = std::log(odds(d, s));
  return sigma * std::sqrt(2.0 * lr + A * std::sqrt(lr));
}

double adaptive_A_min(std::size_t d, std::size_t s_star, double c0) {
  if (s_star < 1 || 4 * s_star > d) reject("adaptive_A_min needs 1 <= s_star <= d/4");
  return c0 * std::sqrt(std::log(std::log(odds(d, s_star))));
}

}  // namespace hamsel
