#include "hamsel/selectors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "hamsel/numkit.hpp"

namespace hamsel {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};

[[noreturn]] void reject(const std::string& what) { throw std::invalid_argument(what); }

void check_sparsity(std::size_t d, std::size_t s) {
  if (s < 1 || s >= d) {
    reject("need 0 < s < d (got d=" + std::to_string(d) + ", s=" + std::to_string(s) + ")");
  }
}

void check_scale(double a, double sigma) {
  if (!(std::isfinite(a) && a > 0.0)) reject("signal level a must be positive and finite");
  if (!(std::isfinite(sigma) && sigma > 0.0)) reject("sigma must be positive and finite");
}

double snap_to_integer(double t) {
  const double nearest = std::round(t);
  if (std::fabs(t - nearest) <= kTieTolerance * std::max(1.0, std::fabs(t))) return nearest;
  return t;
}

// Slope and intercept of the log-likelihood ratio, which is affine in x for
// all three families.
struct Affine {
  double slope;
  double intercept;
};

Affine llr_coefficients(const FamilyParams& family) {
  return std::visit(
      Overloaded{
          [](const GaussianShift& g) {
            const double var = g.sigma * g.sigma;
            return Affine{(g.a1 - g.a0) / var, -(g.a1 * g.a1 - g.a0 * g.a0) / (2.0 * var)};
          },
          [](const BernoulliRates& b) {
            return Affine{std::log((b.a1 / (1.0 - b.a1)) * ((1.0 - b.a0) / b.a0)),
                          std::log((1.0 - b.a1) / (1.0 - b.a0))};
          },
          [](const PoissonRates& p) {
            return Affine{std::log(p.a1 / p.a0), -p.a1 + p.a0};
          },
      },
      family);
}

bool at_least_with_tolerance(double lhs, double rhs, double scale) {
  return lhs >= rhs - kTieTolerance * scale;
}

}  // namespace

SupportVector threshold_one_sided(std::span<const double> x, double t) {
  SupportVector out(x.size());
  auto& bits = out.raw();
  for (std::size_t j = 0; j < x.size(); ++j) bits[j] = x[j] >= t;
  return out;
}

SupportVector threshold_two_sided(std::span<const double> x, double t) {
  if (!(t >= 0.0)) reject("threshold_two_sided: t must be >= 0");
  SupportVector out(x.size());
  auto& bits = out.raw();
  for (std::size_t j = 0; j < x.size(); ++j) bits[j] = std::fabs(x[j]) >= t;
  return out;
}

double minimax_threshold(std::size_t d, std::size_t s, double a, double sigma) {
  check_sparsity(d, s);
  check_scale(a, sigma);
  return a / 2.0 + (sigma * sigma / a) * log_odds(d, s);
}

double cosh_log_threshold(std::size_t d, std::size_t s, double a, double sigma) {
  check_sparsity(d, s);
  check_scale(a, sigma);
  return a * a / (2.0 * sigma * sigma) + log_odds(d, s);
}

double cosh_abs_threshold(std::size_t d, std::size_t s, double a, double sigma) {
  // log u = a^2/(2 sigma^2) + log(d/s - 1), the same number as the log cosh cut.
  const double log_u = cosh_log_threshold(d, s, a, sigma);
  if (log_u <= 0.0) return 0.0;
  return (sigma * sigma / a) * numkit::arccosh_of_exp(log_u);
}

SupportVector cosh_selector(std::span<const double> x, std::size_t d, std::size_t s, double a,
                            double sigma) {
  const double t = cosh_abs_threshold(d, s, a, sigma);
  if (t == 0.0) return SupportVector(std::vector<std::uint8_t>(x.size(), 1));
  return threshold_two_sided(x, t);
}

double log_cosh(double z) noexcept {
  const double az = std::fabs(z);
  return az + std::log1p(std::exp(-2.0 * az)) - std::numbers::ln2;
}

double log_likelihood_ratio(const FamilyParams& family, double x) {
  const auto [slope, intercept] = llr_coefficients(family);
  return x * slope + intercept;
}

bool llr_selects(const FamilyParams& family, double x, double log_cut) {
  if (std::holds_alternative<GaussianShift>(family)) {
    return x >= mlr_threshold(family, log_cut);
  }
  const auto [slope, intercept] = llr_coefficients(family);
  const double term = x * slope;
  return at_least_with_tolerance(term + intercept, log_cut,
                                 std::fabs(term) + std::fabs(intercept) + std::fabs(log_cut));
}

double mlr_threshold(const FamilyParams& family, double log_cut) {
  validate(family);
  return std::visit(
      Overloaded{
          [&](const GaussianShift& g) {
            const double delta = g.a1 - g.a0;
            return (g.a1 + g.a0) / 2.0 + (g.sigma * g.sigma / delta) * log_cut;
          },
          [&](const BernoulliRates& b) {
            const auto [slope, intercept] = llr_coefficients(b);
            return snap_to_integer((log_cut - intercept) / slope);
          },
          [&](const PoissonRates& p) {
            return snap_to_integer((log_cut + p.a1 - p.a0) / std::log(p.a1 / p.a0));
          },
      },
      family);
}

void validate_observations(const FamilyParams& family, std::span<const double> x) {
  if (std::holds_alternative<BernoulliRates>(family)) {
    for (std::size_t j = 0; j < x.size(); ++j) {
      if (x[j] != 0.0 && x[j] != 1.0) {
        reject("bernoulli observation " + std::to_string(j + 1) + " is not 0 or 1");
      }
    }
  } else if (std::holds_alternative<PoissonRates>(family)) {
    for (std::size_t j = 0; j < x.size(); ++j) {
      if (!(x[j] >= 0.0) || x[j] != std::floor(x[j]) || !std::isfinite(x[j])) {
        reject("poisson observation " + std::to_string(j + 1) +
               " is not a nonnegative integer");
      }
    }
  }
}

SupportVector llr_selector(std::span<const double> x, const FamilyParams& family, std::size_t d,
                           std::size_t s) {
  check_sparsity(d, s);
  validate(family);
  validate_observations(family, x);
  const double cut = log_odds(d, s);
  SupportVector out(x.size());
  auto& bits = out.raw();
  if (std::holds_alternative<GaussianShift>(family)) {
    const double t = mlr_threshold(family, cut);
    for (std::size_t j = 0; j < x.size(); ++j) bits[j] = x[j] >= t;
  } else {
    for (std::size_t j = 0; j < x.size(); ++j) bits[j] = llr_selects(family, x[j], cut);
  }
  return out;
}

double crowd_llr(std::span<const WorkerRates> rates, std::span<const std::uint8_t> votes) {
  double sum = 0.0;
  for (std::size_t i = 0; i < rates.size(); ++i) {
    const auto& r = rates[i];
    const double slope = std::log((r.a1 / (1.0 - r.a1)) * ((1.0 - r.a0) / r.a0));
    sum += (votes[i] ? slope : 0.0) + std::log((1.0 - r.a1) / (1.0 - r.a0));
  }
  return sum;
}

bool crowd_llr_selects(std::span<const WorkerRates> rates, std::span<const std::uint8_t> votes,
                       double log_cut) {
  double sum = 0.0;
  double scale = std::fabs(log_cut);
  for (std::size_t i = 0; i < rates.size(); ++i) {
    const auto& r = rates[i];
    const double slope = std::log((r.a1 / (1.0 - r.a1)) * ((1.0 - r.a0) / r.a0));
    const double intercept = std::log((1.0 - r.a1) / (1.0 - r.a0));
    const double term = votes[i] ? slope : 0.0;
    sum += term + intercept;
    scale += std::fabs(term) + std::fabs(intercept);
  }
  return at_least_with_tolerance(sum, log_cut, scale);
}

double crowd_llr(const CrowdInstance& c, std::size_t item) {
  std::vector<std::uint8_t> column(c.workers());
  for (std::size_t i = 0; i < c.workers(); ++i) column[i] = c.vote(i, item);
  return crowd_llr(c.rates(), column);
}

SupportVector crowd_selector(const CrowdInstance& c, std::size_t s) {
  check_sparsity(c.items(), s);
  const double cut = log_odds(c.items(), s);
  SupportVector out(c.items());
  std::vector<std::uint8_t> column(c.workers());
  for (std::size_t j = 0; j < c.items(); ++j) {
    for (std::size_t i = 0; i < c.workers(); ++i) column[i] = c.vote(i, j);
    out.set(j, crowd_llr_selects(c.rates(), column, cut));
  }
  return out;
}

SupportVector top_s_selector(std::span<const double> x, std::size_t s, bool one_sided) {
  if (s < 1 || s > x.size()) reject("top_s_selector: need 0 < s <= d");
  std::vector<std::size_t> order(x.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  auto key = [&](std::size_t j) { return one_sided ? x[j] : std::fabs(x[j]); };
  // Strict total order: larger key first, then lower index.
  auto before = [&](std::size_t i, std::size_t j) {
    const double ki = key(i);
    const double kj = key(j);
    return ki > kj || (ki == kj && i < j);
  };
  if (s < x.size()) {
    std::nth_element(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(s - 1),
                     order.end(), before);
  }
  SupportVector out(x.size());
  if (s == x.size()) {
    for (std::size_t j = 0; j < x.size(); ++j) out.set(j);
    return out;
  }
  // nth_element leaves the s best in [0, s) in some order.
  for (std::size_t i = 0; i < s; ++i) out.set(order[i]);
  return out;
}

double universal_threshold(std::size_t d, double sigma) {
  if (d < 2) reject("universal threshold needs d >= 2");
  if (!(sigma > 0.0)) reject("sigma must be positive");
  return sigma * std::sqrt(2.0 * std::log(static_cast<double>(d)));
}

SupportVector universal_selector(std::span<const double> x, double sigma) {
  return threshold_two_sided(x, universal_threshold(x.size(), sigma));
}

double adaptive_block_threshold(std::size_t d, std::size_t g, double sigma) {
  return sigma * std::sqrt(2.0 * log_odds(d, g));
}

AdaptiveResult adaptive_selector(std::span<const double> x, std::size_t s_star, double sigma) {
  const std::size_t d = x.size();
  if (s_star < 2 || 4 * s_star > d) {
    reject("adaptive selector needs 2 <= s_star <= d/4 (got s_star=" + std::to_string(s_star) +
           ", d=" + std::to_string(d) + ")");
  }
  if (!(sigma > 0.0)) reject("sigma must be positive");

  AdaptiveDiagnostics diag;
  for (std::size_t g = 1; g <= s_star; g *= 2) diag.grid.push_back(g);
  const std::size_t M = diag.grid.size();
  diag.grid_size = M;
  diag.tau = std::pow(log_odds(d, s_star), -1.0 / 7.0);
  for (std::size_t g : diag.grid) diag.thresholds.push_back(adaptive_block_threshold(d, g, sigma));

  // Block k (1-based, k = 2..M) is [w(g_k), w(g_{k-1})).
  diag.counts.assign(M - 1, 0);
  for (double v : x) {
    const double ax = std::fabs(v);
    if (ax < diag.thresholds[M - 1] || ax >= diag.thresholds[0]) continue;
    for (std::size_t k = 2; k <= M; ++k) {
      if (diag.thresholds[k - 1] <= ax && ax < diag.thresholds[k - 2]) {
        ++diag.counts[k - 2];
        break;
      }
    }
  }

  // Largest rejected-by-count block decides: m-hat is the block after it.
  std::size_t chosen = 2;
  for (std::size_t k = M; k >= 2; --k) {
    const double limit = diag.tau * static_cast<double>(diag.grid[k - 1]);
    if (static_cast<double>(diag.counts[k - 2]) > limit) {
      chosen = (k == M) ? M : k + 1;
      break;
    }
  }
  diag.chosen_m = chosen;

  const double t = diag.thresholds[chosen - 1];
  return {threshold_two_sided(x, t), chosen, t, std::move(diag)};
}

Selection apply_selector(const SelectorSpec& spec, std::span<const double> x) {
  return std::visit(
      Overloaded{
          [&](const OneSidedThreshold& s) {
            return Selection{threshold_one_sided(x, s.t), s.t, std::nullopt};
          },
          [&](const TwoSidedThreshold& s) {
            return Selection{threshold_two_sided(x, s.t), s.t, std::nullopt};
          },
          [&](const CoshLlr& s) {
            check_scale(s.a, s.sigma);
            const double scale = s.a / (s.sigma * s.sigma);
            if (s.t <= 0.0) {
              return Selection{SupportVector(std::vector<std::uint8_t>(x.size(), 1)), 0.0,
                               std::nullopt};
            }
            const double abs_t = numkit::arccosh_of_exp(s.t) / scale;
            return Selection{threshold_two_sided(x, abs_t), abs_t, std::nullopt};
          },
          [&](const GeneralLlr& s) {
            validate(s.family);
            validate_observations(s.family, x);
            SupportVector out(x.size());
            for (std::size_t j = 0; j < x.size(); ++j) {
              out.set(j, llr_selects(s.family, x[j], s.log_cut));
            }
            return Selection{std::move(out), mlr_threshold(s.family, s.log_cut), std::nullopt};
          },
          [&](const TopS& s) {
            return Selection{top_s_selector(x, s.s, s.one_sided), std::nullopt, std::nullopt};
          },
          [&](const Universal& s) {
            const double t = universal_threshold(x.size(), s.sigma);
            return Selection{threshold_two_sided(x, t), t, std::nullopt};
          },
          [&](const Adaptive& s) {
            auto r = adaptive_selector(x, s.s_star, s.sigma);
            return Selection{std::move(r.support), r.threshold, std::move(r.diagnostics)};
          },
      },
      spec);
}

SelectorSpec make_selector(std::string_view name, const ProblemInstance& p,
                           std::optional<std::size_t> s_star) {
  p.validate();
  const bool has_level = !std::holds_alternative<Interval>(p.signal);
  auto need_level = [&] {
    if (!has_level) {
      reject("selector '" + std::string(name) + "' needs a single signal level a");
    }
    if (p.family != Family::Gaussian) {
      reject("selector '" + std::string(name) + "' is defined for Gaussian data only");
    }
    return p.signal_level();
  };
  if (name == "plus") {
    return OneSidedThreshold{minimax_threshold(p.d, p.s, need_level(), p.sigma)};
  }
  if (name == "abs") {
    return TwoSidedThreshold{std::max(0.0, minimax_threshold(p.d, p.s, need_level(), p.sigma))};
  }
  if (name == "cosh") {
    const double a = need_level();
    return CoshLlr{a, p.sigma, cosh_log_threshold(p.d, p.s, a, p.sigma)};
  }
  if (name == "llr") return GeneralLlr{p.family_params(), log_odds(p.d, p.s)};
  if (name == "tops") return TopS{p.s, true};
  if (name == "tops-abs") return TopS{p.s, false};
  if (name == "universal") return Universal{p.sigma};
  if (name == "adaptive") {
    if (!s_star) reject("adaptive selector needs s_star");
    if (*s_star < 2 || 4 * *s_star > p.d) reject("adaptive selector needs 2 <= s_star <= d/4");
    return Adaptive{*s_star, p.sigma, 16.0};
  }
  reject("unknown selector '" + std::string(name) + "'");
}

}  // namespace hamsel
