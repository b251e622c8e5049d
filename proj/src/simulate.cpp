#include "hamsel/simulate.hpp"

#include <cmath>
#include <cstdlib>
#include <stdexcept>
#include <string>
#include <thread>

#include "hamsel/numkit.hpp"
#include "hamsel/parallel.hpp"
#include "hamsel/risk.hpp"
#include "hamsel/selectors.hpp"

namespace hamsel {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};

[[noreturn]] void reject(const std::string& what) { throw std::invalid_argument(what); }

void fill_gaussian(std::span<const double> theta, double sigma, double rho, Rng& rng,
                   std::span<double> out) {
  const double common = std::sqrt(rho) * rng.normal();
  const double own = std::sqrt(1.0 - rho);
  for (std::size_t j = 0; j < theta.size(); ++j) {
    out[j] = theta[j] + sigma * (common + own * rng.normal());
  }
}

double draw_from(const FamilyParams& family, bool signal, Rng& rng) {
  return std::visit(Overloaded{
                        [&](const GaussianShift& g) {
                          return (signal ? g.a1 : g.a0) + g.sigma * rng.normal();
                        },
                        [&](const BernoulliRates& b) {
                          return rng.bernoulli(signal ? b.a1 : b.a0) ? 1.0 : 0.0;
                        },
                        [&](const PoissonRates& p) {
                          return static_cast<double>(rng.poisson(signal ? p.a1 : p.a0));
                        },
                    },
                    family);
}

std::size_t family_index(Family f) {
  switch (f) {
    case Family::Gaussian: return 0;
    case Family::Bernoulli: return 1;
    case Family::Poisson: return 2;
  }
  return 0;
}

void check_pairing(const ProblemInstance& p, const SelectorSpec& sel, const MCConfig& cfg) {
  if (const auto* llr = std::get_if<GeneralLlr>(&sel)) {
    if (llr->family.index() != family_index(p.family)) {
      reject("llr selector family does not match the instance family");
    }
  }
  if (const auto* top = std::get_if<TopS>(&sel)) {
    if (top->s < 1 || top->s > p.d) reject("top-s selector needs 0 < s <= d");
  }
  if (p.family != Family::Gaussian) {
    const bool ok = std::holds_alternative<GeneralLlr>(sel) ||
                    std::holds_alternative<OneSidedThreshold>(sel) ||
                    (std::holds_alternative<TopS>(sel) && std::get<TopS>(sel).one_sided);
    if (!ok) {
      reject("selector '" + std::string(selector_name(sel)) + "' is not defined for " +
             std::string(to_string(p.family)) + " data");
    }
    if (cfg.rho != 0.0) reject("correlated noise is only defined for the Gaussian family");
  }
  if (cfg.stress && (p.family != Family::Gaussian || std::holds_alternative<Interval>(p.signal))) {
    reject("stress mode needs a Gaussian LowerBound or TwoSided instance");
  }
}

double loss_value(std::size_t hamming, std::size_t s, LossKind kind) {
  switch (kind) {
    case LossKind::Hamming: return static_cast<double>(hamming);
    case LossKind::NormalizedHamming:
      return static_cast<double>(hamming) / static_cast<double>(s);
    case LossKind::WrongRecoveryProb: return hamming > 0 ? 1.0 : 0.0;
  }
  return 0.0;
}

// Per-coordinate (miss, false alarm) probabilities of a symmetric or one-sided
// threshold rule at the least-favourable configuration.
struct ErrorRates {
  double miss;
  double false_alarm;
};

std::optional<ErrorRates> threshold_error_rates(const ProblemInstance& p, double t,
                                                bool two_sided) {
  using numkit::gaussian_cdf;
  const double sg = p.sigma;
  if (std::holds_alternative<Interval>(p.signal)) return std::nullopt;
  const double a = p.signal_level();
  auto miss_at = [&](double level) {
    if (two_sided) return gaussian_cdf((t - level) / sg) - gaussian_cdf((-t - level) / sg);
    return gaussian_cdf((t - level) / sg);
  };
  const double fa = two_sided ? 2.0 * gaussian_cdf(-t / sg) : gaussian_cdf(-t / sg);
  const bool mixed = std::holds_alternative<TwoSided>(p.signal);
  const double miss = mixed ? 0.5 * (miss_at(a) + miss_at(-a)) : miss_at(a);
  return ErrorRates{miss, fa};
}

}  // namespace

unsigned resolve_threads(unsigned requested) noexcept {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("HAMSEL_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v > 0) return static_cast<unsigned>(v);
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? hw : 1;
}

void MCConfig::validate() const {
  if (replications < 1) reject("replications must be >= 1");
  if (!(rho >= 0.0 && rho < 1.0)) reject("rho must lie in [0, 1)");
}

Observations generate_gaussian(std::span<const double> theta, double sigma, double rho,
                               Rng& rng) {
  if (!(sigma > 0.0)) reject("sigma must be positive");
  if (!(rho >= 0.0 && rho < 1.0)) reject("rho must lie in [0, 1)");
  Observations out(theta.size());
  fill_gaussian(theta, sigma, rho, rng, out);
  return out;
}

Observations generate_family(const SupportVector& eta, const FamilyParams& family, Rng& rng) {
  validate(family);
  Observations out(eta.size());
  for (std::size_t j = 0; j < eta.size(); ++j) out[j] = draw_from(family, eta[j], rng);
  return out;
}

SampleSummary summarize(std::span<const double> values) {
  const std::size_t n = values.size();
  if (n == 0) return {};
  double sum = 0.0;
  for (double v : values) sum += v;
  const double mean = sum / static_cast<double>(n);
  if (n == 1) return {mean, 0.0};
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / static_cast<double>(n - 1));
  return {mean, sd / std::sqrt(static_cast<double>(n))};
}

std::vector<double> replicate_losses(const ProblemInstance& p, const SelectorSpec& sel,
                                     const MCConfig& cfg) {
  p.validate();
  cfg.validate();
  check_pairing(p, sel, cfg);

  std::vector<double> losses(cfg.replications);
  const bool gaussian = p.family == Family::Gaussian;
  const auto* interval = std::get_if<Interval>(&p.signal);
  const bool mixed_sign = std::holds_alternative<TwoSided>(p.signal);
  const std::optional<FamilyParams> family =
      gaussian ? std::nullopt : std::optional<FamilyParams>(p.family_params());

  parallel_chunks(cfg.replications, cfg.threads, [&](std::size_t begin, std::size_t end) {
    SupportVector eta(p.d);
    std::vector<std::size_t> scratch;
    std::vector<double> theta(p.d);
    Observations x(p.d);
    for (std::size_t rep = begin; rep < end; ++rep) {
      Rng rng = Rng::for_replication(cfg.seed, rep);
      draw_uniform_support(p.d, p.s, rng, eta, scratch);
      if (gaussian) {
        if (interval != nullptr) {
          for (std::size_t j = 0; j < p.d; ++j) theta[j] = eta[j] ? interval->a1 : interval->a0;
        } else {
          double level = p.signal_level();
          if (mixed_sign && rng.bernoulli(0.5)) level = -level;
          for (std::size_t j = 0; j < p.d; ++j) {
            if (!eta[j]) {
              theta[j] = 0.0;
            } else if (cfg.stress) {
              static constexpr double kMultipliers[] = {1.0, 2.0, 10.0};
              theta[j] = level * kMultipliers[rng.below(3)];
            } else {
              theta[j] = level;
            }
          }
        }
        fill_gaussian(theta, p.sigma, cfg.rho, rng, x);
      } else {
        for (std::size_t j = 0; j < p.d; ++j) x[j] = draw_from(*family, eta[j], rng);
      }
      const Selection chosen = apply_selector(sel, x);
      losses[rep] = loss_value(hamming_distance(chosen.support, eta), p.s, cfg.loss_kind);
    }
  });
  return losses;
}

std::optional<double> closed_form_risk(const ProblemInstance& p, const SelectorSpec& sel,
                                       LossKind loss) {
  if (loss == LossKind::WrongRecoveryProb) return std::nullopt;
  const double scale = loss == LossKind::Hamming ? static_cast<double>(p.s) : 1.0;
  const double n_signal = static_cast<double>(p.s);
  const double n_noise = static_cast<double>(p.d - p.s);
  auto from_rates = [&](std::optional<ErrorRates> e) -> std::optional<double> {
    if (!e) return std::nullopt;
    return (n_signal * e->miss + n_noise * e->false_alarm) / n_signal * scale;
  };
  if (p.family != Family::Gaussian || std::holds_alternative<Interval>(p.signal)) {
    if (const auto* llr = std::get_if<GeneralLlr>(&sel)) {
      if (llr->log_cut == log_odds(p.d, p.s)) return psi_general(p.d, p.s, llr->family) * scale;
    }
    return std::nullopt;
  }
  return std::visit(
      Overloaded{
          [&](const OneSidedThreshold& s) { return from_rates(threshold_error_rates(p, s.t, false)); },
          [&](const TwoSidedThreshold& s) { return from_rates(threshold_error_rates(p, s.t, true)); },
          [&](const CoshLlr& s) -> std::optional<double> {
            const double t = s.t <= 0.0 ? 0.0
                                        : numkit::arccosh_of_exp(s.t) * s.sigma * s.sigma / s.a;
            return from_rates(threshold_error_rates(p, t, true));
          },
          [&](const GeneralLlr& s) -> std::optional<double> {
            if (std::holds_alternative<TwoSided>(p.signal)) return std::nullopt;
            return from_rates(threshold_error_rates(p, mlr_threshold(s.family, s.log_cut), false));
          },
          [&](const TopS&) -> std::optional<double> { return std::nullopt; },
          [&](const Universal& s) {
            return from_rates(threshold_error_rates(p, universal_threshold(p.d, s.sigma), true));
          },
          [&](const Adaptive&) -> std::optional<double> { return std::nullopt; },
      },
      sel);
}

RiskReport estimate_risk(const ProblemInstance& p, const SelectorSpec& sel, const MCConfig& cfg) {
  const auto losses = replicate_losses(p, sel, cfg);
  const auto summary = summarize(losses);
  RiskReport report;
  report.mc_estimate = summary.mean;
  report.mc_stderr = summary.stderr_;
  report.replications = cfg.replications;
  report.seed = cfg.seed;
  report.loss_kind = cfg.loss_kind;
  if (!cfg.stress) report.closed_form = closed_form_risk(p, sel, cfg.loss_kind);

  // Minimax bounds for the paper-optimal pairings.
  if (p.family == Family::Gaussian && !std::holds_alternative<Interval>(p.signal)) {
    const double a = p.signal_level();
    const bool plus_class = std::holds_alternative<LowerBound>(p.signal);
    const double n = static_cast<double>(p.s);
    const double unit = cfg.loss_kind == LossKind::NormalizedHamming ? 1.0 / n : 1.0;
    if (cfg.loss_kind == LossKind::WrongRecoveryProb) {
      const auto b = wrong_recovery_bounds(p.d, p.s, a, p.sigma);
      if (plus_class && std::holds_alternative<OneSidedThreshold>(sel)) {
        report.bound_lower = b.lower_plus;
        report.bound_upper = b.upper_plus;
      } else if (!plus_class && std::holds_alternative<CoshLlr>(sel)) {
        report.bound_lower = b.lower_bar;
        report.bound_upper = b.upper_bar;
      } else if (!plus_class && std::holds_alternative<TwoSidedThreshold>(sel)) {
        report.bound_lower = b.lower_bar;
        report.bound_upper = b.upper_two_sided;
      }
    } else if (plus_class) {
      report.bound_lower = n * psi_plus(p.d, p.s, a, p.sigma) * unit;
    } else {
      report.bound_lower = n * psi_bar(p.d, p.s, a, p.sigma) * unit;
      if (std::holds_alternative<TwoSidedThreshold>(sel)) {
        report.bound_upper = 2.0 * n * psi_two_sided(p.d, p.s, a, p.sigma) * unit;
      }
    }
  }
  return report;
}

BayesFloorResult bayes_floor_check(const ProblemInstance& p, const SelectorSpec& sel,
                                   MCConfig cfg) {
  if (p.family != Family::Gaussian) reject("bayes_floor_check: Gaussian family only");
  double floor = 0.0;
  const double n = static_cast<double>(p.s);
  if (const auto* lb = std::get_if<LowerBound>(&p.signal)) {
    floor = n * psi_plus(p.d, p.s, lb->a, p.sigma);
  } else if (const auto* ts = std::get_if<TwoSided>(&p.signal)) {
    floor = n * psi_bar(p.d, p.s, ts->a, p.sigma);
  } else {
    reject("bayes_floor_check: needs a LowerBound or TwoSided class");
  }
  cfg.loss_kind = LossKind::Hamming;
  cfg.stress = false;
  const auto losses = replicate_losses(p, sel, cfg);
  const auto summary = summarize(losses);
  return {summary.mean, summary.stderr_, floor, summary.mean >= floor - 3.0 * summary.stderr_};
}

SampleSummary simulate_crowd_risk(std::span<const WorkerRates> rates, std::size_t d,
                                  std::size_t s, std::size_t replications, std::uint64_t seed,
                                  unsigned threads) {
  validate_rates(rates);
  if (s < 1 || s >= d) reject("need 0 < s < d");
  if (replications < 1) reject("replications must be >= 1");
  const std::size_t m = rates.size();
  const double cut = log_odds(d, s);
  std::vector<double> losses(replications);
  parallel_chunks(replications, threads, [&](std::size_t begin, std::size_t end) {
    SupportVector eta(d);
    std::vector<std::size_t> scratch;
    std::vector<std::uint8_t> column(m);
    for (std::size_t rep = begin; rep < end; ++rep) {
      Rng rng = Rng::for_replication(seed, rep);
      draw_uniform_support(d, s, rng, eta, scratch);
      std::size_t errors = 0;
      for (std::size_t j = 0; j < d; ++j) {
        for (std::size_t i = 0; i < m; ++i) {
          column[i] = rng.bernoulli(eta[j] ? rates[i].a1 : rates[i].a0);
        }
        errors += crowd_llr_selects(rates, column, cut) != eta[j];
      }
      losses[rep] = static_cast<double>(errors) / static_cast<double>(s);
    }
  });
  return summarize(losses);
}

std::size_t SparsityRule::apply(std::size_t d) const {
  if (kind == Kind::Fixed) return static_cast<std::size_t>(value);
  const double v = std::pow(static_cast<double>(d), 1.0 - value);
  const double nearest = std::round(v);
  if (std::fabs(v - nearest) <= 1e-9 * std::max(1.0, nearest)) {
    return static_cast<std::size_t>(nearest);
  }
  return static_cast<std::size_t>(std::ceil(v));
}

SparsityRule SparsityRule::parse(const std::string& text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) reject("sparsity rule must be fixed:k or power:beta");
  const std::string kind = text.substr(0, colon);
  const std::string arg = text.substr(colon + 1);
  std::size_t used = 0;
  double value = 0.0;
  try {
    value = std::stod(arg, &used);
  } catch (const std::exception&) {
    reject("sparsity rule '" + text + "': bad number");
  }
  if (used != arg.size()) reject("sparsity rule '" + text + "': bad number");
  if (kind == "fixed") {
    if (value < 1 || value != std::floor(value)) reject("fixed:k needs an integer k >= 1");
    return {Kind::Fixed, value};
  }
  if (kind == "power") {
    if (!(value > 0.0 && value < 1.0)) reject("power:beta needs beta in (0, 1)");
    return {Kind::Power, value};
  }
  reject("unknown sparsity rule '" + kind + "'");
}

namespace {

// phase_point needs s >= 2; with s = 1 the levels still make sense (log s = 0).
PhasePoint sweep_levels(std::size_t d, std::size_t s, double sigma) {
  if (s != 1) return phase_point(d, s, sigma);
  if (d < 3) reject("phase sweep: s = 1 needs d >= 3");
  if (!(sigma > 0.0)) reject("sigma must be positive");
  const double a = sigma * std::sqrt(2.0 * std::log(static_cast<double>(d - 1)));
  return {d, s, a, a, a, 0.0};
}

}  // namespace

std::vector<SweepRecord> phase_sweep(const PhaseSweepConfig& cfg) {
  if (cfg.d_list.empty()) reject("phase sweep: d_list is empty");
  if (cfg.a_multipliers.empty()) reject("phase sweep: a_multipliers is empty");
  if (cfg.selectors.empty()) reject("phase sweep: selectors is empty");
  for (double mult : cfg.a_multipliers) {
    if (!(mult > 0.0) || !std::isfinite(mult)) reject("phase sweep: multipliers must be > 0");
  }
  cfg.mc.validate();

  std::vector<SweepRecord> out;
  for (std::size_t d : cfg.d_list) {
    const std::size_t s = cfg.s_rule.apply(d);
    const PhasePoint pp = sweep_levels(d, s, cfg.sigma);
    const double base = cfg.base == PhaseBase::AlmostFull ? pp.a_almost_full : pp.a_exact;
    for (double mult : cfg.a_multipliers) {
      const double a = mult * base;
      ProblemInstance p{d, s, cfg.sigma,
                        cfg.two_sided ? Signal{TwoSided{a}} : Signal{LowerBound{a}},
                        Family::Gaussian};
      for (const auto& name : cfg.selectors) {
        const SelectorSpec sel = make_selector(name, p, cfg.s_star);
        const RiskReport r = estimate_risk(p, sel, cfg.mc);
        out.push_back({d, s, a, cfg.sigma, cfg.mc.rho, Family::Gaussian, name, cfg.mc.loss_kind,
                       *r.mc_estimate, *r.mc_stderr, r.replications, r.seed, mult,
                       pp.a_almost_full, pp.a_exact, pp.t_star, r.closed_form});
      }
    }
  }
  return out;
}

}  // namespace hamsel
