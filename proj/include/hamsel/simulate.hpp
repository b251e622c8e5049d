#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hamsel/model.hpp"
#include "hamsel/rng.hpp"

namespace hamsel {

struct MCConfig {
  std::size_t replications = 1000;
  std::uint64_t seed = 0;
  double rho = 0.0;  // equicorrelation of the Gaussian noise, in [0, 1)
  LossKind loss_kind = LossKind::Hamming;
  unsigned threads = 0;  // 0: resolve_threads default
  /// Draw each nonzero magnitude from {a, 2a, 10a} instead of sitting at a.
  bool stress = false;

  void validate() const;
};

/// X = theta + sigma (sqrt(rho) Z0 + sqrt(1 - rho) Z). Z0 is drawn first and
/// always, so streams stay aligned across rho.
Observations generate_gaussian(std::span<const double> theta, double sigma, double rho, Rng& rng);

/// Coordinate j from P1 when eta_j = 1, from P0 otherwise (Bernoulli/Poisson;
/// a GaussianShift family is drawn as N(a_k, sigma^2)).
Observations generate_family(const SupportVector& eta, const FamilyParams& family, Rng& rng);

struct SampleSummary {
  double mean = 0.0;
  double stderr_ = 0.0;
};

/// Mean and plug-in standard error sd/sqrt(n), summed in index order.
SampleSummary summarize(std::span<const double> values);

/// Monte Carlo risk of `sel` on `p` under the least-favourable configuration
/// (Gaussian) or a uniform-support draw (other families). The report carries
/// the closed-form comparison value when one is known for the pairing.
RiskReport estimate_risk(const ProblemInstance& p, const SelectorSpec& sel, const MCConfig& cfg);

/// Per-replication losses (in the units of cfg.loss_kind), indexed by replication.
std::vector<double> replicate_losses(const ProblemInstance& p, const SelectorSpec& sel,
                                     const MCConfig& cfg);

/// Closed-form value matching estimate_risk's units, when one applies.
std::optional<double> closed_form_risk(const ProblemInstance& p, const SelectorSpec& sel,
                                       LossKind loss);

struct BayesFloorResult {
  double estimate;
  double stderr_;
  double floor;
  bool pass;
};

/// Uniform-prior Bayes Hamming risk of `sel` against s * Psi+ (LowerBound) or
/// s * Psi-bar (TwoSided). pass = estimate >= floor - 3 stderr.
BayesFloorResult bayes_floor_check(const ProblemInstance& p, const SelectorSpec& sel,
                                   MCConfig cfg);

/// Normalized Hamming risk of the crowd selector over uniform-support instances.
SampleSummary simulate_crowd_risk(std::span<const WorkerRates> rates, std::size_t d,
                                  std::size_t s, std::size_t replications, std::uint64_t seed,
                                  unsigned threads = 0);

/// How s follows d in a sweep.
struct SparsityRule {
  enum class Kind { Fixed, Power } kind = Kind::Fixed;
  double value = 1.0;  // k for Fixed, beta for Power (s = ceil(d^{1 - beta}))

  std::size_t apply(std::size_t d) const;
  static SparsityRule parse(const std::string& text);  // "fixed:k" | "power:beta"
};

/// Which critical level the a-multipliers scale.
enum class PhaseBase { AlmostFull, Exact };

struct PhaseSweepConfig {
  std::vector<std::size_t> d_list;
  SparsityRule s_rule;
  std::vector<double> a_multipliers;
  std::vector<std::string> selectors;
  PhaseBase base = PhaseBase::AlmostFull;
  bool two_sided = true;  // TwoSided class, else LowerBound
  double sigma = 1.0;
  std::optional<std::size_t> s_star;  // for the adaptive selector
  MCConfig mc;
};

struct SweepRecord {
  std::size_t d;
  std::size_t s;
  double a;
  double sigma;
  double rho;
  Family family;
  std::string selector;
  LossKind loss_kind;
  double estimate;
  double stderr_;
  std::size_t replications;
  std::uint64_t seed;
  double a_multiplier;
  double a_almost_full;
  double a_exact;
  double t_star;
  std::optional<double> closed_form;
};

/// One estimate_risk per (d, multiplier, selector) cell, in that nesting order.
std::vector<SweepRecord> phase_sweep(const PhaseSweepConfig& cfg);

}  // namespace hamsel
