#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "hamsel/rng.hpp"

namespace hamsel {

/// Signal classes. LowerBound is theta_j >= a on the support, TwoSided is
/// |theta_j| >= a, Interval is theta_j >= a1 on the support and theta_j <= a0 off it
/// (for Bernoulli/Poisson the pair is the two rates).
struct LowerBound {
  double a;
};
struct TwoSided {
  double a;
};
struct Interval {
  double a0;
  double a1;
};
using Signal = std::variant<LowerBound, TwoSided, Interval>;

enum class Family { Gaussian, Bernoulli, Poisson };

std::string_view to_string(Family f) noexcept;
Family parse_family(std::string_view name);

/// Two-point families P0 / P1 used by the likelihood-ratio selector.
struct GaussianShift {
  double a0;
  double a1;
  double sigma;
};
struct BernoulliRates {
  double a0;
  double a1;
};
struct PoissonRates {
  double a0;
  double a1;
};
using FamilyParams = std::variant<GaussianShift, BernoulliRates, PoissonRates>;

/// Throws std::invalid_argument unless a0 < a1 and the rates are admissible.
void validate(const FamilyParams& family);

struct ProblemInstance {
  std::size_t d = 0;
  std::size_t s = 0;
  double sigma = 1.0;
  Signal signal = LowerBound{1.0};
  Family family = Family::Gaussian;

  /// Throws std::invalid_argument when the instance is outside its class.
  void validate() const;

  /// d/s - 1, formed as (d - s)/s from the integers.
  double odds() const noexcept {
    return static_cast<double>(d - s) / static_cast<double>(s);
  }

  /// Signal magnitude a (LowerBound/TwoSided) or a1 (Interval).
  double signal_level() const noexcept;

  /// Two-point family for Interval instances (any family). Throws otherwise.
  FamilyParams family_params() const;
};

/// log(d/s - 1) computed from the integer ratio (d - s)/s.
double log_odds(std::size_t d, std::size_t s);

/// Dense binary support indicator.
class SupportVector {
 public:
  SupportVector() = default;
  explicit SupportVector(std::size_t d) : bits_(d, 0) {}
  explicit SupportVector(std::vector<std::uint8_t> bits);

  static SupportVector from_indices(std::size_t d, std::span<const std::size_t> indices);
  /// Parses "0110"-style strings.
  static SupportVector from_bitstring(std::string_view bits);

  std::size_t size() const noexcept { return bits_.size(); }
  std::size_t weight() const noexcept;
  bool operator[](std::size_t j) const noexcept { return bits_[j] != 0; }
  void set(std::size_t j, bool on = true) noexcept { bits_[j] = on ? 1 : 0; }

  /// 0-based indices of the set bits, ascending.
  std::vector<std::size_t> indices() const;
  std::string bitstring() const;

  std::span<const std::uint8_t> bits() const noexcept { return bits_; }
  std::vector<std::uint8_t>& raw() noexcept { return bits_; }

  friend bool operator==(const SupportVector&, const SupportVector&) = default;

 private:
  std::vector<std::uint8_t> bits_;
};

using Observations = std::vector<double>;

/// Number of positions where a and b differ. Throws on length mismatch.
std::size_t hamming_distance(const SupportVector& a, const SupportVector& b);

struct GroundTruth {
  std::vector<double> theta;
  SupportVector eta;
};

/// Writes a uniformly random s-subset of {0..d-1} into `eta` (partial
/// Fisher-Yates over `scratch`, which is resized to d).
void draw_uniform_support(std::size_t d, std::size_t s, Rng& rng, SupportVector& eta,
                          std::vector<std::size_t>& scratch);

/// Draw from the least favourable prior: uniform support with every nonzero
/// equal to a (LowerBound) or to eps*a with one global sign eps = +-1 drawn
/// with probability 1/2 (TwoSided). Gaussian family only.
GroundTruth least_favorable_draw(const ProblemInstance& p, Rng& rng);

struct WorkerRates {
  double a0;  // P(vote 1 | class 0)
  double a1;  // P(vote 1 | class 1)
};

/// m workers voting on d items; votes are stored row-major (worker, item).
class CrowdInstance {
 public:
  CrowdInstance(std::size_t m, std::size_t d, std::vector<std::uint8_t> votes,
                std::vector<WorkerRates> rates);

  std::size_t workers() const noexcept { return m_; }
  std::size_t items() const noexcept { return d_; }
  bool vote(std::size_t worker, std::size_t item) const noexcept {
    return votes_[worker * d_ + item] != 0;
  }
  std::span<const WorkerRates> rates() const noexcept { return rates_; }

 private:
  std::size_t m_;
  std::size_t d_;
  std::vector<std::uint8_t> votes_;
  std::vector<WorkerRates> rates_;
};

/// Throws unless every worker has a0 != a1, both in (0, 1), and m >= 1.
void validate_rates(std::span<const WorkerRates> rates);

// Selector descriptions. Thresholds are finite; see selectors.hpp for the
// factories that build the minimax versions from a ProblemInstance.
struct OneSidedThreshold {
  double t;
};
struct TwoSidedThreshold {
  double t;
};
/// Selects j iff log cosh(a x_j / sigma^2) >= t.
struct CoshLlr {
  double a;
  double sigma;
  double t;
};
/// Selects j iff log(f1/f0)(x_j) >= log_cut, normally log(d/s - 1).
struct GeneralLlr {
  FamilyParams family;
  double log_cut;
};
struct TopS {
  std::size_t s;
  bool one_sided = true;
};
/// Two-sided threshold at sigma * sqrt(2 log d).
struct Universal {
  double sigma;
};
/// Dyadic-grid adaptive selector. c0 is carried for experiment planning only.
struct Adaptive {
  std::size_t s_star;
  double sigma;
  double c0 = 16.0;
};
using SelectorSpec =
    std::variant<OneSidedThreshold, TwoSidedThreshold, CoshLlr, GeneralLlr, TopS, Universal,
                 Adaptive>;

std::string_view selector_name(const SelectorSpec& spec) noexcept;

enum class LossKind { Hamming, NormalizedHamming, WrongRecoveryProb };

std::string_view to_string(LossKind k) noexcept;
LossKind parse_loss_kind(std::string_view name);

struct RiskReport {
  std::optional<double> closed_form;
  std::optional<double> bound_lower;
  std::optional<double> bound_upper;
  std::optional<double> mc_estimate;
  std::optional<double> mc_stderr;
  std::size_t replications = 0;
  std::uint64_t seed = 0;
  LossKind loss_kind = LossKind::Hamming;
};

}  // namespace hamsel
