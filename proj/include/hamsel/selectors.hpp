#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "hamsel/model.hpp"

namespace hamsel {

/// Relative tolerance under which a log-likelihood ratio equal to its cut in
/// exact arithmetic still counts as ">=". Only discrete families can sit on
/// the boundary, and there the closed "≥" convention must survive rounding.
inline constexpr double kTieTolerance = 1e-12;

// Every selection event uses the closed inequality "≥ t".

SupportVector threshold_one_sided(std::span<const double> x, double t);
/// Throws for t < 0.
SupportVector threshold_two_sided(std::span<const double> x, double t);

/// a/2 + (sigma^2/a) log(d/s - 1). May be negative when s > d/2.
double minimax_threshold(std::size_t d, std::size_t s, double a, double sigma);

/// |x| cut equivalent to log cosh(a x / sigma^2) >= a^2/(2 sigma^2) + log(d/s - 1).
/// Returns 0 when e^{a^2/(2 sigma^2)} (d/s - 1) <= 1, i.e. everything is selected.
double cosh_abs_threshold(std::size_t d, std::size_t s, double a, double sigma);

/// a^2/(2 sigma^2) + log(d/s - 1), the cut on the log cosh statistic.
double cosh_log_threshold(std::size_t d, std::size_t s, double a, double sigma);

SupportVector cosh_selector(std::span<const double> x, std::size_t d, std::size_t s, double a,
                            double sigma);

/// Overflow-safe log cosh.
double log_cosh(double z) noexcept;

/// log(f1/f0)(x) for the two-point family.
double log_likelihood_ratio(const FamilyParams& family, double x);

/// True iff log(f1/f0)(x) >= log_cut under the tie convention above.
bool llr_selects(const FamilyParams& family, double x, double log_cut);

/// Observation-scale cut t(a0, a1): the selector is I(x >= t). For the
/// discrete families the value is snapped to the nearest integer when it
/// lies within kTieTolerance of it.
double mlr_threshold(const FamilyParams& family, double log_cut);

/// Throws when an entry is not a valid outcome of the family
/// (Bernoulli: {0,1}; Poisson: nonnegative integers).
void validate_observations(const FamilyParams& family, std::span<const double> x);

SupportVector llr_selector(std::span<const double> x, const FamilyParams& family, std::size_t d,
                           std::size_t s);

/// Sum over workers of the per-item log-likelihood ratio.
double crowd_llr(const CrowdInstance& c, std::size_t item);
/// Same statistic for one vote pattern (bit i = vote of worker i).
double crowd_llr(std::span<const WorkerRates> rates, std::span<const std::uint8_t> votes);
bool crowd_llr_selects(std::span<const WorkerRates> rates, std::span<const std::uint8_t> votes,
                       double log_cut);

SupportVector crowd_selector(const CrowdInstance& c, std::size_t s);

/// The s largest x_j (or |x_j|); ties go to the lowest index.
SupportVector top_s_selector(std::span<const double> x, std::size_t s, bool one_sided);

/// sigma * sqrt(2 log d).
double universal_threshold(std::size_t d, double sigma);
SupportVector universal_selector(std::span<const double> x, double sigma);

struct AdaptiveDiagnostics {
  std::size_t grid_size = 0;         // M
  double tau = 0.0;
  std::vector<std::size_t> grid;     // g_1..g_M
  std::vector<double> thresholds;    // w(g_1)..w(g_M)
  std::vector<std::size_t> counts;   // N_2..N_M (index 0 is k = 2)
  std::size_t chosen_m = 0;          // 1-based grid index
};

struct AdaptiveResult {
  SupportVector support;
  std::size_t chosen_m;
  double threshold;
  AdaptiveDiagnostics diagnostics;
};

/// sigma * sqrt(2 log(d/g - 1)).
double adaptive_block_threshold(std::size_t d, std::size_t g, double sigma);

AdaptiveResult adaptive_selector(std::span<const double> x, std::size_t s_star, double sigma);

/// Output of running any SelectorSpec.
struct Selection {
  SupportVector support;
  std::optional<double> threshold_used;
  std::optional<AdaptiveDiagnostics> adaptive;
};

Selection apply_selector(const SelectorSpec& spec, std::span<const double> x);

/// Builds the named selector for an instance: plus, abs, cosh, llr, tops,
/// tops-abs, universal, adaptive. `s_star` is needed by adaptive only.
SelectorSpec make_selector(std::string_view name, const ProblemInstance& p,
                           std::optional<std::size_t> s_star = std::nullopt);

}  // namespace hamsel
