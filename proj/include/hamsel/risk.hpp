#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>

#include "hamsel/model.hpp"

namespace hamsel {

// Closed-form per-component risks (minimax Hamming risk divided by s).
// All (d/s - 1) factors are formed as (d - s)/s.

/// One-sided class: (d/s-1) Phi(-a/2sigma - (sigma/a) L) + Phi(-a/2sigma + (sigma/a) L),
/// L = log(d/s - 1).
double psi_plus(std::size_t d, std::size_t s, double a, double sigma);

/// Two-sided thresholding bound, with the positive part in the second term.
double psi_two_sided(std::size_t d, std::size_t s, double a, double sigma);

/// Exact two-sided minimax risk. The two cosh probabilities reduce to
/// Gaussian intervals: with u = e^{a^2/2sigma^2}(d/s-1) and q = (sigma/a) arccosh(u),
///   (d/s-1) * 2 Phi(-q) + Phi(q - a/sigma) - Phi(-q - a/sigma),
/// and (d/s-1) when u <= 1.
double psi_bar(std::size_t d, std::size_t s, double a, double sigma);

/// P1(LLR < L) + (d/s-1) P0(LLR >= L) for a two-point family.
double psi_general(std::size_t d, std::size_t s, const FamilyParams& family);

/// Crowdsourcing risk by enumerating all 2^m vote patterns (m <= 20).
double psi_crowd_enumerate(std::span<const WorkerRates> rates, std::size_t d, std::size_t s);

struct CrowdRisk {
  double value;
  std::optional<double> stderr_;
  std::size_t replications = 0;
};

enum class CrowdMode { Enumerate, MonteCarlo };

inline constexpr std::size_t kMaxEnumeratedWorkers = 20;

/// Enumerate: exact value. MonteCarlo: simulated normalized Hamming risk of
/// the crowd selector over `replications` uniform-support instances.
CrowdRisk psi_crowd(std::span<const WorkerRates> rates, std::size_t d, std::size_t s,
                    CrowdMode mode, std::size_t replications = 0, std::uint64_t seed = 0,
                    unsigned threads = 0);

struct WrongRecoveryBounds {
  double upper_plus;        // s Psi+
  double upper_bar;         // s Psi-bar
  double upper_two_sided;   // 2 s Psi
  double lower_plus;        // s Psi+ / (1 + s Psi+)
  double lower_bar;         // s Psi-bar / (1 + s Psi-bar)
};

WrongRecoveryBounds wrong_recovery_bounds(std::size_t d, std::size_t s, double a, double sigma);

struct RecoveryBounds {
  double W;
  std::optional<double> delta;  // empty when W < 0
  double lower;
  double upper;
};

/// Non-asymptotic bounds on the unnormalized Hamming risk for s < d/2:
/// W = a^2/sigma^2 - 2 log((d-s)/s), Delta = W / (2 sqrt(2 log((d-s)/s) + W)),
/// lower = s Phi(-Delta), upper = (2 + sqrt(2 pi)) s Phi(-Delta).
/// For W < 0 the bounds are the trivial [0, (2 + sqrt(2 pi)) s / 2].
RecoveryBounds delta_bounds(std::size_t d, std::size_t s, double a, double sigma);

inline constexpr double kDeltaUpperFactor = 2.0 + 2.5066282746310002;  // 2 + sqrt(2 pi)

struct PhasePoint {
  std::size_t d;
  std::size_t s;
  double a_almost_full;  // sigma sqrt(2 log((d-s)/s))
  double a_exact;        // sigma (sqrt(2 log(d-s)) + sqrt(2 log s))
  double t_star;         // sigma sqrt(2 log(d-s))
  double W_star;         // 4 (log s + sqrt(log s log(d-s)))
};

/// Requires 2 <= s < d/2.
PhasePoint phase_point(std::size_t d, std::size_t s, double sigma);

/// sigma (2 log((d-s)/s) + A sqrt(log((d-s)/s)))^{1/2}; s < d/2, A >= 0.
double a0_adaptive(std::size_t d, std::size_t s, double A, double sigma);

/// Smallest A allowed by the adaptive growth condition:
/// c0 * sqrt(log log(d/s_star - 1)). Requires s_star <= d/4.
double adaptive_A_min(std::size_t d, std::size_t s_star, double c0 = 16.0);

}  // namespace hamsel
