#include "hamsel/model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace hamsel {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};

[[noreturn]] void reject(const std::string& what) { throw std::invalid_argument(what); }

bool finite_positive(double v) { return std::isfinite(v) && v > 0.0; }

}  // namespace

std::string_view to_string(Family f) noexcept {
  switch (f) {
    case Family::Gaussian: return "gaussian";
    case Family::Bernoulli: return "bernoulli";
    case Family::Poisson: return "poisson";
  }
  return "?";
}

Family parse_family(std::string_view name) {
  if (name == "gaussian") return Family::Gaussian;
  if (name == "bernoulli") return Family::Bernoulli;
  if (name == "poisson") return Family::Poisson;
  reject("unknown family '" + std::string(name) + "'");
}

void validate(const FamilyParams& family) {
  std::visit(Overloaded{
                 [](const GaussianShift& g) {
                   if (!finite_positive(g.sigma)) reject("gaussian family: sigma must be > 0");
                   if (!std::isfinite(g.a0) || !std::isfinite(g.a1) || !(g.a0 < g.a1)) {
                     reject("gaussian family: need finite a0 < a1");
                   }
                 },
                 [](const BernoulliRates& b) {
                   if (!(b.a0 > 0.0 && b.a0 < 1.0 && b.a1 > 0.0 && b.a1 < 1.0)) {
                     reject("bernoulli family: rates must lie in (0, 1)");
                   }
                   if (!(b.a0 < b.a1)) reject("bernoulli family: need a0 < a1");
                 },
                 [](const PoissonRates& p) {
                   if (!finite_positive(p.a0) || !finite_positive(p.a1)) {
                     reject("poisson family: rates must be positive");
                   }
                   if (!(p.a0 < p.a1)) reject("poisson family: need a0 < a1");
                 },
             },
             family);
}

void ProblemInstance::validate() const {
  if (s < 1 || s >= d) {
    reject("need 1 <= s < d (got d=" + std::to_string(d) + ", s=" + std::to_string(s) + ")");
  }
  if (!finite_positive(sigma)) reject("sigma must be positive and finite");
  std::visit(Overloaded{
                 [](const LowerBound& lb) {
                   if (!finite_positive(lb.a)) reject("signal level a must be > 0");
                 },
                 [](const TwoSided& ts) {
                   if (!finite_positive(ts.a)) reject("signal level a must be > 0");
                 },
                 [](const Interval& iv) {
                   if (!std::isfinite(iv.a0) || !std::isfinite(iv.a1) || !(iv.a0 < iv.a1)) {
                     reject("interval signal needs finite a0 < a1");
                   }
                 },
             },
             signal);
  if (family != Family::Gaussian) {
    if (!std::holds_alternative<Interval>(signal)) {
      reject(std::string(to_string(family)) + " family needs an interval (a0, a1) signal");
    }
    hamsel::validate(family_params());
  }
}

double ProblemInstance::signal_level() const noexcept {
  return std::visit(Overloaded{
                        [](const LowerBound& lb) { return lb.a; },
                        [](const TwoSided& ts) { return ts.a; },
                        [](const Interval& iv) { return iv.a1; },
                    },
                    signal);
}

FamilyParams ProblemInstance::family_params() const {
  const auto* iv = std::get_if<Interval>(&signal);
  if (iv == nullptr) {
    if (family == Family::Gaussian) {
      return GaussianShift{0.0, signal_level(), sigma};
    }
    reject("family parameters need an interval signal");
  }
  switch (family) {
    case Family::Gaussian: return GaussianShift{iv->a0, iv->a1, sigma};
    case Family::Bernoulli: return BernoulliRates{iv->a0, iv->a1};
    case Family::Poisson: return PoissonRates{iv->a0, iv->a1};
  }
  reject("unknown family");
}

double log_odds(std::size_t d, std::size_t s) {
  if (s < 1 || s >= d) reject("log_odds: need 1 <= s < d");
  return std::log(static_cast<double>(d - s) / static_cast<double>(s));
}

SupportVector::SupportVector(std::vector<std::uint8_t> bits) : bits_(std::move(bits)) {
  for (auto& b : bits_) b = b != 0 ? 1 : 0;
}

SupportVector SupportVector::from_indices(std::size_t d, std::span<const std::size_t> indices) {
  SupportVector v(d);
  for (std::size_t j : indices) {
    if (j >= d) reject("support index " + std::to_string(j) + " out of range");
    v.bits_[j] = 1;
  }
  return v;
}

SupportVector SupportVector::from_bitstring(std::string_view bits) {
  SupportVector v(bits.size());
  for (std::size_t j = 0; j < bits.size(); ++j) {
    if (bits[j] == '1') {
      v.bits_[j] = 1;
    } else if (bits[j] != '0') {
      reject("bitstring may only contain '0' and '1'");
    }
  }
  return v;
}

std::size_t SupportVector::weight() const noexcept {
  return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), std::uint8_t{1}));
}

std::vector<std::size_t> SupportVector::indices() const {
  std::vector<std::size_t> out;
  for (std::size_t j = 0; j < bits_.size(); ++j) {
    if (bits_[j]) out.push_back(j);
  }
  return out;
}

std::string SupportVector::bitstring() const {
  std::string out(bits_.size(), '0');
  for (std::size_t j = 0; j < bits_.size(); ++j) {
    if (bits_[j]) out[j] = '1';
  }
  return out;
}

std::size_t hamming_distance(const SupportVector& a, const SupportVector& b) {
  if (a.size() != b.size()) {
    reject("hamming_distance: length mismatch (" + std::to_string(a.size()) + " vs " +
           std::to_string(b.size()) + ")");
  }
  const auto x = a.bits();
  const auto y = b.bits();
  std::size_t count = 0;
  for (std::size_t j = 0; j < x.size(); ++j) count += x[j] != y[j];
  return count;
}

void draw_uniform_support(std::size_t d, std::size_t s, Rng& rng, SupportVector& eta,
                          std::vector<std::size_t>& scratch) {
  scratch.resize(d);
  for (std::size_t j = 0; j < d; ++j) scratch[j] = j;
  auto& bits = eta.raw();
  bits.assign(d, 0);
  for (std::size_t i = 0; i < s; ++i) {
    const std::size_t k = i + static_cast<std::size_t>(rng.below(d - i));
    std::swap(scratch[i], scratch[k]);
    bits[scratch[i]] = 1;
  }
}

GroundTruth least_favorable_draw(const ProblemInstance& p, Rng& rng) {
  // s == d is allowed here: the support is then forced to be everything.
  if (p.s < 1 || p.s > p.d) reject("least_favorable_draw: need 1 <= s <= d");
  if (p.s < p.d) p.validate();
  if (p.family != Family::Gaussian) reject("least_favorable_draw: Gaussian family only");
  if (std::holds_alternative<Interval>(p.signal)) {
    reject("least_favorable_draw: interval signals use the fixed two-point configuration");
  }
  GroundTruth gt{std::vector<double>(p.d, 0.0), SupportVector(p.d)};
  std::vector<std::size_t> scratch;
  draw_uniform_support(p.d, p.s, rng, gt.eta, scratch);
  double level = p.signal_level();
  if (std::holds_alternative<TwoSided>(p.signal) && rng.bernoulli(0.5)) level = -level;
  for (std::size_t j = 0; j < p.d; ++j) {
    if (gt.eta[j]) gt.theta[j] = level;
  }
  return gt;
}

CrowdInstance::CrowdInstance(std::size_t m, std::size_t d, std::vector<std::uint8_t> votes,
                             std::vector<WorkerRates> rates)
    : m_(m), d_(d), votes_(std::move(votes)), rates_(std::move(rates)) {
  if (m_ == 0 || d_ == 0) reject("crowd instance needs m >= 1 workers and d >= 1 items");
  if (votes_.size() != m_ * d_) reject("crowd votes: matrix size does not match m x d");
  if (rates_.size() != m_) {
    reject("crowd rates: expected " + std::to_string(m_) + " rows, got " +
           std::to_string(rates_.size()));
  }
  for (auto v : votes_) {
    if (v > 1) reject("crowd votes must be 0 or 1");
  }
  validate_rates(rates_);
}

void validate_rates(std::span<const WorkerRates> rates) {
  if (rates.empty()) reject("crowd rates: need at least one worker");
  for (std::size_t i = 0; i < rates.size(); ++i) {
    const auto& r = rates[i];
    if (!(r.a0 > 0.0 && r.a0 < 1.0 && r.a1 > 0.0 && r.a1 < 1.0)) {
      reject("crowd rates: worker " + std::to_string(i + 1) + " rates must lie in (0, 1)");
    }
    if (r.a0 == r.a1) {
      reject("crowd rates: worker " + std::to_string(i + 1) + " has a0 == a1 (uninformative)");
    }
  }
}

std::string_view selector_name(const SelectorSpec& spec) noexcept {
  return std::visit(Overloaded{
                        [](const OneSidedThreshold&) { return std::string_view("plus"); },
                        [](const TwoSidedThreshold&) { return std::string_view("abs"); },
                        [](const CoshLlr&) { return std::string_view("cosh"); },
                        [](const GeneralLlr&) { return std::string_view("llr"); },
                        [](const TopS& t) { return std::string_view(t.one_sided ? "tops" : "tops-abs"); },
                        [](const Universal&) { return std::string_view("universal"); },
                        [](const Adaptive&) { return std::string_view("adaptive"); },
                    },
                    spec);
}

std::string_view to_string(LossKind k) noexcept {
  switch (k) {
    case LossKind::Hamming: return "hamming";
    case LossKind::NormalizedHamming: return "normalized";
    case LossKind::WrongRecoveryProb: return "wrong-recovery";
  }
  return "?";
}

LossKind parse_loss_kind(std::string_view name) {
  if (name == "hamming") return LossKind::Hamming;
  if (name == "normalized") return LossKind::NormalizedHamming;
  if (name == "wrong-recovery") return LossKind::WrongRecoveryProb;
  reject("unknown loss kind '" + std::string(name) + "'");
}

}  // namespace hamsel
