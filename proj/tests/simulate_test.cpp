#include "hamsel/simulate.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "hamsel/risk.hpp"
#include "hamsel/selectors.hpp"

namespace hamsel {
namespace {

ProblemInstance instance(std::size_t d, std::size_t s, Signal signal, double sigma = 1.0) {
  ProblemInstance p;
  p.d = d;
  p.s = s;
  p.sigma = sigma;
  p.signal = signal;
  return p;
}

MCConfig config(std::size_t reps, std::uint64_t seed, LossKind loss = LossKind::Hamming) {
  MCConfig c;
  c.replications = reps;
  c.seed = seed;
  c.loss_kind = loss;
  return c;
}

double joint_se(const RiskReport& a, const RiskReport& b) {
  return std::hypot(*a.mc_stderr, *b.mc_stderr);
}

TEST(Generate, IndependentVariance) {
  Rng rng(1, 0);
  const std::vector<double> theta(1'000'000, 0.0);
  const auto x = generate_gaussian(theta, 1.7, 0.0, rng);
  const auto sum = summarize(x);
  double var = 0.0;
  for (double v : x) var += (v - sum.mean) * (v - sum.mean);
  var /= static_cast<double>(x.size() - 1);
  EXPECT_NEAR(var, 1.7 * 1.7, 0.01 * 1.7 * 1.7);
}

TEST(Generate, EquicorrelatedPairs) {
  const std::vector<double> theta = {1.0, -2.0};
  const int n = 1'000'000;
  double s0 = 0, s1 = 0, s00 = 0, s11 = 0, s01 = 0;
  for (int i = 0; i < n; ++i) {
    Rng rng = Rng::for_replication(2, i);
    const auto x = generate_gaussian(theta, 1.0, 0.5, rng);
    s0 += x[0];
    s1 += x[1];
    s00 += x[0] * x[0];
    s11 += x[1] * x[1];
    s01 += x[0] * x[1];
  }
  const double m0 = s0 / n;
  const double m1 = s1 / n;
  const double cov = s01 / n - m0 * m1;
  const double corr = cov / std::sqrt((s00 / n - m0 * m0) * (s11 / n - m1 * m1));
  EXPECT_NEAR(corr, 0.5, 0.01);
  EXPECT_NEAR(m0, 1.0, 0.01);
  EXPECT_NEAR(m1, -2.0, 0.01);
}

TEST(Generate, RejectsBadCorrelation) {
  Rng rng(0, 0);
  const std::vector<double> theta(3, 0.0);
  EXPECT_THROW(generate_gaussian(theta, 1.0, 1.0, rng), std::invalid_argument);
  EXPECT_THROW(generate_gaussian(theta, 1.0, -0.1, rng), std::invalid_argument);
  EXPECT_THROW(generate_gaussian(theta, 0.0, 0.1, rng), std::invalid_argument);
}

TEST(Generate, FamilyDraws) {
  Rng rng(3, 0);
  const std::size_t d = 200'000;
  std::vector<std::size_t> idx = {3, 70, 12345};
  const auto eta = SupportVector::from_indices(d, idx);
  const auto x = generate_family(eta, PoissonRates{2.5, 1e6}, rng);
  std::size_t big = 0;
  double sum = 0.0;
  for (std::size_t j = 0; j < d; ++j) {
    if (x[j] > 1000.0) {
      ++big;
      EXPECT_TRUE(eta[j]);
    } else {
      sum += x[j];
    }
  }
  EXPECT_EQ(big, 3u);
  const double n = static_cast<double>(d - 3);
  EXPECT_NEAR(sum / n, 2.5, 3.0 * std::sqrt(2.5 / n));
  EXPECT_THROW(generate_family(eta, BernoulliRates{0.3, 1.0}, rng), std::invalid_argument);
  const auto b = generate_family(eta, BernoulliRates{0.3, 0.6}, rng);
  for (double v : b) EXPECT_TRUE(v == 0.0 || v == 1.0);
}

TEST(Summarize, MeanAndStderr) {
  const std::vector<double> v = {1.0, 2.0, 3.0, 4.0};
  const auto s = summarize(v);
  EXPECT_EQ(s.mean, 2.5);
  EXPECT_NEAR(s.stderr_, std::sqrt(5.0 / 3.0 / 4.0), 1e-15);
}

TEST(MCConfig, Validation) {
  MCConfig c;
  c.replications = 0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c.replications = 10;
  c.rho = 1.0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c.rho = 0.99;
  EXPECT_NO_THROW(c.validate());
}

TEST(EstimateRisk, NoiselessIsExact) {
  const auto p = instance(200, 10, LowerBound{1.0}, 1e-3);
  const auto sel = make_selector("plus", p);
  const auto r = estimate_risk(p, sel, config(2000, 5));
  EXPECT_EQ(*r.mc_estimate, 0.0);
  EXPECT_EQ(*r.mc_stderr, 0.0);
}

TEST(EstimateRisk, MatchesPsiPlus) {
  const auto p = instance(200, 10, LowerBound{3.0});
  const auto r = estimate_risk(p, make_selector("plus", p), config(100'000, 1));
  const double closed = 10.0 * psi_plus(200, 10, 3.0, 1.0);
  ASSERT_TRUE(r.closed_form.has_value());
  EXPECT_NEAR(*r.closed_form, closed, 1e-12);
  EXPECT_NEAR(*r.mc_estimate, closed, 3.0 * *r.mc_stderr);
  EXPECT_EQ(r.replications, 100'000u);
  EXPECT_EQ(r.seed, 1u);
}

TEST(EstimateRisk, CorrelationDoesNotChangeSeparableRisk) {
  const auto p = instance(200, 10, LowerBound{3.0});
  const auto sel = make_selector("plus", p);
  auto c = config(100'000, 2);
  const auto r0 = estimate_risk(p, sel, c);
  c.rho = 0.8;
  const auto r8 = estimate_risk(p, sel, c);
  EXPECT_NEAR(*r0.mc_estimate, *r8.mc_estimate, 3.0 * joint_se(r0, r8));
}

TEST(EstimateRisk, IdenticalAcrossThreadCounts) {
  const auto p = instance(300, 12, TwoSided{2.5});
  for (const char* name : {"cosh", "tops-abs", "universal"}) {
    const auto sel = make_selector(name, p);
    auto c = config(5000, 77);
    c.rho = 0.3;
    c.threads = 1;
    const auto base = replicate_losses(p, sel, c);
    for (unsigned t : {2u, 3u, 8u}) {
      c.threads = t;
      EXPECT_EQ(replicate_losses(p, sel, c), base) << name << " threads " << t;
    }
    c.threads = 5;
    const auto rep = estimate_risk(p, sel, c);
    c.threads = 1;
    EXPECT_EQ(*estimate_risk(p, sel, c).mc_estimate, *rep.mc_estimate);
  }
}

TEST(EstimateRisk, WrongRecoveryBelowHamming) {
  const auto p = instance(500, 5, LowerBound{4.0});
  const auto sel = make_selector("plus", p);
  const auto ham = estimate_risk(p, sel, config(20'000, 3, LossKind::Hamming));
  const auto wr = estimate_risk(p, sel, config(20'000, 3, LossKind::WrongRecoveryProb));
  EXPECT_LE(*wr.mc_estimate, *ham.mc_estimate + 3.0 * joint_se(ham, wr));
  ASSERT_TRUE(wr.bound_lower && wr.bound_upper);
  const double sp = 5.0 * psi_plus(500, 5, 4.0, 1.0);
  EXPECT_NEAR(*wr.bound_upper, sp, 1e-12);
  EXPECT_NEAR(*wr.bound_lower, sp / (1.0 + sp), 1e-12);
}

TEST(EstimateRisk, NormalizedLossDividesByS) {
  const auto p = instance(200, 10, TwoSided{3.0});
  const auto sel = make_selector("cosh", p);
  const auto ham = estimate_risk(p, sel, config(3000, 4, LossKind::Hamming));
  const auto nor = estimate_risk(p, sel, config(3000, 4, LossKind::NormalizedHamming));
  EXPECT_NEAR(*nor.mc_estimate * 10.0, *ham.mc_estimate, 1e-12);
  EXPECT_NEAR(*nor.closed_form, psi_bar(200, 10, 3.0, 1.0), 1e-12);
}

TEST(EstimateRisk, StressModeDoesNotIncreaseRisk) {
  const auto p = instance(200, 10, TwoSided{2.0});
  for (const char* name : {"cosh", "abs"}) {
    const auto sel = make_selector(name, p);
    auto c = config(20'000, 8);
    const auto base = estimate_risk(p, sel, c);
    c.stress = true;
    const auto stressed = estimate_risk(p, sel, c);
    EXPECT_LE(*stressed.mc_estimate, *base.mc_estimate + 3.0 * joint_se(base, stressed)) << name;
  }
}

TEST(EstimateRisk, DeltaBoundsChain) {
  const std::size_t d = 400;
  const std::size_t s = 8;
  for (double a : {3.5, 4.5, 5.5}) {
    const auto p = instance(d, s, TwoSided{a});
    const auto r = estimate_risk(p, make_selector("abs", p), config(20'000, 9));
    const auto b = delta_bounds(d, s, a, 1.0);
    ASSERT_GT(b.W, 0.0);
    EXPECT_GE(*r.mc_estimate, b.lower - 3.0 * *r.mc_stderr) << a;
    EXPECT_LE(*r.mc_estimate, b.upper + 3.0 * *r.mc_stderr) << a;
  }
}

TEST(EstimateRisk, DiscreteFamiliesMatchPsiGeneral) {
  ProblemInstance p = instance(60, 6, Interval{0.15, 0.7});
  p.family = Family::Bernoulli;
  const auto sel = make_selector("llr", p);
  const auto r = estimate_risk(p, sel, config(40'000, 10, LossKind::NormalizedHamming));
  ASSERT_TRUE(r.closed_form.has_value());
  EXPECT_NEAR(*r.closed_form, psi_general(60, 6, BernoulliRates{0.15, 0.7}), 1e-15);
  EXPECT_NEAR(*r.mc_estimate, *r.closed_form, 3.0 * *r.mc_stderr);

  p.family = Family::Poisson;
  p.signal = Interval{2.0, 9.0};
  const auto rp = estimate_risk(p, make_selector("llr", p), config(40'000, 11));
  EXPECT_NEAR(*rp.mc_estimate, *rp.closed_form, 3.0 * *rp.mc_stderr);
}

TEST(EstimateRisk, GaussianIntervalClosedForm) {
  const auto p = instance(100, 5, Interval{1.0, 3.5});
  const auto r = estimate_risk(p, make_selector("llr", p), config(40'000, 12));
  EXPECT_NEAR(*r.closed_form, 5.0 * psi_general(100, 5, GaussianShift{1.0, 3.5, 1.0}), 1e-12);
  EXPECT_NEAR(*r.mc_estimate, *r.closed_form, 3.0 * *r.mc_stderr);
}

TEST(EstimateRisk, RejectsIncompatiblePairings) {
  ProblemInstance p = instance(50, 5, Interval{1.0, 3.0});
  p.family = Family::Poisson;
  EXPECT_THROW(estimate_risk(p, CoshLlr{1.0, 1.0, 0.5}, config(10, 1)), std::invalid_argument);
  EXPECT_THROW(estimate_risk(p, GeneralLlr{BernoulliRates{0.1, 0.2}, 0.0}, config(10, 1)),
               std::invalid_argument);
  auto c = config(10, 1);
  c.rho = 0.5;
  EXPECT_THROW(estimate_risk(p, make_selector("llr", p), c), std::invalid_argument);
}

TEST(BayesFloor, Examples) {
  const auto plus = instance(200, 10, LowerBound{3.0});
  const auto eq = bayes_floor_check(plus, make_selector("plus", plus), config(50'000, 13));
  EXPECT_TRUE(eq.pass);
  EXPECT_NEAR(eq.estimate, eq.floor, 3.0 * eq.stderr_);
  const auto tops = bayes_floor_check(plus, make_selector("tops", plus), config(50'000, 14));
  EXPECT_TRUE(tops.pass);

  const auto far = instance(1000, 5, TwoSided{3.0 * phase_point(1000, 5, 1.0).a_exact});
  const auto uni = bayes_floor_check(far, make_selector("universal", far), config(2000, 15));
  EXPECT_TRUE(uni.pass);
  EXPECT_LT(uni.floor, 1e-6);
  // Roughly d P(|xi| >= sqrt(2 log d)) false positives remain.
  EXPECT_LT(uni.estimate, 0.5);
}

TEST(Crowd, SimulationAgreesWithEnumeration) {
  const std::vector<WorkerRates> w = {{0.2, 0.7}, {0.35, 0.9}, {0.1, 0.55}};
  const auto mc = simulate_crowd_risk(w, 30, 6, 40'000, 16);
  EXPECT_NEAR(mc.mean, psi_crowd_enumerate(w, 30, 6), 3.0 * mc.stderr_);
}

TEST(SparsityRule, ParseAndApply) {
  EXPECT_EQ(SparsityRule::parse("power:0.5").apply(10'000), 100u);
  EXPECT_EQ(SparsityRule::parse("power:0.5").apply(1'000), 32u);
  EXPECT_EQ(SparsityRule::parse("fixed:7").apply(1'000), 7u);
  EXPECT_THROW(SparsityRule::parse("power"), std::invalid_argument);
  EXPECT_THROW(SparsityRule::parse("fixed:0"), std::invalid_argument);
  EXPECT_THROW(SparsityRule::parse("power:1.5"), std::invalid_argument);
  EXPECT_THROW(SparsityRule::parse("linear:2"), std::invalid_argument);
}

PhaseSweepConfig sweep(std::vector<std::size_t> ds, const char* rule, std::vector<double> mult,
                       std::vector<std::string> sels, std::size_t reps, LossKind loss) {
  PhaseSweepConfig cfg;
  cfg.d_list = std::move(ds);
  cfg.s_rule = SparsityRule::parse(rule);
  cfg.a_multipliers = std::move(mult);
  cfg.selectors = std::move(sels);
  cfg.mc = config(reps, 17, loss);
  return cfg;
}

TEST(PhaseSweep, RecordsCarryPhasePoints) {
  auto cfg = sweep({100, 1000}, "power:0.5", {1.0, 2.0}, {"cosh", "universal"}, 200,
                   LossKind::NormalizedHamming);
  const auto rows = phase_sweep(cfg);
  ASSERT_EQ(rows.size(), 8u);
  EXPECT_EQ(rows[0].d, 100u);
  EXPECT_EQ(rows[0].selector, "cosh");
  EXPECT_EQ(rows[1].selector, "universal");
  EXPECT_EQ(rows[2].a_multiplier, 2.0);
  EXPECT_EQ(rows[4].d, 1000u);
  for (const auto& r : rows) {
    const auto pp = phase_point(r.d, r.s, 1.0);
    EXPECT_EQ(r.a_almost_full, pp.a_almost_full);
    EXPECT_EQ(r.a_exact, pp.a_exact);
    EXPECT_EQ(r.t_star, pp.t_star);
    EXPECT_DOUBLE_EQ(r.a, r.a_multiplier * pp.a_almost_full);
  }
  EXPECT_EQ(phase_sweep(cfg).back().estimate, rows.back().estimate);
}

TEST(PhaseSweep, AboveTheTransitionRiskFallsWithD) {
  auto cfg = sweep({100, 1000, 10'000}, "power:0.5", {2.0}, {"cosh"}, 2000,
                   LossKind::NormalizedHamming);
  const auto rows = phase_sweep(cfg);
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_GT(rows[0].estimate, rows[1].estimate);
  EXPECT_GT(rows[1].estimate, rows[2].estimate);
}

TEST(PhaseSweep, AtTheTransitionNoSelectorBeatsOneHalf) {
  auto cfg = sweep({101}, "fixed:1", {1.0}, {"plus", "tops"}, 20'000, LossKind::NormalizedHamming);
  cfg.two_sided = false;
  for (const auto& r : phase_sweep(cfg)) {
    EXPECT_GE(r.estimate, 0.5 - 3.0 * r.stderr_) << r.selector;
  }
}

TEST(PhaseSweep, RejectsBadGrids) {
  auto cfg = sweep({}, "fixed:1", {1.0}, {"plus"}, 10, LossKind::Hamming);
  EXPECT_THROW(phase_sweep(cfg), std::invalid_argument);
  cfg = sweep({100}, "fixed:60", {1.0}, {"plus"}, 10, LossKind::Hamming);
  EXPECT_THROW(phase_sweep(cfg), std::invalid_argument);
  cfg = sweep({100}, "fixed:5", {-1.0}, {"plus"}, 10, LossKind::Hamming);
  EXPECT_THROW(phase_sweep(cfg), std::invalid_argument);
  cfg = sweep({100}, "fixed:5", {1.0}, {"nope"}, 10, LossKind::Hamming);
  EXPECT_THROW(phase_sweep(cfg), std::invalid_argument);
}

}  // namespace
}  // namespace hamsel
