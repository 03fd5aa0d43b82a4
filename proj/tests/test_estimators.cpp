#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "oracles.hpp"
#include "permfit/errors.hpp"
#include "permfit/estimators.hpp"
#include "permfit/ipfp.hpp"
#include "permfit/kendall.hpp"
#include "permfit/sampling.hpp"

using namespace permfit;

namespace {

Permutation perm(std::vector<std::int32_t> v) { return Permutation(std::move(v)); }

// PL score straight from the pairwise conditional likelihood: for each pair
// the log-odds of the observed arrangement against the swapped one is θy.
double naive_pl_score(const std::vector<std::int32_t>& v, const ScoreFunction& f, double theta) {
  const double n = double(v.size());
  double s = 0.0;
  for (std::size_t i = 1; i <= v.size(); ++i)
    for (std::size_t j = i + 1; j <= v.size(); ++j) {
      const double x1 = i / n, x2 = j / n, y1 = v[i - 1] / n, y2 = v[j - 1] / n;
      const double y = f(x1, y1) + f(x2, y2) - f(x1, y2) - f(x2, y1);
      // d/dθ log(e^{θy} / (e^{θy} + 1))
      s += y - y * std::exp(theta * y) / (std::exp(theta * y) + 1.0);
    }
  return s;
}

double bisect(const std::function<double(double)>& g, double lo, double hi) {
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (g(mid) > 0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

std::vector<Permutation> draws(const ModelSpec& model, std::size_t count, std::uint64_t seed,
                               SamplerKind kind = SamplerKind::swap, std::size_t burn = 100) {
  SampleOptions opts;
  opts.draws = count;
  opts.burn = burn;
  opts.thin = 20;
  opts.seed = seed;
  opts.sampler = kind;
  return sample(model, opts);
}

}  // namespace

// ---- root finding -------------------------------------------------------

TEST(RootFinding, LinearScore) {
  const auto r = find_decreasing_root([](double t) { return 3.7 - t; }, EstimateMethod::pl);
  ASSERT_TRUE(r.ok());
  EXPECT_NEAR(r.theta_hat, 3.7, 1e-8);
  EXPECT_LE(r.bracket_lo, 3.7);
  EXPECT_GE(r.bracket_hi, 3.7);
  EXPECT_GT(r.evaluations, 0u);
}

TEST(RootFinding, NoRootCarriesSign) {
  const auto up = find_decreasing_root([](double t) { return 100.0 - t; }, EstimateMethod::ml);
  EXPECT_EQ(up.status, EstimateStatus::no_root);
  EXPECT_EQ(up.no_root_sign, 1);
  const auto down = find_decreasing_root([](double t) { return -100.0 - t; }, EstimateMethod::ml);
  EXPECT_EQ(down.no_root_sign, -1);
  EXPECT_TRUE(std::isnan(down.theta_hat));
}

TEST(RootFinding, FlatScoreStopsAtResolution) {
  // A score that is tiny everywhere: the width criterion alone decides.
  const auto r = find_decreasing_root([](double t) { return 1e-12 * (0.5 - t); }, EstimateMethod::pl);
  ASSERT_TRUE(r.ok());
  EXPECT_NEAR(r.theta_hat, 0.5, 1e-8);
}

// ---- pseudo-likelihood --------------------------------------------------

TEST(PseudoLikelihood, ScoreMatchesPairwiseDefinition) {
  CounterRng rng(1);
  for (const auto& name : {"xy", "footrule", "sq"}) {
    const auto f = ScoreFunction::from_name(name);
    for (int t = 0; t < 20; ++t) {
      const auto v = oracle::random_values(2 + rng.below(40), rng);
      const double theta = 10 * rng.uniform() - 5;
      EXPECT_NEAR(pl_score(Permutation(v), f, theta), naive_pl_score(v, f, theta), 1e-10);
    }
  }
}

TEST(PseudoLikelihood, DerivativeMatchesFiniteDifference) {
  CounterRng rng(2);
  const auto f = ScoreFunction::xy();
  const Permutation p(oracle::random_values(60, rng));
  for (double theta : {-4.0, 0.0, 2.5}) {
    const double h = 1e-5;
    EXPECT_NEAR(pl_score_derivative(p, f, theta),
                (pl_score(p, f, theta + h) - pl_score(p, f, theta - h)) / (2 * h), 1e-6);
  }
}

TEST(PseudoLikelihood, EstimateSolvesNaiveScore) {
  CounterRng rng(3);
  const auto f = ScoreFunction::xy();
  for (int t = 0; t < 10; ++t) {
    const auto v = oracle::random_values(30 + rng.below(50), rng);
    const auto r = pl_estimate(Permutation(v), f);
    ASSERT_TRUE(r.ok());
    const double want = bisect([&](double th) { return naive_pl_score(v, f, th); }, -64, 64);
    EXPECT_NEAR(r.theta_hat, want, 1e-6);
  }
}

TEST(PseudoLikelihood, ExtremalDataHasNoRoot) {
  const auto up = pl_estimate(Permutation::identity(10), ScoreFunction::xy());
  EXPECT_EQ(up.status, EstimateStatus::no_root);
  EXPECT_EQ(up.no_root_sign, 1);
  const auto down = pl_estimate(Permutation::reversed(10), ScoreFunction::xy());
  EXPECT_EQ(down.no_root_sign, -1);
}

TEST(PseudoLikelihood, DegenerateScore) {
  const auto zero = ScoreFunction::custom("zero", [](double, double) { return 0.0; }, true, 0.0);
  const auto r = pl_estimate(perm({2, 1, 3}), zero);
  EXPECT_EQ(r.status, EstimateStatus::all_pairs_degenerate);
  // Additive scores cancel in every pair.
  const auto additive = ScoreFunction::custom("add", [](double x, double y) { return x + y * y; }, false,
                                              std::nullopt);
  EXPECT_EQ(pl_estimate(perm({3, 1, 4, 2}), additive).status, EstimateStatus::all_pairs_degenerate);
}

TEST(PseudoLikelihood, GaugeInvariance) {
  CounterRng rng(4);
  const auto f = ScoreFunction::footrule();
  const auto g = f.with_margins([](double x) { return std::exp(x); }, [](double y) { return -3 * y; });
  for (int t = 0; t < 10; ++t) {
    const Permutation p(oracle::random_values(40, rng));
    const auto a = pl_estimate(p, f), b = pl_estimate(p, g);
    ASSERT_EQ(a.status, b.status);
    if (a.ok()) {
      EXPECT_NEAR(a.theta_hat, b.theta_hat, 1e-12 * std::max(1.0, std::abs(a.theta_hat)) + 1e-8);
    }
  }
}

TEST(PseudoLikelihood, UniformDataCentresOnZero) {
  CounterRng rng(5);
  std::vector<double> est;
  for (int t = 0; t < 50; ++t) est.push_back(pl_estimate(Permutation(oracle::random_values(200, rng)),
                                                         ScoreFunction::xy()).theta_hat);
  std::nth_element(est.begin(), est.begin() + 25, est.end());
  EXPECT_LT(std::abs(est[25]), 0.5);
}

TEST(PseudoLikelihood, MultiSampleSums) {
  CounterRng rng(6);
  const auto f = ScoreFunction::xy();
  const Permutation a(oracle::random_values(50, rng)), b(oracle::random_values(50, rng));
  const std::vector<Permutation> ab{a, b};
  const auto family = ModelSpec::linear(f, 0.0, 50);
  EXPECT_NEAR(multi_sample_score(ab, family, 1.3, EstimateMethod::pl),
              pl_score(a, f, 1.3) + pl_score(b, f, 1.3), 1e-12);
  const std::vector<Permutation> one{a};
  EXPECT_EQ(estimate(one, family, EstimateMethod::pl).theta_hat, pl_estimate(a, f).theta_hat);
  const std::vector<Permutation> copies{a, a, a};
  EXPECT_NEAR(estimate(copies, family, EstimateMethod::pl).theta_hat, pl_estimate(a, f).theta_hat, 1e-7);
  const std::vector<Permutation> mixed{a, Permutation::identity(49)};
  EXPECT_THROW(multi_sample_score(mixed, family, 0.0, EstimateMethod::pl), SizeMismatch);
}

TEST(PseudoLikelihood, PoolingReducesSpread) {
  const auto model = ModelSpec::linear(ScoreFunction::xy(), 2.0, 60);
  const auto pool = draws(model, 400, 77, SamplerKind::auxiliary);
  std::vector<double> single, pooled;
  for (std::size_t i = 0; i < 40; ++i) single.push_back(pl_estimate(pool[i], ScoreFunction::xy()).theta_hat);
  for (std::size_t b = 0; b < 40; ++b) {
    const std::span<const Permutation> chunk(pool.data() + 10 * b, 10);
    pooled.push_back(pl_estimate(chunk, ScoreFunction::xy()).theta_hat);
  }
  const auto sd = [](const std::vector<double>& x) {
    double m = 0, s = 0;
    for (double v : x) m += v / double(x.size());
    for (double v : x) s += (v - m) * (v - m) / double(x.size() - 1);
    return std::sqrt(s);
  };
  EXPECT_LT(sd(pooled) / sd(single), 0.5);
}

// ---- limiting-density estimator ----------------------------------------

TEST(LimitingDensity, InvertsTheDerivative) {
  const auto f = ScoreFunction::xy();
  const double target = w_k_prime(f, 3.0, 60);
  const auto r = ld_estimate_from_statistic(target, f, 60);
  ASSERT_TRUE(r.ok());
  EXPECT_NEAR(r.theta_hat, 3.0, 1e-6);
  EXPECT_EQ(r.grid_order, 60u);
}

TEST(LimitingDensity, ScoreIsStatisticMinusDerivative) {
  CounterRng rng(8);
  const Permutation p(oracle::random_values(80, rng));
  const auto f = ScoreFunction::xy();
  EXPECT_NEAR(ld_score(p, f, 1.5, 40), linear_statistic(p, f) / 80.0 - w_k_prime(f, 1.5, 40), 1e-12);
}

TEST(LimitingDensity, CenteredStatisticOfUniformDataGivesSmallTheta) {
  CounterRng rng(9);
  const auto r = ld_estimate(Permutation(oracle::random_values(400, rng)), ScoreFunction::centered(), 100);
  ASSERT_TRUE(r.ok());
  EXPECT_LT(std::abs(r.theta_hat), 1.5);
}

TEST(LimitingDensity, AgreesWithExactMleAtSmallN) {
  // Same per-site statistic fed to both estimators, f = xy, n = 6, k = 600.
  const auto f = ScoreFunction::xy();
  const LinearStatisticLaw law(f, 6);
  for (double theta : {-1.0, 0.5, 2.0}) {
    const double s = law.mean_per_site(theta);
    const auto ml = ml_linear_from_statistic(s, law);
    const auto ld = ld_estimate_from_statistic(s, f, 600);
    ASSERT_TRUE(ml.ok());
    EXPECT_NEAR(ml.theta_hat, theta, 1e-6);
    EXPECT_TRUE(ld.ok()) << "statistic " << s << ": " << to_json(ld).dump();
    EXPECT_NEAR(ld.theta_hat, ml.theta_hat, 0.2) << "statistic " << s;
  }
}

// ---- exact ML -------------------------------------------------------------

TEST(ExactMl, LinearLawMatchesEnumeration) {
  const auto f = ScoreFunction::footrule();
  const LinearStatisticLaw law(f, 5);
  for (double theta : {-2.0, 0.0, 1.5}) {
    const auto pmf = brute_pmf(ModelSpec::linear(f, theta, 5));
    const auto perms = oracle::all_permutations(5);
    double mean = 0.0;
    for (std::size_t a = 0; a < perms.size(); ++a) {
      double s = 0.0;
      for (std::size_t i = 1; i <= 5; ++i) s += f(i / 5.0, perms[a][i - 1] / 5.0);
      mean += pmf[a] * s;
    }
    EXPECT_NEAR(law.mean_per_site(theta), mean / 5.0, 1e-12);
  }
}

TEST(ExactMl, KendallScoreAndEstimate) {
  const auto family = ModelSpec::kendall(0.0, 8);
  const auto p = perm({2, 1, 4, 3, 6, 5, 8, 7});
  for (double theta : {-1.0, 0.0, 2.0})
    EXPECT_NEAR(ml_score(p, family, theta), (4.0 / 8.0 - kendall_log_z_prime(8, theta)) / 8.0, 1e-13);
  const auto r = ml_exact(p, family);
  ASSERT_TRUE(r.ok());
  EXPECT_NEAR(kendall_log_z_prime(8, r.theta_hat), 0.5, 1e-7);

  // Data whose inversion count equals the mean at θ = 1.5 gives back 1.5.
  const auto m = ModelSpec::kendall(1.5, 8);
  const auto pmf = brute_pmf(m);
  const auto perms = oracle::all_permutations(8);
  double mean_inv = 0.0;
  for (std::size_t a = 0; a < perms.size(); ++a) mean_inv += pmf[a] * double(oracle::naive_inversions(perms[a]));
  const auto back = find_decreasing_root(
      [&](double t) { return mean_inv / 8.0 - kendall_log_z_prime(8, t); }, EstimateMethod::kendall_ml);
  EXPECT_NEAR(back.theta_hat, 1.5, 1e-7);
}

TEST(ExactMl, ExtremesHaveNoRoot) {
  EXPECT_EQ(ml_exact(Permutation::identity(7), ModelSpec::kendall(0.0, 7)).no_root_sign, -1);
  EXPECT_EQ(ml_exact(Permutation::reversed(7), ModelSpec::kendall(0.0, 7)).no_root_sign, 1);
  EXPECT_EQ(ml_exact(Permutation::identity(5), ModelSpec::linear(ScoreFunction::xy(), 0.0, 5)).no_root_sign, 1);
}

TEST(ExactMl, LinearNeedsEnumerableSize) {
  EXPECT_THROW(ml_exact(Permutation::identity(12), ModelSpec::linear(ScoreFunction::xy(), 0.0, 12)),
               DomainError);
}

// ---- Kendall limit estimator ------------------------------------------

TEST(KendallLd, QuarterDensityGivesZero) {
  // Inv/n² = 1/4 = C'(0).
  const auto r = find_decreasing_root([](double t) { return 0.25 - kendall_limit_c_prime(t); },
                                      EstimateMethod::kendall_ld);
  ASSERT_TRUE(r.ok());
  EXPECT_NEAR(r.theta_hat, 0.0, 1e-6);
}

TEST(KendallLd, IdentityHasNoRoot) {
  const auto r = kendall_ld_estimate(Permutation::identity(50));
  EXPECT_EQ(r.status, EstimateStatus::no_root);
  EXPECT_EQ(r.no_root_sign, -1);
}

TEST(KendallLd, RecoversThetaAtModerateN) {
  const auto sample_draws = draws(ModelSpec::kendall(2.0, 500), 10, 500, SamplerKind::swap, 300);
  std::vector<double> est;
  for (const auto& p : sample_draws) est.push_back(kendall_ld_estimate(p).theta_hat);
  std::sort(est.begin(), est.end());
  EXPECT_NEAR(0.5 * (est[4] + est[5]), 2.0, 0.6);
  EXPECT_NEAR(kendall_ld_score(sample_draws[0], 2.0),
              double(inversions(sample_draws[0])) / 250000.0 - kendall_limit_c_prime(2.0), 1e-15);
}

TEST(Dispatch, MethodsMustMatchFamily) {
  const std::vector<Permutation> one{Permutation::identity(5)};
  EXPECT_THROW(estimate(one, ModelSpec::kendall(0.0, 5), EstimateMethod::pl), UnsupportedError);
  EXPECT_THROW(estimate(one, ModelSpec::linear(ScoreFunction::xy(), 0.0, 5), EstimateMethod::kendall_ld),
               UnsupportedError);
}

// ---- uniformity and threshold tests ------------------------------------

TEST(Uniformity, MomentsMatchEnumeration) {
  for (std::size_t n : {3u, 5u, 7u}) {
    double m1 = 0.0, m2 = 0.0, count = 0.0;
    for (const auto& v : oracle::all_permutations(n)) {
      double s = 0.0;
      for (std::size_t i = 1; i <= n; ++i) s += double(i) * v[i - 1];
      s /= std::pow(double(n), 3);
      m1 += s, m2 += s * s, count += 1.0;
    }
    m1 /= count;
    const double var = m2 / count - m1 * m1;
    const auto t = uniformity_test(Permutation::identity(n));
    EXPECT_NEAR(t.mean, m1, 1e-14);
    EXPECT_NEAR(t.variance, var, 1e-14);
    const double nd = double(n);
    EXPECT_NEAR(t.statistic, nd * (nd + 1) * (2 * nd + 1) / 6 / (nd * nd * nd), 1e-14);
  }
}

TEST(Uniformity, NullCalibration) {
  CounterRng rng(366);
  int rejections = 0;
  const int reps = 4000;
  for (int t = 0; t < reps; ++t)
    if (uniformity_test(Permutation(oracle::random_values(366, rng))).p_normal < 0.05) ++rejections;
  EXPECT_NEAR(double(rejections) / reps, 0.05, 0.015);
}

TEST(Uniformity, ChebyshevIsVarianceOverSquaredGap) {
  const auto t = uniformity_test(Permutation::reversed(20));
  EXPECT_NEAR(t.chebyshev_bound, t.variance / ((t.statistic - t.mean) * (t.statistic - t.mean)), 1e-14);
  EXPECT_LT(t.z, 0.0);
  EXPECT_GT(t.p_normal, 0.99);
  const auto j = to_json(t);
  for (const char* key : {"statistic", "mean", "variance", "z", "p_normal", "chebyshev_bound"})
    EXPECT_TRUE(j.contains(key)) << key;
}

TEST(Threshold, Midpoint) {
  EXPECT_TRUE(threshold_test(1.01, 0.0, 2.0));
  EXPECT_FALSE(threshold_test(1.0, 0.0, 2.0));
  EXPECT_FALSE(threshold_test(-5.0, 0.0, 2.0));
  EXPECT_THROW(threshold_test(0.0, 2.0, 0.0), DomainError);
}

// ---- reporting ----------------------------------------------------------

TEST(Json, EstimateFields) {
  const auto ok = pl_estimate(perm({2, 4, 1, 5, 3, 6}), ScoreFunction::xy());
  const auto j = to_json(ok);
  for (const char* key : {"theta_hat", "method", "bracket_lo", "bracket_hi", "evaluations", "score_at_root",
                          "status"})
    EXPECT_TRUE(j.contains(key)) << key;
  EXPECT_EQ(j["method"], "PL");
  EXPECT_EQ(j["status"], "ok");

  const auto none = to_json(pl_estimate(Permutation::identity(6), ScoreFunction::xy()));
  EXPECT_EQ(none["status"], "no_root");
  EXPECT_EQ(none["sign"], "positive");
  EXPECT_TRUE(none["theta_hat"].is_null());

  const auto ld = to_json(ld_estimate_from_statistic(0.3, ScoreFunction::xy(), 20));
  EXPECT_EQ(ld["method"], "LD");
  EXPECT_EQ(ld["k"], 20);
}
