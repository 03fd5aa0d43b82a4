#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "permfit/permfit.h"

namespace {

struct PermGuard {
  pf_permutation* p = nullptr;
  ~PermGuard() { pf_permutation_destroy(p); }
};
struct ScoreGuard {
  pf_score* f = nullptr;
  ~ScoreGuard() { pf_score_destroy(f); }
};
struct SetGuard {
  pf_sample_set* s = nullptr;
  ~SetGuard() { pf_sample_set_destroy(s); }
};

std::string text_of(pf_status (*fn)(const pf_permutation*, char*, size_t, size_t*), const pf_permutation* p) {
  size_t len = 0;
  EXPECT_EQ(fn(p, nullptr, 0, &len), PF_ERR_BUFFER);
  std::string out(len + 1, '\0');
  EXPECT_EQ(fn(p, out.data(), out.size(), &len), PF_OK);
  out.resize(len);
  return out;
}

const std::string kLottery = PERMFIT_DATA_DIR "/draft_lottery_1970.csv";

}  // namespace

TEST(CApi, StatusNames) {
  EXPECT_STREQ(pf_status_name(PF_OK), "ok");
  EXPECT_STREQ(pf_status_name(PF_NO_ROOT), "no root");
  EXPECT_STREQ(pf_status_name(PF_ERR_BUFFER), "buffer too small");
}

TEST(CApi, PermutationLifecycle) {
  const int32_t v[] = {3, 1, 4, 2};
  PermGuard p;
  ASSERT_EQ(pf_permutation_create(v, 4, &p.p), PF_OK);
  EXPECT_EQ(pf_permutation_size(p.p), 4u);
  int32_t back[4];
  ASSERT_EQ(pf_permutation_values(p.p, back, 4), PF_OK);
  EXPECT_EQ(std::memcmp(back, v, sizeof v), 0);
  EXPECT_EQ(pf_permutation_values(p.p, back, 3), PF_ERR_BUFFER);
  uint64_t inv = 0;
  ASSERT_EQ(pf_inversions(p.p, &inv), PF_OK);
  EXPECT_EQ(inv, 3u);
  EXPECT_EQ(text_of(pf_permutation_to_csv, p.p), "i,pi\n1,3\n2,1\n3,4\n4,2\n");
}

TEST(CApi, ErrorCodesAndMessages) {
  const int32_t bad[] = {1, 1, 2};
  pf_permutation* p = nullptr;
  EXPECT_EQ(pf_permutation_create(bad, 3, &p), PF_ERR_DOMAIN);
  EXPECT_EQ(p, nullptr);
  EXPECT_GT(std::strlen(pf_last_error()), 0u);
  EXPECT_EQ(pf_permutation_create(bad, 3, nullptr), PF_ERR_ARG);
  EXPECT_EQ(pf_permutation_load("/nonexistent/x.csv", &p), PF_ERR_IO);
  pf_score* f = nullptr;
  EXPECT_EQ(pf_score_builtin("cubic", &f), PF_ERR_DOMAIN);

  PermGuard a, b;
  ASSERT_EQ(pf_permutation_identity(3, &a.p), PF_OK);
  ASSERT_EQ(pf_permutation_identity(4, &b.p), PF_OK);
  double r = 0;
  EXPECT_EQ(pf_spearman_r(a.p, b.p, &r), PF_ERR_SIZE);
  pf_permutation_destroy(nullptr);
}

TEST(CApi, BinCountsAndFisherYates) {
  PermGuard p;
  ASSERT_EQ(pf_permutation_identity(4, &p.p), PF_OK);
  int64_t counts[4];
  ASSERT_EQ(pf_bin_counts(p.p, 2, counts), PF_OK);
  EXPECT_EQ(counts[0], 2);
  EXPECT_EQ(counts[1], 0);
  double lp = 0;
  ASSERT_EQ(pf_fisher_yates_logpmf(counts, 2, 4, &lp), PF_OK);
  EXPECT_NEAR(std::exp(lp), 1.0 / 6.0, 1e-14);  // C(4,2)⁻¹
}

namespace {
double product(double x, double y, void* ctx) { return *static_cast<double*>(ctx) * x * y; }
}  // namespace

TEST(CApi, CustomScoreMatchesBuiltin) {
  double scale = 1.0;
  ScoreGuard custom, builtin;
  ASSERT_EQ(pf_score_custom("prod", product, &scale, 1, -1.0, &custom.f), PF_OK);
  ASSERT_EQ(pf_score_builtin("xy", &builtin.f), PF_OK);
  PermGuard p;
  const int32_t v[] = {2, 5, 1, 4, 3};
  ASSERT_EQ(pf_permutation_create(v, 5, &p.p), PF_OK);
  double a = 0, b = 0;
  ASSERT_EQ(pf_linear_statistic(p.p, custom.f, &a), PF_OK);
  ASSERT_EQ(pf_linear_statistic(p.p, builtin.f, &b), PF_OK);
  EXPECT_DOUBLE_EQ(a, b);
  EXPECT_DOUBLE_EQ(b, (2 + 10 + 3 + 16 + 15) / 25.0);
  double bound = 0;
  ASSERT_EQ(pf_score_modulus_bound(builtin.f, 10, &bound), PF_OK);
  EXPECT_DOUBLE_EQ(bound, 0.2);
}

TEST(CApi, KendallNormalizers) {
  double lz = 0, direct = 0;
  ASSERT_EQ(pf_kendall_log_z(3, 3.0, &lz), PF_OK);
  const double q = std::exp(1.0);
  EXPECT_NEAR(lz, std::log(1 + 2 * q + 2 * q * q + q * q * q), 1e-12);
  pf_model m{PF_MODEL_KENDALL, nullptr, 3.0, 3};
  ASSERT_EQ(pf_brute_log_z(&m, &direct), PF_OK);
  EXPECT_NEAR(lz, direct, 1e-12);
  double cp = 0;
  ASSERT_EQ(pf_kendall_limit_c_prime(0.0, &cp), PF_OK);
  EXPECT_NEAR(cp, 0.25, 1e-9);
  std::vector<double> rho(16);
  ASSERT_EQ(pf_kendall_limit_density(0.0, 4, rho.data()), PF_OK);
  for (double x : rho) EXPECT_EQ(x, 1.0);
}

TEST(CApi, WkAndDensity) {
  ScoreGuard f;
  ASSERT_EQ(pf_score_builtin("xy", &f.f), PF_OK);
  pf_ipfp_options opts;
  pf_ipfp_options_default(&opts);
  EXPECT_EQ(opts.tol, 1e-12);
  EXPECT_EQ(opts.max_iter, 0u);
  pf_wk_result res{};
  ASSERT_EQ(pf_w_k(f.f, 0.0, 10, &opts, 0, &res), PF_OK);
  EXPECT_NEAR(res.w_k, 0.0, 1e-12);
  EXPECT_TRUE(res.converged);

  std::vector<double> grid(20 * 20);
  pf_wk_result info{};
  ASSERT_EQ(pf_limit_density(f.f, 5.0, 20, &opts, grid.data(), &info), PF_OK);
  EXPECT_NEAR(info.w_k, info.w_k_potentials, 1e-9);
  for (std::size_t r = 0; r < 20; ++r) {
    double row = 0;
    for (std::size_t s = 0; s < 20; ++s) row += grid[r * 20 + s] / 20.0;
    EXPECT_NEAR(row, 1.0, 1e-9);
  }

  pf_ipfp_options tight{1e-14, 2};
  EXPECT_EQ(pf_w_k(f.f, 40.0, 50, &tight, 0, &res), PF_ERR_NONCONVERGENCE);
  EXPECT_EQ(pf_w_k(f.f, 40.0, 50, &tight, 1, &res), PF_OK);
  EXPECT_FALSE(res.converged);
  EXPECT_EQ(res.iterations, 2u);
}

TEST(CApi, FitLotteryAndNoRoot) {
  PermGuard pi, tau;
  ASSERT_EQ(pf_lottery_load(kLottery.c_str(), &pi.p, &tau.p), PF_OK);
  SetGuard set;
  ASSERT_EQ(pf_sample_set_create(&set.s), PF_OK);
  ASSERT_EQ(pf_sample_set_push(set.s, tau.p), PF_OK);
  ScoreGuard f;
  ASSERT_EQ(pf_score_builtin("xy", &f.f), PF_OK);
  pf_model model{PF_MODEL_LINEAR, f.f, 0.0, 366};
  pf_fit_options opts;
  pf_fit_options_default(&opts);
  pf_estimate est{};
  ASSERT_EQ(pf_fit(set.s, &model, PF_METHOD_PL, &opts, &est), PF_OK);
  EXPECT_NEAR(est.theta_hat, 2.92, 0.01);
  size_t len = 0;
  EXPECT_EQ(pf_estimate_to_json(&est, nullptr, 0, &len), PF_ERR_BUFFER);
  std::string json(len + 1, '\0');
  ASSERT_EQ(pf_estimate_to_json(&est, json.data(), json.size(), &len), PF_OK);
  EXPECT_NE(json.find("\"method\":\"PL\""), std::string::npos);

  double score = 0;
  ASSERT_EQ(pf_multi_sample_score(set.s, &model, est.theta_hat, PF_METHOD_PL, &opts, &score), PF_OK);
  EXPECT_LT(std::abs(score), 1e-6);

  SetGuard id;
  PermGuard idp;
  ASSERT_EQ(pf_sample_set_create(&id.s), PF_OK);
  ASSERT_EQ(pf_permutation_identity(366, &idp.p), PF_OK);
  ASSERT_EQ(pf_sample_set_push(id.s, idp.p), PF_OK);
  EXPECT_EQ(pf_fit(id.s, &model, PF_METHOD_PL, &opts, &est), PF_NO_ROOT);
  EXPECT_EQ(est.status, PF_ESTIMATE_NO_ROOT);
  EXPECT_EQ(est.no_root_sign, 1);
  EXPECT_EQ(pf_fit(id.s, &model, PF_METHOD_KENDALL_LD, &opts, &est), PF_ERR_UNSUPPORTED);
}

TEST(CApi, UniformityAndThreshold) {
  PermGuard pi, tau;
  ASSERT_EQ(pf_lottery_load(kLottery.c_str(), &pi.p, &tau.p), PF_OK);
  pf_uniformity u{};
  ASSERT_EQ(pf_uniformity_test(tau.p, &u), PF_OK);
  EXPECT_NEAR(u.statistic, 0.2702, 5e-5);
  int reject = -1;
  ASSERT_EQ(pf_threshold_test(1.5, 0.0, 2.0, &reject), PF_OK);
  EXPECT_EQ(reject, 1);
  EXPECT_EQ(pf_threshold_test(1.5, 2.0, 0.0, &reject), PF_ERR_DOMAIN);
}

TEST(CApi, SamplingIsDeterministic) {
  ScoreGuard f;
  ASSERT_EQ(pf_score_builtin("xy", &f.f), PF_OK);
  pf_model model{PF_MODEL_LINEAR, f.f, 2.0, 30};
  pf_sample_options opts;
  pf_sample_options_default(&opts);
  opts.draws = 3;
  opts.sampler = PF_SAMPLER_AUX;
  opts.seed = 5;
  int aux = 0;
  ASSERT_EQ(pf_supports_aux(&model, &aux), PF_OK);
  EXPECT_EQ(aux, 1);
  SetGuard a, b;
  ASSERT_EQ(pf_sample(&model, &opts, &a.s), PF_OK);
  ASSERT_EQ(pf_sample(&model, &opts, &b.s), PF_OK);
  ASSERT_EQ(pf_sample_set_count(a.s), 3u);
  for (size_t i = 0; i < 3; ++i) {
    PermGuard x, y;
    ASSERT_EQ(pf_sample_set_get(a.s, i, &x.p), PF_OK);
    ASSERT_EQ(pf_sample_set_get(b.s, i, &y.p), PF_OK);
    double r = 0;
    ASSERT_EQ(pf_spearman_r(x.p, y.p, &r), PF_OK);
    EXPECT_EQ(r, 1.0);
  }
  PermGuard out;
  EXPECT_EQ(pf_sample_set_get(a.s, 3, &out.p), PF_ERR_ARG);

  pf_model kendall{PF_MODEL_KENDALL, nullptr, 1.0, 30};
  SetGuard c;
  EXPECT_EQ(pf_sample(&kendall, &opts, &c.s), PF_ERR_UNSUPPORTED);
}

TEST(CApi, SampleSetCsvRoundTrip) {
  SetGuard set;
  ASSERT_EQ(pf_sample_set_create(&set.s), PF_OK);
  for (uint64_t seed : {1u, 2u}) {
    PermGuard p;
    ASSERT_EQ(pf_uniform_permutation(6, seed, &p.p), PF_OK);
    ASSERT_EQ(pf_sample_set_push(set.s, p.p), PF_OK);
  }
  size_t len = 0;
  ASSERT_EQ(pf_sample_set_to_csv(set.s, nullptr, 0, &len), PF_ERR_BUFFER);
  std::string csv(len + 1, '\0');
  ASSERT_EQ(pf_sample_set_to_csv(set.s, csv.data(), csv.size(), &len), PF_OK);
  csv.resize(len);
  EXPECT_EQ(csv.rfind("draw,i,pi\n", 0), 0u);

  const auto path = std::filesystem::temp_directory_path() / "permfit_capi_multi.csv";
  std::ofstream(path) << csv;
  SetGuard back;
  ASSERT_EQ(pf_sample_set_create(&back.s), PF_OK);
  ASSERT_EQ(pf_sample_set_load(back.s, path.c_str()), PF_OK);
  EXPECT_EQ(pf_sample_set_count(back.s), 2u);
}

TEST(CApi, LotteryReportJson) {
  pf_lottery_options opts;
  pf_lottery_options_default(&opts);
  EXPECT_EQ(opts.k, 1000u);
  opts.k = 200;  // keeps the test quick
  size_t len = 0;
  ASSERT_EQ(pf_lottery_report(kLottery.c_str(), &opts, nullptr, 0, &len), PF_ERR_BUFFER);
  std::string json(len + 1, '\0');
  ASSERT_EQ(pf_lottery_report(kLottery.c_str(), &opts, json.data(), json.size(), &len), PF_OK);
  EXPECT_NE(json.find("\"spearman_r\""), std::string::npos);
}
