#ifndef PERMFIT_PERMFIT_H
#define PERMFIT_PERMFIT_H

/* C interface to the permfit library. Every call returns a pf_status;
 * on failure pf_last_error() describes the problem for the calling thread.
 * Permutations are 1-based throughout. Functions producing text write into
 * a caller buffer: *len receives the length without the terminator, and
 * PF_ERR_BUFFER is returned (with *len set) when cap is too small. */

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(PERMFIT_BUILDING)
#    define PF_API __declspec(dllexport)
#  else
#    define PF_API __declspec(dllimport)
#  endif
#else
#  define PF_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum pf_status {
  PF_OK = 0,
  PF_ERR_INTERNAL = 1,
  PF_NO_ROOT = 2, /* estimator found no sign change; the estimate is still filled in */
  PF_ERR_DOMAIN = 3,
  PF_ERR_IO = 4,
  PF_ERR_SIZE = 5,
  PF_ERR_NONCONVERGENCE = 6,
  PF_ERR_UNSUPPORTED = 7,
  PF_ERR_ARG = 8,
  PF_ERR_BUFFER = 9
} pf_status;

PF_API const char* pf_last_error(void);
PF_API const char* pf_status_name(pf_status status);

/* ---- permutations ---------------------------------------------------- */

typedef struct pf_permutation pf_permutation;

PF_API pf_status pf_permutation_create(const int32_t* values, size_t n, pf_permutation** out);
PF_API pf_status pf_permutation_identity(size_t n, pf_permutation** out);
/* Reads an `i,pi` CSV. */
PF_API pf_status pf_permutation_load(const char* path, pf_permutation** out);
PF_API void pf_permutation_destroy(pf_permutation* pi);
PF_API size_t pf_permutation_size(const pf_permutation* pi);
/* Copies pi(1..n) into out; PF_ERR_BUFFER if cap < n. */
PF_API pf_status pf_permutation_values(const pf_permutation* pi, int32_t* out, size_t cap);
PF_API pf_status pf_permutation_to_csv(const pf_permutation* pi, char* buf, size_t cap, size_t* len);

PF_API pf_status pf_inversions(const pf_permutation* pi, uint64_t* out);
PF_API pf_status pf_spearman_r(const pf_permutation* pi, const pf_permutation* sigma, double* out);
/* counts receives k*k entries, row-major. */
PF_API pf_status pf_bin_counts(const pf_permutation* pi, size_t k, int64_t* counts);
PF_API pf_status pf_fisher_yates_logpmf(const int64_t* counts, size_t k, size_t n, double* out);
PF_API pf_status pf_cdf_distance(const pf_permutation* pi, double* out);

/* ---- score functions ------------------------------------------------- */

typedef struct pf_score pf_score;
typedef double (*pf_score_fn)(double x, double y, void* ctx);

/* name: "xy", "centered", "footrule" or "sq". */
PF_API pf_status pf_score_builtin(const char* name, pf_score** out);
/* lipschitz < 0 means unknown; the grid error bound is then estimated. */
PF_API pf_status pf_score_custom(const char* name, pf_score_fn fn, void* ctx, int symmetric,
                                 double lipschitz, pf_score** out);
PF_API void pf_score_destroy(pf_score* f);
PF_API pf_status pf_score_modulus_bound(const pf_score* f, size_t k, double* out);
PF_API pf_status pf_linear_statistic(const pf_permutation* pi, const pf_score* f, double* out);

/* ---- models ---------------------------------------------------------- */

typedef enum pf_model_kind { PF_MODEL_LINEAR = 0, PF_MODEL_KENDALL = 1 } pf_model_kind;

typedef struct pf_model {
  pf_model_kind kind;
  const pf_score* f; /* linear models only */
  double theta;
  size_t n;
} pf_model;

PF_API pf_status pf_brute_log_z(const pf_model* model, double* out);
PF_API pf_status pf_kendall_log_z(size_t n, double theta, double* out);
PF_API pf_status pf_kendall_log_z_prime(size_t n, double theta, double* out);
PF_API pf_status pf_kendall_limit_c(double theta, double* out);
PF_API pf_status pf_kendall_limit_c_prime(double theta, double* out);
/* Limiting density at the k*k cell midpoints. */
PF_API pf_status pf_kendall_limit_density(double theta, size_t k, double* out);

/* ---- grid scaling ---------------------------------------------------- */

typedef struct pf_ipfp_options {
  double tol;      /* default 1e-12 */
  size_t max_iter; /* 0 selects 10*k*(1+|theta|) */
} pf_ipfp_options;

PF_API void pf_ipfp_options_default(pf_ipfp_options* opts);

typedef struct pf_wk_result {
  double w_k;
  double w_k_prime;
  double w_k_potentials;
  size_t iterations;
  double residual;
  int converged;
} pf_wk_result;

/* With allow_unconverged != 0 an exhausted iteration budget is reported in
 * out->converged instead of failing with PF_ERR_NONCONVERGENCE. */
PF_API pf_status pf_w_k(const pf_score* f, double theta, size_t k, const pf_ipfp_options* opts,
                        int allow_unconverged, pf_wk_result* out);
/* Step density k^2 A of the scaled grid, k*k entries row-major. */
PF_API pf_status pf_limit_density(const pf_score* f, double theta, size_t k,
                                  const pf_ipfp_options* opts, double* out, pf_wk_result* info);

/* ---- permutation collections ----------------------------------------- */

typedef struct pf_sample_set pf_sample_set;

PF_API pf_status pf_sample_set_create(pf_sample_set** out);
PF_API pf_status pf_sample_set_push(pf_sample_set* set, const pf_permutation* pi);
/* Appends every permutation in an `i,pi` or `draw,i,pi` CSV. */
PF_API pf_status pf_sample_set_load(pf_sample_set* set, const char* path);
PF_API void pf_sample_set_destroy(pf_sample_set* set);
PF_API size_t pf_sample_set_count(const pf_sample_set* set);
/* Copy of draw idx (0-based); release with pf_permutation_destroy. */
PF_API pf_status pf_sample_set_get(const pf_sample_set* set, size_t idx, pf_permutation** out);
PF_API pf_status pf_sample_set_to_csv(const pf_sample_set* set, char* buf, size_t cap, size_t* len);

/* ---- estimation ------------------------------------------------------ */

typedef enum pf_method {
  PF_METHOD_PL = 0,
  PF_METHOD_LD = 1,
  PF_METHOD_ML = 2,
  PF_METHOD_KENDALL_LD = 3,
  PF_METHOD_KENDALL_ML = 4
} pf_method;

typedef enum pf_estimate_status {
  PF_ESTIMATE_OK = 0,
  PF_ESTIMATE_NO_ROOT = 1,
  PF_ESTIMATE_DEGENERATE = 2
} pf_estimate_status;

typedef struct pf_fit_options {
  double tol;          /* root tolerance, default 1e-8 */
  size_t k;            /* grid order for LD, default 1000 */
  pf_ipfp_options ipfp;
} pf_fit_options;

PF_API void pf_fit_options_default(pf_fit_options* opts);

typedef struct pf_estimate {
  double theta_hat;
  pf_method method;
  pf_estimate_status status;
  int no_root_sign;
  double bracket_lo;
  double bracket_hi;
  size_t evaluations;
  double score_at_root;
  size_t k;
} pf_estimate;

/* Pooled fit over all draws in the set. Returns PF_NO_ROOT when the score
 * keeps one sign or every pair difference vanishes; *out is filled either
 * way. model->theta and model->n are ignored. */
PF_API pf_status pf_fit(const pf_sample_set* set, const pf_model* model, pf_method method,
                        const pf_fit_options* opts, pf_estimate* out);
PF_API pf_status pf_multi_sample_score(const pf_sample_set* set, const pf_model* model,
                                       double theta, pf_method method, const pf_fit_options* opts,
                                       double* out);
PF_API pf_status pf_estimate_to_json(const pf_estimate* est, char* buf, size_t cap, size_t* len);

typedef struct pf_uniformity {
  double statistic;
  double mean;
  double variance;
  double z;
  double p_normal;
  double chebyshev_bound;
} pf_uniformity;

PF_API pf_status pf_uniformity_test(const pf_permutation* tau, pf_uniformity* out);
PF_API pf_status pf_threshold_test(double theta_hat, double theta0, double theta1, int* reject);

/* ---- sampling -------------------------------------------------------- */

typedef enum pf_sampler { PF_SAMPLER_SWAP = 0, PF_SAMPLER_AUX = 1 } pf_sampler;

typedef struct pf_sample_options {
  size_t draws;
  size_t burn; /* sweeps */
  size_t thin; /* sweeps between draws */
  pf_sampler sampler;
  uint64_t seed;
} pf_sample_options;

PF_API void pf_sample_options_default(pf_sample_options* opts);
PF_API pf_status pf_supports_aux(const pf_model* model, int* out);
PF_API pf_status pf_sample(const pf_model* model, const pf_sample_options* opts, pf_sample_set** out);
PF_API pf_status pf_uniform_permutation(size_t n, uint64_t seed, pf_permutation** out);

/* ---- draft lottery --------------------------------------------------- */

typedef struct pf_lottery_options {
  size_t k;
  size_t ipfp_iters;
  size_t hist_k;
  uint64_t seed;
  double tol;
} pf_lottery_options;

PF_API void pf_lottery_options_default(pf_lottery_options* opts);
/* pi and tau may be NULL when not wanted. */
PF_API pf_status pf_lottery_load(const char* path, pf_permutation** pi, pf_permutation** tau);
PF_API pf_status pf_lottery_report(const char* path, const pf_lottery_options* opts, char* buf,
                                   size_t cap, size_t* len);

#ifdef __cplusplus
}
#endif

#endif /* PERMFIT_PERMFIT_H */
