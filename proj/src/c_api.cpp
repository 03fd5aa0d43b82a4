#include "permfit/permfit.h"

#include <cstring>
#include <new>
#include <sstream>
#include <string>
#include <vector>

#include "permfit/copula_grid.hpp"
#include "permfit/errors.hpp"
#include "permfit/estimators.hpp"
#include "permfit/ipfp.hpp"
#include "permfit/kendall.hpp"
#include "permfit/lottery.hpp"
#include "permfit/model.hpp"
#include "permfit/permutation.hpp"
#include "permfit/sampling.hpp"

using namespace permfit;

struct pf_permutation {
  Permutation value;
};

struct pf_score {
  ScoreFunction value;
};

struct pf_sample_set {
  std::vector<Permutation> draws;
};

namespace {

thread_local std::string last_error;

pf_status fail(pf_status code, const char* what) {
  last_error = what;
  return code;
}

template <class Fn>
pf_status guard(Fn&& fn) noexcept {
  try {
    last_error.clear();
    return fn();
  } catch (const IpfpNonConvergence& e) {
    return fail(PF_ERR_NONCONVERGENCE, e.what());
  } catch (const SizeMismatch& e) {
    return fail(PF_ERR_SIZE, e.what());
  } catch (const UnsupportedError& e) {
    return fail(PF_ERR_UNSUPPORTED, e.what());
  } catch (const DomainError& e) {
    return fail(PF_ERR_DOMAIN, e.what());
  } catch (const IoError& e) {
    return fail(PF_ERR_IO, e.what());
  } catch (const std::invalid_argument& e) {
    return fail(PF_ERR_ARG, e.what());
  } catch (const std::bad_alloc&) {
    return fail(PF_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(PF_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(PF_ERR_INTERNAL, "unknown error");
  }
}

struct ArgError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

template <class T>
void need(const T* p, const char* name) {
  if (!p) throw ArgError(std::string(name) + " must not be NULL");
}

pf_status write_text(const std::string& text, char* buf, std::size_t cap, std::size_t* len) {
  need(len, "len");
  *len = text.size();
  if (!buf || cap < text.size() + 1) {
    last_error = "buffer too small: need " + std::to_string(text.size() + 1) + " bytes";
    return PF_ERR_BUFFER;
  }
  std::memcpy(buf, text.c_str(), text.size() + 1);
  return PF_OK;
}

ModelSpec to_model(const pf_model* m, std::size_t n) {
  need(m, "model");
  if (m->kind == PF_MODEL_KENDALL) return ModelSpec::kendall(m->theta, n);
  if (m->kind != PF_MODEL_LINEAR) throw ArgError("unknown model kind");
  need(m->f, "model->f");
  return ModelSpec::linear(m->f->value, m->theta, n);
}

IpfpOptions to_ipfp(const pf_ipfp_options* o) {
  IpfpOptions out;
  if (o) {
    out.tol = o->tol;
    out.max_iter = o->max_iter;
  }
  return out;
}

EstimateMethod to_method(pf_method m) {
  switch (m) {
    case PF_METHOD_PL: return EstimateMethod::pl;
    case PF_METHOD_LD: return EstimateMethod::ld;
    case PF_METHOD_ML: return EstimateMethod::ml;
    case PF_METHOD_KENDALL_LD: return EstimateMethod::kendall_ld;
    case PF_METHOD_KENDALL_ML: return EstimateMethod::kendall_ml;
  }
  throw ArgError("unknown estimation method");
}

EstimatorOptions to_estimator(const pf_fit_options* o) {
  EstimatorOptions out;
  if (o) {
    out.root.tol = o->tol;
    out.k = o->k;
    out.ipfp = to_ipfp(&o->ipfp);
  }
  return out;
}

void fill(const WkEvaluation& w, pf_wk_result* out) {
  out->w_k = w.w_k;
  out->w_k_prime = w.w_k_prime;
  out->w_k_potentials = w.w_k_potentials;
  out->iterations = w.iterations;
  out->residual = w.residual;
  out->converged = w.converged ? 1 : 0;
}

EstimateResult from_c(const pf_estimate& e) {
  EstimateResult r;
  r.theta_hat = e.theta_hat;
  r.method = to_method(e.method);
  r.status = e.status == PF_ESTIMATE_NO_ROOT     ? EstimateStatus::no_root
             : e.status == PF_ESTIMATE_DEGENERATE ? EstimateStatus::all_pairs_degenerate
                                                  : EstimateStatus::ok;
  r.no_root_sign = e.no_root_sign;
  r.bracket_lo = e.bracket_lo;
  r.bracket_hi = e.bracket_hi;
  r.evaluations = e.evaluations;
  r.score_at_root = e.score_at_root;
  r.grid_order = e.k;
  return r;
}

pf_method to_c(EstimateMethod m) {
  switch (m) {
    case EstimateMethod::pl: return PF_METHOD_PL;
    case EstimateMethod::ld: return PF_METHOD_LD;
    case EstimateMethod::ml: return PF_METHOD_ML;
    case EstimateMethod::kendall_ld: return PF_METHOD_KENDALL_LD;
    case EstimateMethod::kendall_ml: return PF_METHOD_KENDALL_ML;
  }
  return PF_METHOD_PL;
}

}  // namespace

extern "C" {

const char* pf_last_error(void) { return last_error.c_str(); }

const char* pf_status_name(pf_status status) {
  switch (status) {
    case PF_OK: return "ok";
    case PF_ERR_INTERNAL: return "internal error";
    case PF_NO_ROOT: return "no root";
    case PF_ERR_DOMAIN: return "domain error";
    case PF_ERR_IO: return "I/O error";
    case PF_ERR_SIZE: return "size mismatch";
    case PF_ERR_NONCONVERGENCE: return "IPFP did not converge";
    case PF_ERR_UNSUPPORTED: return "unsupported";
    case PF_ERR_ARG: return "invalid argument";
    case PF_ERR_BUFFER: return "buffer too small";
  }
  return "unknown status";
}

// ---- permutations ----------------------------------------------------------

pf_status pf_permutation_create(const int32_t* values, size_t n, pf_permutation** out) {
  return guard([&] {
    need(out, "out");
    if (n > 0) need(values, "values");
    *out = new pf_permutation{Permutation(std::vector<std::int32_t>(values, values + n))};
    return PF_OK;
  });
}

pf_status pf_permutation_identity(size_t n, pf_permutation** out) {
  return guard([&] {
    need(out, "out");
    *out = new pf_permutation{Permutation::identity(n)};
    return PF_OK;
  });
}

pf_status pf_permutation_load(const char* path, pf_permutation** out) {
  return guard([&] {
    need(path, "path");
    need(out, "out");
    *out = new pf_permutation{read_permutation_csv(path)};
    return PF_OK;
  });
}

void pf_permutation_destroy(pf_permutation* pi) { delete pi; }

size_t pf_permutation_size(const pf_permutation* pi) { return pi ? pi->value.size() : 0; }

pf_status pf_permutation_values(const pf_permutation* pi, int32_t* out, size_t cap) {
  return guard([&] {
    need(pi, "pi");
    need(out, "out");
    const auto v = pi->value.values();
    if (cap < v.size()) {
      last_error = "buffer too small: need " + std::to_string(v.size()) + " values";
      return PF_ERR_BUFFER;
    }
    std::copy(v.begin(), v.end(), out);
    return PF_OK;
  });
}

pf_status pf_permutation_to_csv(const pf_permutation* pi, char* buf, size_t cap, size_t* len) {
  return guard([&] {
    need(pi, "pi");
    std::ostringstream os;
    write_permutation_csv(os, pi->value);
    return write_text(os.str(), buf, cap, len);
  });
}

pf_status pf_inversions(const pf_permutation* pi, uint64_t* out) {
  return guard([&] {
    need(pi, "pi");
    need(out, "out");
    *out = inversions(pi->value);
    return PF_OK;
  });
}

pf_status pf_spearman_r(const pf_permutation* pi, const pf_permutation* sigma, double* out) {
  return guard([&] {
    need(pi, "pi");
    need(sigma, "sigma");
    need(out, "out");
    *out = spearman_r(pi->value, sigma->value);
    return PF_OK;
  });
}

pf_status pf_bin_counts(const pf_permutation* pi, size_t k, int64_t* counts) {
  return guard([&] {
    need(pi, "pi");
    need(counts, "counts");
    const auto m = bin_counts(pi->value, k);
    std::copy(m.counts.begin(), m.counts.end(), counts);
    return PF_OK;
  });
}

pf_status pf_fisher_yates_logpmf(const int64_t* counts, size_t k, size_t n, double* out) {
  return guard([&] {
    need(counts, "counts");
    need(out, "out");
    BinMatrix m{k, n, std::vector<std::int64_t>(counts, counts + k * k)};
    *out = fisher_yates_logpmf(m);
    return PF_OK;
  });
}

pf_status pf_cdf_distance(const pf_permutation* pi, double* out) {
  return guard([&] {
    need(pi, "pi");
    need(out, "out");
    *out = cdf_distance(pi->value);
    return PF_OK;
  });
}

// ---- score functions -------------------------------------------------------

pf_status pf_score_builtin(const char* name, pf_score** out) {
  return guard([&] {
    need(name, "name");
    need(out, "out");
    *out = new pf_score{ScoreFunction::from_name(name)};
    return PF_OK;
  });
}

pf_status pf_score_custom(const char* name, pf_score_fn fn, void* ctx, int symmetric,
                          double lipschitz, pf_score** out) {
  return guard([&] {
    need(out, "out");
    if (!fn) throw ArgError("fn must not be NULL");
    std::optional<double> bound;
    if (lipschitz >= 0.0) bound = lipschitz;
    *out = new pf_score{ScoreFunction::custom(name ? name : "custom",
                                              [fn, ctx](double x, double y) { return fn(x, y, ctx); },
                                              symmetric != 0, bound)};
    return PF_OK;
  });
}

void pf_score_destroy(pf_score* f) { delete f; }

pf_status pf_score_modulus_bound(const pf_score* f, size_t k, double* out) {
  return guard([&] {
    need(f, "f");
    need(out, "out");
    *out = f->value.modulus_bound(k);
    return PF_OK;
  });
}

pf_status pf_linear_statistic(const pf_permutation* pi, const pf_score* f, double* out) {
  return guard([&] {
    need(pi, "pi");
    need(f, "f");
    need(out, "out");
    *out = linear_statistic(pi->value, f->value);
    return PF_OK;
  });
}

// ---- models ----------------------------------------------------------------

pf_status pf_brute_log_z(const pf_model* model, double* out) {
  return guard([&] {
    need(model, "model");
    need(out, "out");
    *out = brute_log_z(to_model(model, model->n));
    return PF_OK;
  });
}

pf_status pf_kendall_log_z(size_t n, double theta, double* out) {
  return guard([&] {
    need(out, "out");
    *out = kendall_log_z(n, theta);
    return PF_OK;
  });
}

pf_status pf_kendall_log_z_prime(size_t n, double theta, double* out) {
  return guard([&] {
    need(out, "out");
    *out = kendall_log_z_prime(n, theta);
    return PF_OK;
  });
}

pf_status pf_kendall_limit_c(double theta, double* out) {
  return guard([&] {
    need(out, "out");
    *out = kendall_limit_c(theta);
    return PF_OK;
  });
}

pf_status pf_kendall_limit_c_prime(double theta, double* out) {
  return guard([&] {
    need(out, "out");
    *out = kendall_limit_c_prime(theta);
    return PF_OK;
  });
}

pf_status pf_kendall_limit_density(double theta, size_t k, double* out) {
  return guard([&] {
    need(out, "out");
    const auto d = kendall_limit_density(theta, k);
    std::copy(d.begin(), d.end(), out);
    return PF_OK;
  });
}

// ---- grid scaling ----------------------------------------------------------

void pf_ipfp_options_default(pf_ipfp_options* opts) {
  if (!opts) return;
  const IpfpOptions d;
  opts->tol = d.tol;
  opts->max_iter = d.max_iter;
}

pf_status pf_w_k(const pf_score* f, double theta, size_t k, const pf_ipfp_options* opts,
                 int allow_unconverged, pf_wk_result* out) {
  return guard([&] {
    need(f, "f");
    need(out, "out");
    fill(evaluate_wk(f->value, theta, k, to_ipfp(opts), allow_unconverged != 0), out);
    return PF_OK;
  });
}

pf_status pf_limit_density(const pf_score* f, double theta, size_t k, const pf_ipfp_options* opts,
                           double* out, pf_wk_result* info) {
  return guard([&] {
    need(f, "f");
    need(out, "out");
    const auto res = limit_matrix(f->value, theta, k, to_ipfp(opts));
    const auto d = res.A.step_density();
    std::copy(d.begin(), d.end(), out);
    if (info) {
      info->iterations = res.iterations;
      info->residual = res.residual;
      info->converged = res.converged ? 1 : 0;
      info->w_k_prime = grid_mean(res.A, f->value);
      info->w_k = theta * info->w_k_prime - kl_to_uniform(res.A);
      const auto pot = recover_potentials(res);
      double mean = 0.0;
      for (std::size_t i = 0; i < k; ++i) mean += pot.a_hat[i] + pot.b_hat[i];
      info->w_k_potentials = -mean / static_cast<double>(k);
    }
    return PF_OK;
  });
}

// ---- permutation collections -----------------------------------------------

pf_status pf_sample_set_create(pf_sample_set** out) {
  return guard([&] {
    need(out, "out");
    *out = new pf_sample_set{};
    return PF_OK;
  });
}

pf_status pf_sample_set_push(pf_sample_set* set, const pf_permutation* pi) {
  return guard([&] {
    need(set, "set");
    need(pi, "pi");
    set->draws.push_back(pi->value);
    return PF_OK;
  });
}

pf_status pf_sample_set_load(pf_sample_set* set, const char* path) {
  return guard([&] {
    need(set, "set");
    need(path, "path");
    auto more = read_permutations(path);
    set->draws.insert(set->draws.end(), more.begin(), more.end());
    return PF_OK;
  });
}

void pf_sample_set_destroy(pf_sample_set* set) { delete set; }

size_t pf_sample_set_count(const pf_sample_set* set) { return set ? set->draws.size() : 0; }

pf_status pf_sample_set_get(const pf_sample_set* set, size_t idx, pf_permutation** out) {
  return guard([&] {
    need(set, "set");
    need(out, "out");
    if (idx >= set->draws.size()) throw ArgError("draw index out of range");
    *out = new pf_permutation{set->draws[idx]};
    return PF_OK;
  });
}

pf_status pf_sample_set_to_csv(const pf_sample_set* set, char* buf, size_t cap, size_t* len) {
  return guard([&] {
    need(set, "set");
    std::ostringstream os;
    write_multi_draw_csv(os, set->draws);
    return write_text(os.str(), buf, cap, len);
  });
}

// ---- estimation ------------------------------------------------------------

void pf_fit_options_default(pf_fit_options* opts) {
  if (!opts) return;
  const EstimatorOptions d;
  opts->tol = d.root.tol;
  opts->k = d.k;
  pf_ipfp_options_default(&opts->ipfp);
}

pf_status pf_fit(const pf_sample_set* set, const pf_model* model, pf_method method,
                 const pf_fit_options* opts, pf_estimate* out) {
  return guard([&] {
    need(set, "set");
    need(out, "out");
    if (set->draws.empty()) throw ArgError("sample set is empty");
    const auto family = to_model(model, set->draws.front().size());
    const auto r = estimate(set->draws, family, to_method(method), to_estimator(opts));
    out->theta_hat = r.theta_hat;
    out->method = to_c(r.method);
    out->status = r.status == EstimateStatus::no_root               ? PF_ESTIMATE_NO_ROOT
                  : r.status == EstimateStatus::all_pairs_degenerate ? PF_ESTIMATE_DEGENERATE
                                                                     : PF_ESTIMATE_OK;
    out->no_root_sign = r.no_root_sign;
    out->bracket_lo = r.bracket_lo;
    out->bracket_hi = r.bracket_hi;
    out->evaluations = r.evaluations;
    out->score_at_root = r.score_at_root;
    out->k = r.grid_order;
    if (!r.ok()) {
      last_error = r.status == EstimateStatus::no_root ? "score has no sign change on the bracket"
                                                       : "all pair differences are zero";
      return PF_NO_ROOT;
    }
    return PF_OK;
  });
}

pf_status pf_multi_sample_score(const pf_sample_set* set, const pf_model* model, double theta,
                                pf_method method, const pf_fit_options* opts, double* out) {
  return guard([&] {
    need(set, "set");
    need(out, "out");
    if (set->draws.empty()) throw ArgError("sample set is empty");
    const auto family = to_model(model, set->draws.front().size());
    *out = multi_sample_score(set->draws, family, theta, to_method(method), to_estimator(opts));
    return PF_OK;
  });
}

pf_status pf_estimate_to_json(const pf_estimate* est, char* buf, size_t cap, size_t* len) {
  return guard([&] {
    need(est, "est");
    return write_text(to_json(from_c(*est)).dump(), buf, cap, len);
  });
}

pf_status pf_uniformity_test(const pf_permutation* tau, pf_uniformity* out) {
  return guard([&] {
    need(tau, "tau");
    need(out, "out");
    const auto t = uniformity_test(tau->value);
    *out = {t.statistic, t.mean, t.variance, t.z, t.p_normal, t.chebyshev_bound};
    return PF_OK;
  });
}

pf_status pf_threshold_test(double theta_hat, double theta0, double theta1, int* reject) {
  return guard([&] {
    need(reject, "reject");
    *reject = threshold_test(theta_hat, theta0, theta1) ? 1 : 0;
    return PF_OK;
  });
}

// ---- sampling --------------------------------------------------------------

void pf_sample_options_default(pf_sample_options* opts) {
  if (!opts) return;
  const SampleOptions d;
  opts->draws = d.draws;
  opts->burn = d.burn;
  opts->thin = d.thin;
  opts->sampler = PF_SAMPLER_SWAP;
  opts->seed = d.seed;
}

pf_status pf_supports_aux(const pf_model* model, int* out) {
  return guard([&] {
    need(model, "model");
    need(out, "out");
    *out = supports_auxiliary_sweep(to_model(model, model->n)) ? 1 : 0;
    return PF_OK;
  });
}

pf_status pf_sample(const pf_model* model, const pf_sample_options* opts, pf_sample_set** out) {
  return guard([&] {
    need(model, "model");
    need(opts, "opts");
    need(out, "out");
    SampleOptions o;
    o.draws = opts->draws;
    o.burn = opts->burn;
    o.thin = opts->thin;
    o.sampler = opts->sampler == PF_SAMPLER_AUX ? SamplerKind::auxiliary : SamplerKind::swap;
    o.seed = opts->seed;
    auto draws = sample(to_model(model, model->n), o);
    *out = new pf_sample_set{std::move(draws)};
    return PF_OK;
  });
}

pf_status pf_uniform_permutation(size_t n, uint64_t seed, pf_permutation** out) {
  return guard([&] {
    need(out, "out");
    CounterRng rng(seed);
    *out = new pf_permutation{uniform_permutation(n, rng)};
    return PF_OK;
  });
}

// ---- draft lottery ---------------------------------------------------------

void pf_lottery_options_default(pf_lottery_options* opts) {
  if (!opts) return;
  const LotteryOptions d;
  opts->k = d.k;
  opts->ipfp_iters = d.ipfp_iters;
  opts->hist_k = d.hist_k;
  opts->seed = d.seed;
  opts->tol = d.tol;
}

pf_status pf_lottery_load(const char* path, pf_permutation** pi, pf_permutation** tau) {
  return guard([&] {
    need(path, "path");
    auto data = read_lottery_csv(path);
    if (pi) *pi = new pf_permutation{data.pi};
    if (tau) *tau = new pf_permutation{data.tau};
    return PF_OK;
  });
}

pf_status pf_lottery_report(const char* path, const pf_lottery_options* opts, char* buf, size_t cap,
                            size_t* len) {
  return guard([&] {
    need(path, "path");
    LotteryOptions o;
    if (opts) {
      o.k = opts->k;
      o.ipfp_iters = opts->ipfp_iters;
      o.hist_k = opts->hist_k;
      o.seed = opts->seed;
      o.tol = opts->tol;
    }
    return write_text(lottery_report(read_lottery_csv(path), o).dump(), buf, cap, len);
  });
}

}  // extern "C"
