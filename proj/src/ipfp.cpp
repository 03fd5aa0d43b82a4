#include "permfit/ipfp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "permfit/errors.hpp"
#include "permfit/score_function.hpp"

namespace permfit {

namespace {

constexpr double kLogSpaceThreshold = 30.0;

std::size_t default_max_iter(std::size_t k, double scale) {
  return static_cast<std::size_t>(10.0 * static_cast<double>(k) * (1.0 + std::abs(scale)));
}

IpfpResult package(std::size_t k, std::vector<double> a, std::vector<double> alpha,
                   std::vector<double> beta, std::vector<double> log_kernel,
                   std::size_t iterations, double residual, bool converged) {
  // Column sums are exact after the final column pass; renormalizing only
  // removes rounding so CopulaGrid's unit-mass check holds.
  const double total = std::accumulate(a.begin(), a.end(), 0.0);
  if (!(total > 0.0) || !std::isfinite(total)) throw DomainError("ipfp: scaling produced no mass");
  return IpfpResult{CopulaGrid(k, std::move(a)), iterations, residual, converged,
                    std::move(alpha), std::move(beta), std::move(log_kernel)};
}

// Scaling with explicit multipliers u, v on K = exp(L − shift).
IpfpResult scale_direct(std::size_t k, std::vector<double> log_kernel, double tol,
                        std::size_t max_iter) {
  const double target = 1.0 / static_cast<double>(k);
  const double kd = static_cast<double>(k);
  const double shift = *std::max_element(log_kernel.begin(), log_kernel.end());
  std::vector<double> K(k * k);
  for (std::size_t i = 0; i < K.size(); ++i) K[i] = std::exp(log_kernel[i] - shift);

  std::vector<double> u(k, 1.0), v(k, 1.0), kv(k), ktu(k);
  const auto mat_vec = [&] {
    for (std::size_t r = 0; r < k; ++r) {
      const double* row = &K[r * k];
      double s = 0.0;
      for (std::size_t c = 0; c < k; ++c) s += row[c] * v[c];
      kv[r] = s;
    }
  };
  const auto mat_t_vec = [&] {
    std::fill(ktu.begin(), ktu.end(), 0.0);
    for (std::size_t r = 0; r < k; ++r) {
      const double* row = &K[r * k];
      const double ur = u[r];
      for (std::size_t c = 0; c < k; ++c) ktu[c] += row[c] * ur;
    }
  };

  mat_vec();
  mat_t_vec();
  double col_dev = 0.0;
  for (std::size_t c = 0; c < k; ++c) col_dev = std::max(col_dev, std::abs(v[c] * ktu[c] - target));

  std::size_t iter = 0;
  double residual = 0.0;
  bool converged = false;
  for (;;) {
    double row_dev = 0.0;
    for (std::size_t r = 0; r < k; ++r) row_dev = std::max(row_dev, std::abs(u[r] * kv[r] - target));
    residual = std::max(row_dev, col_dev);
    if (!std::isfinite(residual)) throw DomainError("ipfp: non-finite row or column sums");
    if (residual <= tol) {
      converged = true;
      break;
    }
    if (iter >= max_iter) break;
    for (std::size_t r = 0; r < k; ++r) u[r] = 1.0 / (kd * kv[r]);
    mat_t_vec();
    col_dev = 0.0;
    for (std::size_t c = 0; c < k; ++c) {
      v[c] = 1.0 / (kd * ktu[c]);
      col_dev = std::max(col_dev, std::abs(v[c] * ktu[c] - target));
    }
    mat_vec();
    ++iter;
  }

  std::vector<double> a(k * k), alpha(k), beta(k);
  for (std::size_t r = 0; r < k; ++r)
    for (std::size_t c = 0; c < k; ++c) a[r * k + c] = u[r] * K[r * k + c] * v[c];
  for (std::size_t i = 0; i < k; ++i) {
    alpha[i] = std::log(u[i]);
    beta[i] = std::log(v[i]) - shift;  // A = u·exp(L − shift)·v
  }
  return package(k, std::move(a), std::move(alpha), std::move(beta), std::move(log_kernel), iter,
                 residual, converged);
}

// Scaling on log multipliers α, β with log-sum-exp marginals.
IpfpResult scale_log(std::size_t k, std::vector<double> log_kernel, double tol,
                     std::size_t max_iter) {
  const double log_target = -std::log(static_cast<double>(k));
  const double target = 1.0 / static_cast<double>(k);
  const auto& L = log_kernel;
  std::vector<double> alpha(k, 0.0), beta(k, 0.0), row_lse(k), col_lse(k), tmp(k);

  // row_lse[r] = log Σ_s exp(L_rs + β_s)
  const auto rows = [&] {
    for (std::size_t r = 0; r < k; ++r) {
      const double* row = &L[r * k];
      double m = -std::numeric_limits<double>::infinity();
      for (std::size_t c = 0; c < k; ++c) m = std::max(m, row[c] + beta[c]);
      double s = 0.0;
      for (std::size_t c = 0; c < k; ++c) s += std::exp(row[c] + beta[c] - m);
      row_lse[r] = m + std::log(s);
    }
  };
  // col_lse[s] = log Σ_r exp(L_rs + α_r)
  const auto cols = [&] {
    std::fill(tmp.begin(), tmp.end(), -std::numeric_limits<double>::infinity());
    for (std::size_t r = 0; r < k; ++r)
      for (std::size_t c = 0; c < k; ++c) tmp[c] = std::max(tmp[c], L[r * k + c] + alpha[r]);
    std::fill(col_lse.begin(), col_lse.end(), 0.0);
    for (std::size_t r = 0; r < k; ++r)
      for (std::size_t c = 0; c < k; ++c) col_lse[c] += std::exp(L[r * k + c] + alpha[r] - tmp[c]);
    for (std::size_t c = 0; c < k; ++c) col_lse[c] = tmp[c] + std::log(col_lse[c]);
  };
  const auto deviation = [&](const std::vector<double>& lse, const std::vector<double>& scale) {
    double dev = 0.0;
    for (std::size_t i = 0; i < k; ++i) dev = std::max(dev, std::abs(std::exp(lse[i] + scale[i]) - target));
    return dev;
  };

  rows();
  cols();
  double col_dev = deviation(col_lse, beta);
  std::size_t iter = 0;
  double residual = 0.0;
  bool converged = false;
  for (;;) {
    residual = std::max(deviation(row_lse, alpha), col_dev);
    if (!std::isfinite(residual)) throw DomainError("ipfp: non-finite row or column sums");
    if (residual <= tol) {
      converged = true;
      break;
    }
    if (iter >= max_iter) break;
    for (std::size_t r = 0; r < k; ++r) alpha[r] = log_target - row_lse[r];
    cols();
    for (std::size_t c = 0; c < k; ++c) beta[c] = log_target - col_lse[c];
    col_dev = deviation(col_lse, beta);
    rows();
    ++iter;
  }

  std::vector<double> a(k * k);
  for (std::size_t r = 0; r < k; ++r)
    for (std::size_t c = 0; c < k; ++c) a[r * k + c] = std::exp(L[r * k + c] + alpha[r] + beta[c]);
  return package(k, std::move(a), std::move(alpha), std::move(beta), std::move(log_kernel), iter,
                 residual, converged);
}

IpfpResult run(std::size_t k, std::vector<double> log_b0, double tol, std::size_t max_iter) {
  if (k < 1) throw DomainError("ipfp: k must be >= 1");
  if (log_b0.size() != k * k) throw DomainError("ipfp: expected a k*k kernel");
  if (!(tol > 0.0)) throw DomainError("ipfp: tolerance must be positive");
  double amax = 0.0;
  for (double v : log_b0) {
    if (!std::isfinite(v)) throw DomainError("ipfp: kernel entries must be finite and positive");
    amax = std::max(amax, std::abs(v));
  }
  IpfpResult res = amax > kLogSpaceThreshold ? scale_log(k, std::move(log_b0), tol, max_iter)
                                             : scale_direct(k, std::move(log_b0), tol, max_iter);
  if (!res.converged) throw IpfpNonConvergence(std::move(res));
  return res;
}

}  // namespace

IpfpNonConvergence::IpfpNonConvergence(IpfpResult partial)
    : std::runtime_error("ipfp: no convergence after " + std::to_string(partial.iterations) +
                         " iterations (residual " + std::to_string(partial.residual) + ")"),
      partial_(std::move(partial)) {}

IpfpResult ipfp_scale(std::size_t k, const std::vector<double>& b0, const IpfpOptions& opts) {
  if (b0.size() != k * k) throw DomainError("ipfp: expected a k*k kernel");
  std::vector<double> log_b0(b0.size());
  for (std::size_t i = 0; i < b0.size(); ++i) {
    if (!(b0[i] > 0.0) || !std::isfinite(b0[i]))
      throw DomainError("ipfp: kernel entries must be strictly positive");
    log_b0[i] = std::log(b0[i]);
  }
  return ipfp_scale_log(k, std::move(log_b0), opts);
}

IpfpResult ipfp_scale_log(std::size_t k, std::vector<double> log_b0, const IpfpOptions& opts) {
  double amax = 0.0;
  for (double v : log_b0) amax = std::max(amax, std::abs(v));
  const auto max_iter = opts.max_iter ? opts.max_iter : default_max_iter(k, amax);
  return run(k, std::move(log_b0), opts.tol, max_iter);
}

IpfpResult limit_matrix(const ScoreFunction& f, double theta, std::size_t k,
                        const IpfpOptions& opts) {
  if (!std::isfinite(theta)) throw DomainError("limit_matrix: theta must be finite");
  if (k < 1) throw DomainError("limit_matrix: k must be >= 1");
  const double kd = static_cast<double>(k);
  std::vector<double> log_b0(k * k);
  for (std::size_t r = 0; r < k; ++r)
    for (std::size_t c = 0; c < k; ++c)
      log_b0[r * k + c] = theta * f(static_cast<double>(r + 1) / kd, static_cast<double>(c + 1) / kd);
  const auto max_iter = opts.max_iter ? opts.max_iter : default_max_iter(k, theta);
  return run(k, std::move(log_b0), opts.tol, max_iter);
}

PotentialGrid recover_potentials(const IpfpResult& res) {
  if (!res.converged) throw DomainError("recover_potentials: IPFP result did not converge");
  const auto k = res.order();
  const double log_k = std::log(static_cast<double>(k));
  const double sum_a = std::accumulate(res.row_log_scales.begin(), res.row_log_scales.end(), 0.0);
  const double sum_b = std::accumulate(res.col_log_scales.begin(), res.col_log_scales.end(), 0.0);
  const double c = (sum_b - sum_a) / (2.0 * static_cast<double>(k));
  PotentialGrid p{k, std::vector<double>(k), std::vector<double>(k)};
  for (std::size_t i = 0; i < k; ++i) {
    p.a_hat[i] = res.row_log_scales[i] + log_k + c;
    p.b_hat[i] = res.col_log_scales[i] + log_k - c;
  }
  return p;
}

namespace {

WkEvaluation summarize(const IpfpResult& res, const ScoreFunction& f, double theta) {
  const auto k = res.order();
  const double kd = static_cast<double>(k);
  const auto& w = res.A.weights();
  // Σ A log A with log A = log B0 + α_r + β_s, regrouped through the row
  // and column sums so the scale terms are not summed k² times.
  double mean_f = 0.0, kernel_part = 0.0;
  std::vector<double> row_sum(k, 0.0), col_sum(k, 0.0);
  for (std::size_t r = 0; r < k; ++r)
    for (std::size_t c = 0; c < k; ++c) {
      const std::size_t idx = r * k + c;
      const double a = w[idx];
      mean_f += a * f(static_cast<double>(r + 1) / kd, static_cast<double>(c + 1) / kd);
      kernel_part += a * res.log_kernel[idx];
      row_sum[r] += a;
      col_sum[c] += a;
    }
  double neg_entropy = kernel_part;
  for (std::size_t i = 0; i < k; ++i)
    neg_entropy += res.row_log_scales[i] * row_sum[i] + res.col_log_scales[i] * col_sum[i];
  const double log_k = std::log(kd);
  const double mean_alpha =
      std::accumulate(res.row_log_scales.begin(), res.row_log_scales.end(), 0.0) / kd;
  const double mean_beta =
      std::accumulate(res.col_log_scales.begin(), res.col_log_scales.end(), 0.0) / kd;
  WkEvaluation out;
  out.w_k_prime = mean_f;
  out.w_k = theta * mean_f - (2.0 * log_k + neg_entropy);
  out.w_k_potentials = -(mean_alpha + mean_beta + 2.0 * log_k);
  out.iterations = res.iterations;
  out.residual = res.residual;
  out.converged = res.converged;
  return out;
}

}  // namespace

WkEvaluation evaluate_wk(const ScoreFunction& f, double theta, std::size_t k,
                         const IpfpOptions& opts, bool allow_unconverged) {
  try {
    return summarize(limit_matrix(f, theta, k, opts), f, theta);
  } catch (const IpfpNonConvergence& e) {
    if (!allow_unconverged) throw;
    return summarize(e.partial(), f, theta);
  }
}

double w_k(const ScoreFunction& f, double theta, std::size_t k, const IpfpOptions& opts) {
  return evaluate_wk(f, theta, k, opts).w_k;
}

double w_k_prime(const ScoreFunction& f, double theta, std::size_t k, const IpfpOptions& opts) {
  return grid_mean(limit_matrix(f, theta, k, opts).A, f);
}

double scaling_structure_residual(const IpfpResult& res) {
  const auto k = res.order();
  const auto& w = res.A.weights();
  std::vector<double> d(k * k);
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (!(w[i] > 0.0)) return std::numeric_limits<double>::infinity();
    d[i] = std::log(w[i]) - res.log_kernel[i];
  }
  std::vector<double> row_mean(k, 0.0), col_mean(k, 0.0);
  double grand = 0.0;
  for (std::size_t r = 0; r < k; ++r)
    for (std::size_t c = 0; c < k; ++c) {
      row_mean[r] += d[r * k + c];
      col_mean[c] += d[r * k + c];
      grand += d[r * k + c];
    }
  const double kd = static_cast<double>(k);
  for (auto& v : row_mean) v /= kd;
  for (auto& v : col_mean) v /= kd;
  grand /= kd * kd;
  double worst = 0.0;
  for (std::size_t r = 0; r < k; ++r)
    for (std::size_t c = 0; c < k; ++c)
      worst = std::max(worst, std::abs(d[r * k + c] - row_mean[r] - col_mean[c] + grand));
  return worst;
}

}  // namespace permfit
