#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "permfit/copula_grid.hpp"

namespace permfit {

class ScoreFunction;

struct IpfpOptions {
  /// Stop once every row and column sum is within `tol` of 1/k.
  double tol = 1e-12;
  /// 0 selects the default cap 10·k·(1+|θ|) (θ = 0 for raw kernels).
  std::size_t max_iter = 0;
};

/// Outcome of Sinkhorn scaling A = diag(e^α) B0 diag(e^β), so that
/// log A(r,s) = log B0(r,s) + α_r + β_s exactly.
struct IpfpResult {
  CopulaGrid A;
  std::size_t iterations = 0;
  double residual = 0.0;
  bool converged = false;
  std::vector<double> row_log_scales;  // α
  std::vector<double> col_log_scales;  // β
  std::vector<double> log_kernel;      // log B0, row-major

  std::size_t order() const noexcept { return A.order(); }
};

/// Sinkhorn scaling ran out of iterations. Carries the last iterate so the
/// caller can inspect or reuse it.
class IpfpNonConvergence : public std::runtime_error {
 public:
  explicit IpfpNonConvergence(IpfpResult partial);
  const IpfpResult& partial() const noexcept { return partial_; }
  double residual() const noexcept { return partial_.residual; }

 private:
  IpfpResult partial_;
};

/// Alternating row/column normalization of a strictly positive k×k
/// matrix (row-major) to row and column sums 1/k.
IpfpResult ipfp_scale(std::size_t k, const std::vector<double>& b0, const IpfpOptions& opts = {});

/// Same, from log B0. Scaling runs in log space once max|log B0| > 30.
IpfpResult ipfp_scale_log(std::size_t k, std::vector<double> log_b0, const IpfpOptions& opts = {});

/// ipfp_scale applied to B0(r,s) = exp(θ f(r/k, s/k)).
IpfpResult limit_matrix(const ScoreFunction& f, double theta, std::size_t k,
                        const IpfpOptions& opts = {});

/// Grid potentials with k²A(r,s) = exp(θ f(r/k,s/k) + â_r + b̂_s) and
/// Σâ = Σb̂.
struct PotentialGrid {
  std::size_t k = 0;
  std::vector<double> a_hat;
  std::vector<double> b_hat;
};

/// Throws DomainError for a non-converged result.
PotentialGrid recover_potentials(const IpfpResult& res);

/// W_k and W_k' from one scaling run.
struct WkEvaluation {
  double w_k = 0.0;             // θ·grid_mean(A,f) − kl_to_uniform(A)
  double w_k_prime = 0.0;       // grid_mean(A,f)
  double w_k_potentials = 0.0;  // −(mean â + mean b̂)
  std::size_t iterations = 0;
  double residual = 0.0;
  bool converged = false;
};

/// Evaluates W_k(f,θ). With `allow_unconverged` a run that hits the
/// iteration cap is reported (converged = false) instead of thrown.
WkEvaluation evaluate_wk(const ScoreFunction& f, double theta, std::size_t k,
                         const IpfpOptions& opts = {}, bool allow_unconverged = false);

double w_k(const ScoreFunction& f, double theta, std::size_t k, const IpfpOptions& opts = {});
double w_k_prime(const ScoreFunction& f, double theta, std::size_t k,
                 const IpfpOptions& opts = {});

/// max |C(r,s)| of the doubly-centered residual C of log A − log B0. Zero
/// exactly when A is a diagonal scaling of B0.
double scaling_structure_residual(const IpfpResult& res);

}  // namespace permfit
