#pragma once

#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <string_view>

#include "permfit/ipfp.hpp"
#include "permfit/model.hpp"
#include "permfit/permutation.hpp"
#include "permfit/score_function.hpp"

#include "json.hpp"

namespace permfit {

enum class EstimateMethod { pl, ld, ml, kendall_ld, kendall_ml };
enum class EstimateStatus { ok, no_root, all_pairs_degenerate };

std::string_view to_string(EstimateMethod method);
std::string_view to_string(EstimateStatus status);

struct EstimateResult {
  double theta_hat = std::numeric_limits<double>::quiet_NaN();
  EstimateMethod method = EstimateMethod::pl;
  EstimateStatus status = EstimateStatus::ok;
  /// For no_root: sign the score kept over the whole capped bracket.
  int no_root_sign = 0;
  double bracket_lo = 0.0;
  double bracket_hi = 0.0;
  std::size_t evaluations = 0;
  double score_at_root = std::numeric_limits<double>::quiet_NaN();
  /// Grid order used by LD estimates, 0 otherwise.
  std::size_t grid_order = 0;

  bool ok() const noexcept { return status == EstimateStatus::ok; }
};

/// Flat object: theta_hat, method, bracket_lo, bracket_hi, evaluations,
/// score_at_root, status (+ sign on no_root, k for LD).
nlohmann::json to_json(const EstimateResult& r);

struct RootOptions {
  /// Bisection stops once the bracket is narrower than `tol` and the score
  /// at its midpoint is within `tol` of zero, or the bracket reaches
  /// floating-point resolution.
  double tol = 1e-8;
  /// Initial bracket [−initial, initial], doubled towards the root.
  double initial = 1.0;
  /// Expansion never goes beyond [−cap, cap].
  double cap = 64.0;
};

/// Root of a strictly decreasing score by bracket expansion then bisection.
/// Returns status no_root when the score keeps one sign on [−cap, cap].
EstimateResult find_decreasing_root(const std::function<double(double)>& score,
                                    EstimateMethod method, const RootOptions& opts = {});

// ---- pseudo-likelihood ----------------------------------------------------

/// y_π(i,j) = f(i/n,π(i)/n) + f(j/n,π(j)/n) − f(i/n,π(j)/n) − f(j/n,π(i)/n)
/// for all i < j, in row-major pair order.
std::vector<double> pair_differences(const Permutation& pi, const ScoreFunction& f);

/// Σ_{i<j} y/(1 + e^{θy}).
double pl_score(const Permutation& pi, const ScoreFunction& f, double theta);
/// −Σ_{i<j} y² e^{θy}/(1 + e^{θy})².
double pl_score_derivative(const Permutation& pi, const ScoreFunction& f, double theta);

/// Root of the summed PL score over i.i.d. draws (a single draw is the
/// usual case). Status all_pairs_degenerate when every y is 0.
EstimateResult pl_estimate(std::span<const Permutation> perms, const ScoreFunction& f,
                           const RootOptions& opts = {});
EstimateResult pl_estimate(const Permutation& pi, const ScoreFunction& f,
                           const RootOptions& opts = {});

// ---- limiting-density (LD) estimator ------------------------------------

/// linear_statistic(π,f)/n − W_k'(f,θ).
double ld_score(const Permutation& pi, const ScoreFunction& f, double theta, std::size_t k,
                const IpfpOptions& ipfp = {});

/// Solves mean_statistic = W_k'(f,θ), mean_statistic being the average of
/// linear_statistic/n over the sample.
EstimateResult ld_estimate_from_statistic(double mean_statistic, const ScoreFunction& f,
                                          std::size_t k, const RootOptions& opts = {},
                                          const IpfpOptions& ipfp = {});
EstimateResult ld_estimate(std::span<const Permutation> perms, const ScoreFunction& f,
                           std::size_t k, const RootOptions& opts = {},
                           const IpfpOptions& ipfp = {});
EstimateResult ld_estimate(const Permutation& pi, const ScoreFunction& f, std::size_t k,
                           const RootOptions& opts = {}, const IpfpOptions& ipfp = {});

// ---- exact maximum likelihood -------------------------------------------

/// Distribution of the linear statistic under the uniform law on S_n,
/// tabulated by enumeration (n ≤ 9). Evaluates (1/n)Z_n'(f,θ).
class LinearStatisticLaw {
 public:
  LinearStatisticLaw(const ScoreFunction& f, std::size_t n);
  std::size_t size() const noexcept { return n_; }
  /// E_θ[Σf]/n.
  double mean_per_site(double theta) const;

 private:
  std::size_t n_;
  std::vector<double> values_;
  std::vector<double> multiplicity_;
};

/// ML score (statistic − Z_n'(θ))/n for linear models; Inv/n² − C_n'(θ)/n
/// for Kendall.
double ml_score(const Permutation& pi, const ModelSpec& family, double theta);

/// Exact MLE. Linear models need n ≤ 9; Kendall any n. The θ inside
/// `family` is ignored.
EstimateResult ml_exact(std::span<const Permutation> perms, const ModelSpec& family,
                        const RootOptions& opts = {});
EstimateResult ml_exact(const Permutation& pi, const ModelSpec& family,
                        const RootOptions& opts = {});
/// MLE of a linear model for a given per-site statistic value.
EstimateResult ml_linear_from_statistic(double mean_statistic, const LinearStatisticLaw& law,
                                        const RootOptions& opts = {});

// ---- Kendall limit estimator --------------------------------------------

/// Inv(π)/n² − C'(θ).
double kendall_ld_score(const Permutation& pi, double theta);
EstimateResult kendall_ld_estimate(std::span<const Permutation> perms,
                                   const RootOptions& opts = {});
EstimateResult kendall_ld_estimate(const Permutation& pi, const RootOptions& opts = {});

// ---- pooled scores --------------------------------------------------------

struct EstimatorOptions {
  RootOptions root;
  std::size_t k = 1000;
  IpfpOptions ipfp;
};

/// Σ_l score(π_l, θ) for the chosen method. Throws SizeMismatch if the
/// draws differ in size and UnsupportedError for a method the model
/// family does not have.
double multi_sample_score(std::span<const Permutation> perms, const ModelSpec& family,
                          double theta, EstimateMethod method,
                          const EstimatorOptions& opts = {});

/// Dispatches to the estimator for `method`.
EstimateResult estimate(std::span<const Permutation> perms, const ModelSpec& family,
                        EstimateMethod method, const EstimatorOptions& opts = {});

// ---- uniformity test ------------------------------------------------------

/// Normal and Chebyshev calibration of n⁻³Σ iτ(i) under the uniform law.
struct UniformityTest {
  double statistic = 0.0;
  double mean = 0.0;      // (1/4)(1+1/n)²
  double variance = 0.0;  // (1/(144n))(1−1/n)(1+1/n)²
  double z = 0.0;
  double p_normal = 0.0;  // upper tail
  double chebyshev_bound = 1.0;
};

UniformityTest uniformity_test(const Permutation& tau);
nlohmann::json to_json(const UniformityTest& t);

/// Rejects θ = θ0 in favour of θ = θ1 iff θ̂ > (θ0+θ1)/2. Requires θ0 < θ1.
bool threshold_test(double theta_hat, double theta0, double theta1);

}  // namespace permfit
