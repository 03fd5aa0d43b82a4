#pragma once

#include <cstddef>
#include <string_view>
#include <vector>

namespace permfit {

// Mallows model with Kendall's tau: P(π) ∝ exp((θ/n)·Inv(π)).

/// log Z_n(θ) = Σ_{j=1..n} log((q^j − 1)/(q − 1)), q = e^{θ/n}; log n! at θ = 0.
double kendall_log_z(std::size_t n, double theta);

/// d/dθ log Z_n(θ) = E_θ[Inv]/n.
double kendall_log_z_prime(std::size_t n, double theta);

/// Limit C(θ) = lim (log Z_n(θ) − log n!)/n = ∫₀¹ log((e^{θx} − 1)/(θx)) dx.
double kendall_limit_c(double theta);

/// C'(θ) by central differences on kendall_limit_c, h = max(1e-5, 1e-5|θ|).
/// Strictly increasing from 0 to 1/2; C'(0) = 1/4.
double kendall_limit_c_prime(double theta);

/// Candidate closed forms for the limiting density. Only one of them is a
/// density with uniform marginals that attains C(θ); see
/// select_kendall_density_form().
enum class KendallDensityForm {
  /// (θ/2)sinh(θ/2) / [e^{−θ/4}cosh(θ(x−y)/2) + e^{θ/4}cosh(θ(x+y−1)/2)]²
  printed_sum,
  /// (θ/2)sinh(θ/2) / [e^{θ/4}cosh(θ(x−y)/2) − e^{−θ/4}cosh(θ(x+y−1)/2)]²
  swapped_difference,
  /// (θ/2)sinh(θ/2) / [e^{θ/4}cosh(θ(x+y−1)/2) − e^{−θ/4}cosh(θ(x−y)/2)]²
  reflected_difference,
};

std::string_view to_string(KendallDensityForm form);

/// Value of a candidate form at (x,y); returns 1 for |θ| < 1e-8.
double kendall_density_value(KendallDensityForm form, double theta, double x, double y);

/// Candidate form sampled at the k×k cell midpoints, row-major.
std::vector<double> kendall_density_grid(KendallDensityForm form, double theta, std::size_t k);

/// Discretized (θ/2)(μ×μ)(h) − D(μ||u) for a density sampled at cell
/// midpoints, h the discordance indicator. Pairs sharing a row or column
/// count as discordant with probability 1/2.
double kendall_variational_value(const std::vector<double>& density, std::size_t k, double theta);

/// Largest |row mean − 1| or |column mean − 1| of a midpoint-sampled density.
double density_marginal_deviation(const std::vector<double>& density, std::size_t k);

/// Picks the candidate whose midpoint samples have uniform marginals and
/// whose variational value matches kendall_limit_c, checked at θ ∈ {1,2,5}
/// on a 400-grid. Computed once and cached.
KendallDensityForm select_kendall_density_form();

/// Limiting density ρ_θ at k×k cell midpoints using the selected form.
std::vector<double> kendall_limit_density(double theta, std::size_t k);

}  // namespace permfit
