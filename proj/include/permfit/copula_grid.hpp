#pragma once

#include <cstddef>
#include <iosfwd>
#include <vector>

namespace permfit {

class Permutation;
class ScoreFunction;

/// k×k nonnegative cell probabilities. Cell (r,s), 1-based, covers
/// ((r−1)/k, r/k] × ((s−1)/k, s/k].
class CopulaGrid {
 public:
  /// Validates nonnegativity and unit total mass (to 1e-9).
  CopulaGrid(std::size_t k, std::vector<double> w);

  std::size_t order() const noexcept { return k_; }
  double operator()(std::size_t r, std::size_t s) const { return w_[(r - 1) * k_ + (s - 1)]; }
  const std::vector<double>& weights() const noexcept { return w_; }

  double row_sum(std::size_t r) const;
  double col_sum(std::size_t s) const;
  /// max over rows and columns of |sum − 1/k|.
  double marginal_deviation() const;
  /// True when every row and column sums to 1/k within `tol`.
  bool is_doubly_stochastic(double tol = 1e-10) const;

  /// Step density k²·w, row-major.
  std::vector<double> step_density() const;

 private:
  std::size_t k_;
  std::vector<double> w_;
};

/// All entries 1/k².
CopulaGrid uniform_grid(std::size_t k);

/// Σ A log A + 2 log k = D(p_A || p_U), with 0·log 0 = 0.
double kl_to_uniform(const CopulaGrid& a);

/// Σ_rs f(r/k, s/k) A(r,s).
double grid_mean(const CopulaGrid& a, const ScoreFunction& f);

/// bin_counts(π,k)/n.
CopulaGrid from_permutation(const Permutation& pi, std::size_t k);

/// Grid CSV: first line k, then k rows of k comma-separated values.
void write_grid_csv(std::ostream& out, std::size_t k, const std::vector<double>& values);

}  // namespace permfit
