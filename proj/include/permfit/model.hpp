#pragma once

#include <cstddef>
#include <variant>

#include "permfit/permutation.hpp"
#include "permfit/score_function.hpp"

namespace permfit {

/// P(π) ∝ exp(θ Σ_i f(i/n, π(i)/n)).
struct LinearModel {
  ScoreFunction f;
  double theta = 0.0;
};

/// P(π) ∝ exp((θ/n) Inv(π)).
struct KendallModel {
  double theta = 0.0;
};

struct ModelSpec {
  std::variant<LinearModel, KendallModel> variant;
  std::size_t n = 0;

  static ModelSpec linear(ScoreFunction f, double theta, std::size_t n) {
    return {LinearModel{std::move(f), theta}, n};
  }
  static ModelSpec kendall(double theta, std::size_t n) { return {KendallModel{theta}, n}; }

  bool is_linear() const noexcept { return std::holds_alternative<LinearModel>(variant); }
  double theta() const;
};

/// The model's sufficient statistic: Σ f(i/n,π(i)/n) or Inv(π)/n, so that
/// log-weight = θ·statistic.
double model_statistic(const ModelSpec& model, const Permutation& pi);

double log_weight(const ModelSpec& model, const Permutation& pi);

inline constexpr std::size_t kMaxEnumerationSize = 9;

/// log Σ_{π∈S_n} exp(log-weight(π)) by enumeration; n ≤ 9.
double brute_log_z(const ModelSpec& model);

/// Exact pmf over S_n in std::next_permutation (lexicographic) order; n ≤ 9.
std::vector<double> brute_pmf(const ModelSpec& model);

/// Lexicographic rank of π among S_n (0-based).
std::size_t lexicographic_rank(const Permutation& pi);

}  // namespace permfit
