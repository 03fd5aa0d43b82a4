#include "permfit/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "permfit/errors.hpp"

namespace permfit {

double ModelSpec::theta() const {
  return std::visit([](const auto& m) { return m.theta; }, variant);
}

double model_statistic(const ModelSpec& model, const Permutation& pi) {
  if (pi.size() != model.n) throw SizeMismatch("model_statistic: permutation size differs from model n");
  if (const auto* lin = std::get_if<LinearModel>(&model.variant)) return linear_statistic(pi, lin->f);
  return static_cast<double>(inversions(pi)) / static_cast<double>(model.n);
}

double log_weight(const ModelSpec& model, const Permutation& pi) {
  return model.theta() * model_statistic(model, pi);
}

namespace {

void check_enumerable(const ModelSpec& model) {
  if (model.n < 1) throw DomainError("enumeration: n must be >= 1");
  if (model.n > kMaxEnumerationSize)
    throw DomainError("enumeration: n = " + std::to_string(model.n) + " exceeds the limit of " +
                      std::to_string(kMaxEnumerationSize));
}

std::vector<double> all_log_weights(const ModelSpec& model) {
  check_enumerable(model);
  std::vector<std::int32_t> v(model.n);
  std::iota(v.begin(), v.end(), 1);
  std::vector<double> out;
  do {
    out.push_back(log_weight(model, Permutation(v)));
  } while (std::next_permutation(v.begin(), v.end()));
  return out;
}

double log_sum_exp(const std::vector<double>& xs) {
  const double m = *std::max_element(xs.begin(), xs.end());
  double s = 0.0;
  for (double x : xs) s += std::exp(x - m);
  return m + std::log(s);
}

}  // namespace

double brute_log_z(const ModelSpec& model) { return log_sum_exp(all_log_weights(model)); }

std::vector<double> brute_pmf(const ModelSpec& model) {
  auto w = all_log_weights(model);
  const double lz = log_sum_exp(w);
  for (auto& x : w) x = std::exp(x - lz);
  return w;
}

std::size_t lexicographic_rank(const Permutation& pi) {
  const auto n = pi.size();
  std::size_t rank = 0;
  std::vector<bool> used(n + 1, false);
  std::size_t fact = 1;
  for (std::size_t i = 2; i < n; ++i) fact *= i;
  for (std::size_t i = 1; i <= n; ++i) {
    const auto v = static_cast<std::size_t>(pi(i));
    std::size_t smaller = 0;
    for (std::size_t u = 1; u < v; ++u)
      if (!used[u]) ++smaller;
    rank += smaller * fact;
    used[v] = true;
    if (n - i > 0) fact /= (n - i);
  }
  return rank;
}

}  // namespace permfit
