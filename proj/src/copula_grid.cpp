#include "permfit/copula_grid.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

#include "permfit/errors.hpp"
#include "permfit/permutation.hpp"
#include "permfit/score_function.hpp"

namespace permfit {

CopulaGrid::CopulaGrid(std::size_t k, std::vector<double> w) : k_(k), w_(std::move(w)) {
  if (k_ < 1) throw DomainError("copula grid: k must be >= 1");
  if (w_.size() != k_ * k_) throw DomainError("copula grid: expected k*k weights");
  double total = 0.0;
  for (double v : w_) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw DomainError("copula grid: negative or non-finite weight");
    total += v;
  }
  if (std::abs(total - 1.0) > 1e-9) throw DomainError("copula grid: weights must sum to 1");
}

double CopulaGrid::row_sum(std::size_t r) const {
  double s = 0.0;
  for (std::size_t c = 1; c <= k_; ++c) s += (*this)(r, c);
  return s;
}

double CopulaGrid::col_sum(std::size_t s) const {
  double t = 0.0;
  for (std::size_t r = 1; r <= k_; ++r) t += (*this)(r, s);
  return t;
}

double CopulaGrid::marginal_deviation() const {
  const double target = 1.0 / static_cast<double>(k_);
  double dev = 0.0;
  for (std::size_t i = 1; i <= k_; ++i)
    dev = std::max({dev, std::abs(row_sum(i) - target), std::abs(col_sum(i) - target)});
  return dev;
}

bool CopulaGrid::is_doubly_stochastic(double tol) const { return marginal_deviation() <= tol; }

std::vector<double> CopulaGrid::step_density() const {
  const double scale = static_cast<double>(k_) * static_cast<double>(k_);
  std::vector<double> out(w_);
  for (auto& v : out) v *= scale;
  return out;
}

CopulaGrid uniform_grid(std::size_t k) {
  if (k < 1) throw DomainError("uniform_grid: k must be >= 1");
  const double v = 1.0 / (static_cast<double>(k) * static_cast<double>(k));
  return CopulaGrid(k, std::vector<double>(k * k, v));
}

double kl_to_uniform(const CopulaGrid& a) {
  double s = 2.0 * std::log(static_cast<double>(a.order()));
  for (double v : a.weights())
    if (v > 0.0) s += v * std::log(v);
  return s;
}

double grid_mean(const CopulaGrid& a, const ScoreFunction& f) {
  const auto k = a.order();
  const double kd = static_cast<double>(k);
  double s = 0.0;
  for (std::size_t r = 1; r <= k; ++r)
    for (std::size_t c = 1; c <= k; ++c) s += f(r / kd, c / kd) * a(r, c);
  return s;
}

CopulaGrid from_permutation(const Permutation& pi, std::size_t k) {
  const auto m = bin_counts(pi, k);
  std::vector<double> w(m.counts.size());
  const double n = static_cast<double>(pi.size());
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = static_cast<double>(m.counts[i]) / n;
  return CopulaGrid(k, std::move(w));
}

void write_grid_csv(std::ostream& out, std::size_t k, const std::vector<double>& values) {
  if (values.size() != k * k) throw DomainError("write_grid_csv: expected k*k values");
  out << k << '\n';
  char buf[32];
  for (std::size_t r = 0; r < k; ++r) {
    for (std::size_t c = 0; c < k; ++c) {
      std::snprintf(buf, sizeof buf, "%.10g", values[r * k + c]);
      out << (c ? "," : "") << buf;
    }
    out << '\n';
  }
}

}  // namespace permfit
