#pragma once

// Brute-force reference computations shared by the unit tests. These are
// deliberately naive so they do not share code paths with the library.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <vector>

#include "permfit/permutation.hpp"
#include "permfit/rng.hpp"

namespace oracle {

inline std::vector<std::vector<std::int32_t>> all_permutations(std::size_t n) {
  std::vector<std::int32_t> v(n);
  std::iota(v.begin(), v.end(), 1);
  std::vector<std::vector<std::int32_t>> out;
  do out.push_back(v);
  while (std::next_permutation(v.begin(), v.end()));
  return out;
}

inline std::uint64_t naive_inversions(const std::vector<std::int32_t>& v) {
  std::uint64_t c = 0;
  for (std::size_t i = 0; i < v.size(); ++i)
    for (std::size_t j = i + 1; j < v.size(); ++j)
      if (v[i] > v[j]) ++c;
  return c;
}

inline std::vector<std::int32_t> random_values(std::size_t n, permfit::CounterRng& rng) {
  std::vector<std::int32_t> v(n);
  std::iota(v.begin(), v.end(), 1);
  for (std::size_t i = n; i > 1; --i) std::swap(v[i - 1], v[rng.below(i)]);
  return v;
}

inline double log_sum_exp(const std::vector<double>& xs) {
  const double m = *std::max_element(xs.begin(), xs.end());
  double s = 0.0;
  for (double x : xs) s += std::exp(x - m);
  return m + std::log(s);
}

inline double total_variation(const std::vector<double>& p, const std::vector<double>& q) {
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) s += std::abs(p[i] - q[i]);
  return 0.5 * s;
}

// Cell of coordinate i/n among k equal bands, counting i/n = r/k as cell r.
inline std::size_t naive_cell(std::size_t i, std::size_t n, std::size_t k) {
  for (std::size_t r = 1; r <= k; ++r)
    if (i * k <= r * n) return r;
  return k;
}

}  // namespace oracle
