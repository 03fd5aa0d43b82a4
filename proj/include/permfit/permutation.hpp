#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace permfit {

class ScoreFunction;

/// A bijection of {1..n}. All public accessors are 1-based.
class Permutation {
 public:
  /// Validates that `map` (1-based values) is a bijection of {1..n}.
  explicit Permutation(std::vector<std::int32_t> map);

  static Permutation identity(std::size_t n);
  static Permutation reversed(std::size_t n);

  std::size_t size() const noexcept { return map_.size(); }
  /// π(i) for 1 ≤ i ≤ n.
  std::int32_t operator()(std::size_t i) const { return map_[i - 1]; }
  /// Values π(1..n) in order.
  std::span<const std::int32_t> values() const noexcept { return map_; }

  Permutation inverse() const;
  /// (π∘σ)(i) = π(σ(i)).
  Permutation compose(const Permutation& sigma) const;
  /// i ↦ n+1−π(i).
  Permutation complement() const;

  friend bool operator==(const Permutation&, const Permutation&) = default;

 private:
  std::vector<std::int32_t> map_;
};

/// #{(i,j): i<j, π(i)>π(j)} by merge counting, O(n log n).
std::uint64_t inversions(const Permutation& pi);

/// Σ_i f(i/n, π(i)/n).
double linear_statistic(const Permutation& pi, const ScoreFunction& f);

/// Σ_i i·π(i), exact.
std::uint64_t rank_product_sum(const Permutation& pi);

/// 1 − 6Σ(π(i)−σ(i))² / (n(n²−1)). Equals 1 for n = 1.
double spearman_r(const Permutation& pi, const Permutation& sigma);

/// Counts of the points (i/n, π(i)/n) in the k×k cells
/// T_rs = {⌈kx⌉ = r, ⌈ky⌉ = s}; points on r/k belong to cell r.
struct BinMatrix {
  std::size_t k = 0;
  std::size_t n = 0;
  std::vector<std::int64_t> counts;  // row-major k×k

  std::int64_t operator()(std::size_t r, std::size_t s) const {
    return counts[(r - 1) * k + (s - 1)];
  }
  std::int64_t& operator()(std::size_t r, std::size_t s) {
    return counts[(r - 1) * k + (s - 1)];
  }
};

/// Required row (and column) total M_r = ⌊nr/k⌋ − ⌊n(r−1)/k⌋, the number of
/// i with ⌈ki/n⌉ = r.
std::int64_t bin_margin(std::size_t n, std::size_t k, std::size_t r);

/// Index r of the cell containing coordinate i/n, i.e. ⌈k·i/n⌉.
std::size_t bin_index(std::size_t i, std::size_t n, std::size_t k);

BinMatrix bin_counts(const Permutation& pi, std::size_t k);

/// Throws DomainError unless every row and column of `m` has the total
/// bin_margin(n,k,·).
void validate_bin_matrix(const BinMatrix& m);

/// log P(M(π) = M) under the uniform permutation (Fisher–Yates law).
double fisher_yates_logpmf(const BinMatrix& m);

/// sup_{x,y} |F_μπ(x,y) − F_νπ(x,y)| between the cell-smeared measure μπ
/// and the point-mass measure νπ. Always ≤ 2/n.
double cdf_distance(const Permutation& pi);

// CSV I/O. Header `i,pi` then n rows.
Permutation read_permutation_csv(const std::filesystem::path& path);
void write_permutation_csv(std::ostream& out, const Permutation& pi);

// Multi-draw CSV. Header `draw,i,pi`; draws are numbered from 1.
std::vector<Permutation> read_multi_draw_csv(const std::filesystem::path& path);
void write_multi_draw_csv(std::ostream& out, std::span<const Permutation> draws);

/// Reads either format, detected by header.
std::vector<Permutation> read_permutations(const std::filesystem::path& path);

}  // namespace permfit
