#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>

#include "permfit/permutation.hpp"

#include "json.hpp"

namespace permfit {

/// The 1970 draft lottery: π(draw_order) = day_of_year, τ = n+1−π.
struct LotteryData {
  Permutation pi;
  Permutation tau;
};

inline constexpr std::size_t kLotteryDays = 366;

/// Reads a `day_of_year,draw_order` CSV; both columns must be permutations
/// of 1..366.
LotteryData read_lottery_csv(const std::filesystem::path& path);

struct LotteryOptions {
  std::size_t k = 1000;         // grid order for the LD fit
  std::size_t ipfp_iters = 200;  // IPFP iterations per LD score evaluation
  std::size_t hist_k = 10;       // order of the binned count grids
  std::uint64_t seed = 1970;     // seed of the uniform reference permutation
  double tol = 1e-8;
};

/// Chebyshev bound as printed for the lottery data.
inline constexpr double kPublishedChebyshevBound = 0.0075;

/// Uniformity test, rank correlation, PL and LD fits, and binned grids of τ
/// and of a seeded uniform permutation.
nlohmann::json lottery_report(const LotteryData& data, const LotteryOptions& opts = {});

}  // namespace permfit
