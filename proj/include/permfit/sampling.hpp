#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "permfit/model.hpp"
#include "permfit/permutation.hpp"
#include "permfit/rng.hpp"

namespace permfit {

/// One MCMC chain. `pi` stays a bijection after every transition.
struct ChainState {
  std::vector<std::int32_t> pi;  // 1-based values, pi[i-1] = π(i)
  CounterRng rng;
  std::uint64_t steps = 0;
  std::uint64_t sweeps = 0;
  std::uint64_t proposals = 0;
  std::uint64_t swaps = 0;

  /// Starts from a uniformly random permutation drawn from `rng`.
  ChainState(std::size_t n, CounterRng rng);
  ChainState(const Permutation& start, CounterRng rng);

  Permutation permutation() const { return Permutation(pi); }
  double swap_rate() const noexcept {
    return proposals == 0 ? 0.0 : static_cast<double>(swaps) / static_cast<double>(proposals);
  }
};

/// Uniform random permutation of size n (Fisher–Yates shuffle).
Permutation uniform_permutation(std::size_t n, CounterRng& rng);

/// Heat-bath probability of swapping π(i) and π(j) (1-based, i < j) given
/// the rest: w(swapped) / (w(current) + w(swapped)).
double swap_probability(const ModelSpec& model, std::span<const std::int32_t> pi, std::size_t i,
                        std::size_t j);

/// Picks a uniform pair I < J and swaps with swap_probability. The kernel
/// is reversible with respect to the model pmf.
void gibbs_swap_step(ChainState& state, const ModelSpec& model);

/// True for the f = xy family with θ > 0, which the auxiliary-variable
/// sweep requires.
bool supports_auxiliary_sweep(const ModelSpec& model);

/// One auxiliary-variable sweep: U_i ~ Unif[0, e^{(θ/n²) i π(i)}], then a
/// uniform permutation among those with π(i) ≥ (n²/(θi)) log U_i.
void auxiliary_gibbs_sweep(ChainState& state, const ModelSpec& model);

enum class SamplerKind { swap, auxiliary };

struct SampleOptions {
  std::size_t draws = 1;
  /// Sweeps discarded before the first draw.
  std::size_t burn = 100;
  /// Sweeps between consecutive draws (≥ 1).
  std::size_t thin = 1;
  SamplerKind sampler = SamplerKind::swap;
  std::uint64_t seed = 0;
};

/// A swap-sampler sweep is n pair updates; an auxiliary sweep is one full
/// resampling. Deterministic in `opts.seed`. Throws UnsupportedError if
/// the auxiliary sampler is requested for an unsupported model.
std::vector<Permutation> sample(const ModelSpec& model, const SampleOptions& opts);

/// Runs one sweep of the chosen kind.
void sweep(ChainState& state, const ModelSpec& model, SamplerKind sampler);

}  // namespace permfit
