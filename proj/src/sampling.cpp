#include "permfit/sampling.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

#include "permfit/errors.hpp"

namespace permfit {

namespace {

std::vector<std::int32_t> shuffled(std::size_t n, CounterRng& rng) {
  std::vector<std::int32_t> v(n);
  std::iota(v.begin(), v.end(), 1);
  for (std::size_t i = n; i > 1; --i) std::swap(v[i - 1], v[rng.below(i)]);
  return v;
}

// Change in Inv when the values at positions i < j (1-based) are swapped.
std::int64_t inversion_delta(std::span<const std::int32_t> pi, std::size_t i, std::size_t j) {
  const auto a = pi[i - 1], b = pi[j - 1];
  const auto lo = std::min(a, b), hi = std::max(a, b);
  std::int64_t between = 0;
  for (std::size_t m = i; m < j - 1; ++m)
    if (pi[m] > lo && pi[m] < hi) ++between;
  const std::int64_t mag = 1 + 2 * between;
  return a < b ? mag : -mag;
}

double logistic(double t) {
  // 1/(1 + e^{−t}) without overflow.
  if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
  const double e = std::exp(t);
  return e / (1.0 + e);
}

}  // namespace

ChainState::ChainState(std::size_t n, CounterRng r) : pi(), rng(r) {
  if (n < 1) throw DomainError("ChainState: n must be >= 1");
  pi = shuffled(n, rng);
}

ChainState::ChainState(const Permutation& start, CounterRng r)
    : pi(start.values().begin(), start.values().end()), rng(r) {}

Permutation uniform_permutation(std::size_t n, CounterRng& rng) {
  if (n < 1) throw DomainError("uniform_permutation: n must be >= 1");
  return Permutation(shuffled(n, rng));
}

double swap_probability(const ModelSpec& model, std::span<const std::int32_t> pi, std::size_t i,
                        std::size_t j) {
  const auto n = pi.size();
  if (n != model.n) throw SizeMismatch("swap_probability: permutation size differs from model n");
  if (!(i >= 1 && i < j && j <= n)) throw DomainError("swap_probability: need 1 <= i < j <= n");
  double delta = 0.0;  // log-weight(swapped) − log-weight(current)
  if (const auto* lin = std::get_if<LinearModel>(&model.variant)) {
    const double nd = static_cast<double>(n);
    const double x = static_cast<double>(i) / nd, z = static_cast<double>(j) / nd;
    const double a = pi[i - 1] / nd, b = pi[j - 1] / nd;
    const auto& f = lin->f;
    const double y = f(x, a) + f(z, b) - f(x, b) - f(z, a);
    delta = -lin->theta * y;
  } else {
    delta = model.theta() / static_cast<double>(n) * static_cast<double>(inversion_delta(pi, i, j));
  }
  return logistic(delta);
}

void gibbs_swap_step(ChainState& state, const ModelSpec& model) {
  const auto n = state.pi.size();
  ++state.steps;
  if (n < 2) return;
  std::size_t i = state.rng.below(n) + 1;
  std::size_t j = state.rng.below(n - 1) + 1;
  if (j >= i) ++j;
  if (i > j) std::swap(i, j);
  ++state.proposals;
  if (state.rng.uniform() < swap_probability(model, state.pi, i, j)) {
    std::swap(state.pi[i - 1], state.pi[j - 1]);
    ++state.swaps;
  }
}

bool supports_auxiliary_sweep(const ModelSpec& model) {
  const auto* lin = std::get_if<LinearModel>(&model.variant);
  return lin && lin->f.name() == "xy" && lin->theta > 0.0;
}

void auxiliary_gibbs_sweep(ChainState& state, const ModelSpec& model) {
  if (!supports_auxiliary_sweep(model))
    throw UnsupportedError("auxiliary sweep needs the f = xy model with theta > 0");
  const auto n = state.pi.size();
  if (n != model.n) throw SizeMismatch("auxiliary sweep: chain size differs from model n");
  const double nd = static_cast<double>(n);
  const double scale = nd * nd / model.theta();

  // Lower bound on the new value at position j: with U_j = V·e^{θ j π(j)/n²},
  // the constraint U_j ≤ e^{θ j π'(j)/n²} reads π'(j) ≥ π(j) + (n²/(θj)) log V.
  std::vector<std::vector<std::size_t>> bucket(n + 1);
  for (std::size_t j = 1; j <= n; ++j) {
    const double b = state.pi[j - 1] + scale / static_cast<double>(j) * std::log(state.rng.uniform_pos());
    const double c = std::ceil(b);
    const auto level = c <= 1.0 ? std::size_t{1} : static_cast<std::size_t>(c);
    bucket[level].push_back(j);
  }
  std::vector<std::size_t> pool;
  pool.reserve(n);
  for (std::size_t l = 1; l <= n; ++l) {
    pool.insert(pool.end(), bucket[l].begin(), bucket[l].end());
    if (pool.empty()) throw std::logic_error("auxiliary sweep: no feasible position for a value");
    const auto pick = state.rng.below(pool.size());
    state.pi[pool[pick] - 1] = static_cast<std::int32_t>(l);
    pool[pick] = pool.back();
    pool.pop_back();
  }
  ++state.steps;
}

void sweep(ChainState& state, const ModelSpec& model, SamplerKind sampler) {
  if (sampler == SamplerKind::auxiliary) {
    auxiliary_gibbs_sweep(state, model);
  } else {
    for (std::size_t t = 0; t < state.pi.size(); ++t) gibbs_swap_step(state, model);
  }
  ++state.sweeps;
}

std::vector<Permutation> sample(const ModelSpec& model, const SampleOptions& opts) {
  if (model.n < 1) throw DomainError("sample: n must be >= 1");
  if (opts.thin < 1) throw DomainError("sample: thin must be >= 1");
  if (opts.sampler == SamplerKind::auxiliary && !supports_auxiliary_sweep(model))
    throw UnsupportedError("auxiliary sampler needs the f = xy model with theta > 0");
  ChainState state(model.n, CounterRng(opts.seed));
  for (std::size_t b = 0; b < opts.burn; ++b) sweep(state, model, opts.sampler);
  std::vector<Permutation> out;
  out.reserve(opts.draws);
  for (std::size_t d = 0; d < opts.draws; ++d) {
    if (d > 0)
      for (std::size_t t = 0; t < opts.thin; ++t) sweep(state, model, opts.sampler);
    out.push_back(state.permutation());
  }
  return out;
}

}  // namespace permfit
