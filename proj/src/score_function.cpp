#include "permfit/score_function.hpp"

#include <algorithm>
#include <cmath>

#include "permfit/errors.hpp"

namespace permfit {

ScoreFunction::ScoreFunction(std::string name, Fn fn, bool symmetric,
                             std::optional<double> lipschitz)
    : name_(std::move(name)),
      fn_(std::make_shared<const Fn>(std::move(fn))),
      symmetric_(symmetric),
      lipschitz_(lipschitz) {}

ScoreFunction ScoreFunction::xy() {
  return {"xy", [](double x, double y) { return x * y; }, true, 2.0};
}

ScoreFunction ScoreFunction::centered() {
  return {"centered", [](double x, double y) { return (x - 0.5) * (y - 0.5); }, true, 2.0};
}

ScoreFunction ScoreFunction::footrule() {
  return {"footrule", [](double x, double y) { return -std::abs(x - y); }, true, 2.0};
}

ScoreFunction ScoreFunction::squared() {
  return {"sq", [](double x, double y) { return -(x - y) * (x - y); }, true, 4.0};
}

ScoreFunction ScoreFunction::from_name(std::string_view name) {
  if (name == "xy") return xy();
  if (name == "centered") return centered();
  if (name == "footrule") return footrule();
  if (name == "sq") return squared();
  throw DomainError("unknown score function '" + std::string(name) +
                    "' (expected xy, centered, footrule, sq)");
}

ScoreFunction ScoreFunction::custom(std::string name, Fn fn, bool symmetric,
                                    std::optional<double> lipschitz_constant) {
  if (!fn) throw DomainError("custom score function is empty");
  if (lipschitz_constant && !(*lipschitz_constant >= 0.0))
    throw DomainError("Lipschitz constant must be nonnegative");
  return {std::move(name), std::move(fn), symmetric, lipschitz_constant};
}

ScoreFunction ScoreFunction::with_margins(std::function<double(double)> phi,
                                          std::function<double(double)> psi) const {
  auto base = fn_;
  Fn shifted = [base, phi = std::move(phi), psi = std::move(psi)](double x, double y) {
    return (*base)(x, y) + phi(x) + psi(y);
  };
  // The margins change ε_k, so the bound becomes a sampled estimate.
  return {name_ + "+margins", std::move(shifted), false, std::nullopt};
}

double ScoreFunction::modulus_bound(std::size_t k) const {
  if (k == 0) throw DomainError("modulus_bound: k must be >= 1");
  if (lipschitz_) return *lipschitz_ / static_cast<double>(k);
  // Heuristic: compare f on a lattice 4× finer than the grid against all
  // neighbours within one grid step in each coordinate.
  constexpr std::size_t kRefine = 4;
  const std::size_t m = std::min<std::size_t>(kRefine * k, 400);
  const double h = 1.0 / static_cast<double>(m);
  const auto reach = static_cast<long>(std::max<double>(1.0, std::floor(static_cast<double>(m) / static_cast<double>(k))));
  std::vector<double> vals((m + 1) * (m + 1));
  for (std::size_t a = 0; a <= m; ++a)
    for (std::size_t b = 0; b <= m; ++b) vals[a * (m + 1) + b] = (*fn_)(a * h, b * h);
  double best = 0.0;
  const auto M = static_cast<long>(m);
  for (long a = 0; a <= M; ++a)
    for (long b = 0; b <= M; ++b) {
      const double v = vals[a * (M + 1) + b];
      for (long da = 0; da <= reach && a + da <= M; ++da)
        for (long db = -reach; db <= reach; ++db) {
          if (b + db < 0 || b + db > M) continue;
          best = std::max(best, std::abs(v - vals[(a + da) * (M + 1) + (b + db)]));
        }
    }
  return best;
}

}  // namespace permfit
