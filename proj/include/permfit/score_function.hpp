#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>

namespace permfit {

/// A continuous map f : [0,1]² → ℝ together with the metadata the
/// estimators and grid approximations need.
///
/// The uniform-continuity bound ε_k = sup_{|Δx|,|Δy| ≤ 1/k} |f(x₁,y₁) − f(x₂,y₂)|
/// controls how far the k-grid value W_k can sit from its limit. Built-ins
/// carry closed-form Lipschitz bounds `c/k`; custom functions either supply
/// `c` or get a sampled estimate, flagged by `modulus_is_heuristic()`.
class ScoreFunction {
 public:
  using Fn = std::function<double(double, double)>;

  /// f(x,y) = xy (Spearman rank correlation family).
  static ScoreFunction xy();
  /// f(x,y) = (x−1/2)(y−1/2).
  static ScoreFunction centered();
  /// f(x,y) = −|x−y| (Spearman footrule).
  static ScoreFunction footrule();
  /// f(x,y) = −(x−y)².
  static ScoreFunction squared();

  /// Built-in by CLI name: "xy", "centered", "footrule", "sq".
  static ScoreFunction from_name(std::string_view name);

  /// `lipschitz_constant` c gives ε_k = c/k. Without it ε_k is estimated by
  /// sampling and marked heuristic.
  static ScoreFunction custom(std::string name, Fn fn, bool symmetric,
                              std::optional<double> lipschitz_constant = {});

  /// f + φ(x) + ψ(y). Defines the same permutation model as f.
  ScoreFunction with_margins(std::function<double(double)> phi,
                             std::function<double(double)> psi) const;

  double operator()(double x, double y) const { return (*fn_)(x, y); }

  const std::string& name() const noexcept { return name_; }
  bool symmetric() const noexcept { return symmetric_; }
  double modulus_bound(std::size_t k) const;
  bool modulus_is_heuristic() const noexcept { return !lipschitz_; }

 private:
  ScoreFunction(std::string name, Fn fn, bool symmetric, std::optional<double> lipschitz);

  std::string name_;
  std::shared_ptr<const Fn> fn_;
  bool symmetric_ = false;
  std::optional<double> lipschitz_;
};

}  // namespace permfit
