#include "permfit/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <numeric>

#include "permfit/errors.hpp"
#include "permfit/kendall.hpp"

namespace permfit {

namespace {

nlohmann::json number(double v) {
  if (!std::isfinite(v)) return nullptr;
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return std::strtod(buf, nullptr);
}

double logistic_neg(double t) {
  // 1/(1 + e^{t})
  if (t <= 0.0) return 1.0 / (1.0 + std::exp(t));
  const double e = std::exp(-t);
  return e / (1.0 + e);
}

std::size_t common_size(std::span<const Permutation> perms) {
  if (perms.empty()) throw DomainError("estimator: at least one permutation is required");
  const auto n = perms.front().size();
  for (const auto& p : perms)
    if (p.size() != n) throw SizeMismatch("estimator: permutations differ in size");
  return n;
}

}  // namespace

std::string_view to_string(EstimateMethod method) {
  switch (method) {
    case EstimateMethod::pl: return "PL";
    case EstimateMethod::ld: return "LD";
    case EstimateMethod::ml: return "ML";
    case EstimateMethod::kendall_ld: return "Kendall-LD";
    case EstimateMethod::kendall_ml: return "Kendall-ML";
  }
  return "unknown";
}

std::string_view to_string(EstimateStatus status) {
  switch (status) {
    case EstimateStatus::ok: return "ok";
    case EstimateStatus::no_root: return "no_root";
    case EstimateStatus::all_pairs_degenerate: return "all_pairs_degenerate";
  }
  return "unknown";
}

nlohmann::json to_json(const EstimateResult& r) {
  nlohmann::json j;
  j["theta_hat"] = number(r.theta_hat);
  j["method"] = std::string(to_string(r.method));
  j["bracket_lo"] = number(r.bracket_lo);
  j["bracket_hi"] = number(r.bracket_hi);
  j["evaluations"] = r.evaluations;
  j["score_at_root"] = number(r.score_at_root);
  j["status"] = std::string(to_string(r.status));
  if (r.status == EstimateStatus::no_root) j["sign"] = r.no_root_sign > 0 ? "positive" : "negative";
  if (r.grid_order) j["k"] = r.grid_order;
  return j;
}

EstimateResult find_decreasing_root(const std::function<double(double)>& score,
                                    EstimateMethod method, const RootOptions& opts) {
  if (!(opts.tol > 0.0) || !(opts.initial > 0.0) || !(opts.cap >= opts.initial))
    throw DomainError("root finding: need tol > 0 and 0 < initial <= cap");
  EstimateResult res;
  res.method = method;
  const auto eval = [&](double t) {
    ++res.evaluations;
    const double s = score(t);
    if (std::isnan(s)) throw DomainError("root finding: score evaluated to NaN");
    return s;
  };
  const auto done = [&](double t, double s, double lo, double hi) {
    res.theta_hat = t;
    res.score_at_root = s;
    res.bracket_lo = lo;
    res.bracket_hi = hi;
    return res;
  };

  double lo = -opts.initial, hi = opts.initial;
  double s_lo = eval(lo), s_hi = eval(hi);
  if (s_lo == 0.0) return done(lo, s_lo, lo, lo);
  if (s_hi == 0.0) return done(hi, s_hi, hi, hi);
  // Expand towards the root by doubling, never past ±cap.
  while (s_hi > 0.0) {
    if (hi >= opts.cap) {
      res.status = EstimateStatus::no_root;
      res.no_root_sign = 1;
      res.bracket_lo = -opts.cap;
      res.bracket_hi = opts.cap;
      res.score_at_root = s_hi;
      return res;
    }
    lo = hi;
    s_lo = s_hi;
    hi = std::min(2.0 * hi, opts.cap);
    s_hi = eval(hi);
    if (s_hi == 0.0) return done(hi, s_hi, hi, hi);
  }
  while (s_lo < 0.0) {
    if (lo <= -opts.cap) {
      res.status = EstimateStatus::no_root;
      res.no_root_sign = -1;
      res.bracket_lo = -opts.cap;
      res.bracket_hi = opts.cap;
      res.score_at_root = s_lo;
      return res;
    }
    hi = lo;
    s_hi = s_lo;
    lo = std::max(2.0 * lo, -opts.cap);
    s_lo = eval(lo);
    if (s_lo == 0.0) return done(lo, s_lo, lo, lo);
  }
  for (;;) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) return done(mid, eval(mid), lo, hi);
    const double s = eval(mid);
    if (s == 0.0 || (hi - lo < opts.tol && std::abs(s) <= opts.tol)) return done(mid, s, lo, hi);
    if (s > 0.0)
      lo = mid;
    else
      hi = mid;
  }
}

// ---- pseudo-likelihood ----------------------------------------------------

std::vector<double> pair_differences(const Permutation& pi, const ScoreFunction& f) {
  const auto n = pi.size();
  const double nd = static_cast<double>(n);
  // F[i][j] = f(i/n, π(j)/n); y(i,j) = F[i][i] + F[j][j] − F[i][j] − F[j][i].
  std::vector<double> F(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      F[i * n + j] = f(static_cast<double>(i + 1) / nd, pi(j + 1) / nd);
  std::vector<double> y;
  y.reserve(n * (n - 1) / 2);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      y.push_back(F[i * n + i] + F[j * n + j] - F[i * n + j] - F[j * n + i]);
  return y;
}

namespace {

double pl_score_from(const std::vector<double>& y, double theta) {
  double s = 0.0;
  for (double v : y) s += v * logistic_neg(theta * v);
  return s;
}

}  // namespace

double pl_score(const Permutation& pi, const ScoreFunction& f, double theta) {
  return pl_score_from(pair_differences(pi, f), theta);
}

double pl_score_derivative(const Permutation& pi, const ScoreFunction& f, double theta) {
  double s = 0.0;
  for (double v : pair_differences(pi, f)) {
    const double p = logistic_neg(theta * v);
    s -= v * v * p * (1.0 - p);
  }
  return s;
}

EstimateResult pl_estimate(std::span<const Permutation> perms, const ScoreFunction& f,
                           const RootOptions& opts) {
  common_size(perms);
  std::vector<double> y;
  for (const auto& p : perms) {
    auto part = pair_differences(p, f);
    y.insert(y.end(), part.begin(), part.end());
  }
  if (std::all_of(y.begin(), y.end(), [](double v) { return v == 0.0; })) {
    EstimateResult res;
    res.method = EstimateMethod::pl;
    res.status = EstimateStatus::all_pairs_degenerate;
    return res;
  }
  return find_decreasing_root([&](double t) { return pl_score_from(y, t); }, EstimateMethod::pl, opts);
}

EstimateResult pl_estimate(const Permutation& pi, const ScoreFunction& f, const RootOptions& opts) {
  return pl_estimate(std::span<const Permutation>(&pi, 1), f, opts);
}

// ---- limiting-density (LD) estimator ------------------------------------

namespace {

// With an explicit iteration budget the last iterate is used even if the
// tolerance was not reached; the default budget must converge.
double grid_derivative(const ScoreFunction& f, double theta, std::size_t k, const IpfpOptions& ipfp) {
  return evaluate_wk(f, theta, k, ipfp, ipfp.max_iter != 0).w_k_prime;
}

}  // namespace

double ld_score(const Permutation& pi, const ScoreFunction& f, double theta, std::size_t k,
                const IpfpOptions& ipfp) {
  return linear_statistic(pi, f) / static_cast<double>(pi.size()) - grid_derivative(f, theta, k, ipfp);
}

EstimateResult ld_estimate_from_statistic(double mean_statistic, const ScoreFunction& f,
                                          std::size_t k, const RootOptions& opts,
                                          const IpfpOptions& ipfp) {
  if (!std::isfinite(mean_statistic)) throw DomainError("ld_estimate: statistic must be finite");
  auto res = find_decreasing_root(
      [&](double t) { return mean_statistic - grid_derivative(f, t, k, ipfp); }, EstimateMethod::ld,
      opts);
  res.grid_order = k;
  return res;
}

EstimateResult ld_estimate(std::span<const Permutation> perms, const ScoreFunction& f,
                           std::size_t k, const RootOptions& opts, const IpfpOptions& ipfp) {
  const auto n = common_size(perms);
  double mean = 0.0;
  for (const auto& p : perms) mean += linear_statistic(p, f) / static_cast<double>(n);
  mean /= static_cast<double>(perms.size());
  return ld_estimate_from_statistic(mean, f, k, opts, ipfp);
}

EstimateResult ld_estimate(const Permutation& pi, const ScoreFunction& f, std::size_t k,
                           const RootOptions& opts, const IpfpOptions& ipfp) {
  return ld_estimate(std::span<const Permutation>(&pi, 1), f, k, opts, ipfp);
}

// ---- exact maximum likelihood -------------------------------------------

LinearStatisticLaw::LinearStatisticLaw(const ScoreFunction& f, std::size_t n) : n_(n) {
  if (n < 1 || n > kMaxEnumerationSize)
    throw DomainError("LinearStatisticLaw: n must lie in 1.." + std::to_string(kMaxEnumerationSize));
  std::vector<std::int32_t> v(n);
  std::iota(v.begin(), v.end(), 1);
  std::vector<double> all;
  do {
    all.push_back(linear_statistic(Permutation(v), f));
  } while (std::next_permutation(v.begin(), v.end()));
  std::sort(all.begin(), all.end());
  for (double s : all) {
    if (!values_.empty() && values_.back() == s) {
      multiplicity_.back() += 1.0;
    } else {
      values_.push_back(s);
      multiplicity_.push_back(1.0);
    }
  }
}

double LinearStatisticLaw::mean_per_site(double theta) const {
  double m = -std::numeric_limits<double>::infinity();
  for (double v : values_) m = std::max(m, theta * v);
  double z = 0.0, e = 0.0;
  for (std::size_t i = 0; i < values_.size(); ++i) {
    const double w = multiplicity_[i] * std::exp(theta * values_[i] - m);
    z += w;
    e += w * values_[i];
  }
  return e / z / static_cast<double>(n_);
}

double ml_score(const Permutation& pi, const ModelSpec& family, double theta) {
  const auto n = pi.size();
  const double nd = static_cast<double>(n);
  if (const auto* lin = std::get_if<LinearModel>(&family.variant)) {
    const LinearStatisticLaw law(lin->f, n);
    return linear_statistic(pi, lin->f) / nd - law.mean_per_site(theta);
  }
  return static_cast<double>(inversions(pi)) / (nd * nd) - kendall_log_z_prime(n, theta) / nd;
}

EstimateResult ml_linear_from_statistic(double mean_statistic, const LinearStatisticLaw& law,
                                        const RootOptions& opts) {
  return find_decreasing_root([&](double t) { return mean_statistic - law.mean_per_site(t); },
                              EstimateMethod::ml, opts);
}

EstimateResult ml_exact(std::span<const Permutation> perms, const ModelSpec& family,
                        const RootOptions& opts) {
  const auto n = common_size(perms);
  const double nd = static_cast<double>(n);
  const double m = static_cast<double>(perms.size());
  if (const auto* lin = std::get_if<LinearModel>(&family.variant)) {
    const LinearStatisticLaw law(lin->f, n);
    double mean = 0.0;
    for (const auto& p : perms) mean += linear_statistic(p, lin->f) / nd;
    return ml_linear_from_statistic(mean / m, law, opts);
  }
  double mean_inv = 0.0;
  for (const auto& p : perms) mean_inv += static_cast<double>(inversions(p));
  mean_inv /= m;
  return find_decreasing_root(
      [&](double t) { return mean_inv / (nd * nd) - kendall_log_z_prime(n, t) / nd; },
      EstimateMethod::kendall_ml, opts);
}

EstimateResult ml_exact(const Permutation& pi, const ModelSpec& family, const RootOptions& opts) {
  return ml_exact(std::span<const Permutation>(&pi, 1), family, opts);
}

// ---- Kendall limit estimator --------------------------------------------

double kendall_ld_score(const Permutation& pi, double theta) {
  const double nd = static_cast<double>(pi.size());
  return static_cast<double>(inversions(pi)) / (nd * nd) - kendall_limit_c_prime(theta);
}

EstimateResult kendall_ld_estimate(std::span<const Permutation> perms, const RootOptions& opts) {
  const auto n = common_size(perms);
  const double nd = static_cast<double>(n);
  double mean = 0.0;
  for (const auto& p : perms) mean += static_cast<double>(inversions(p)) / (nd * nd);
  mean /= static_cast<double>(perms.size());
  return find_decreasing_root([&](double t) { return mean - kendall_limit_c_prime(t); },
                              EstimateMethod::kendall_ld, opts);
}

EstimateResult kendall_ld_estimate(const Permutation& pi, const RootOptions& opts) {
  return kendall_ld_estimate(std::span<const Permutation>(&pi, 1), opts);
}

// ---- pooled scores --------------------------------------------------------

namespace {

void check_method(const ModelSpec& family, EstimateMethod method) {
  const bool linear = family.is_linear();
  const bool ok = linear ? (method == EstimateMethod::pl || method == EstimateMethod::ld ||
                            method == EstimateMethod::ml)
                         : (method == EstimateMethod::ml || method == EstimateMethod::kendall_ml ||
                            method == EstimateMethod::kendall_ld);
  if (!ok)
    throw UnsupportedError("method " + std::string(to_string(method)) + " is not available for the " +
                           (linear ? "linear" : "Kendall") + " model");
}

}  // namespace

double multi_sample_score(std::span<const Permutation> perms, const ModelSpec& family,
                          double theta, EstimateMethod method, const EstimatorOptions& opts) {
  common_size(perms);
  check_method(family, method);
  double s = 0.0;
  switch (method) {
    case EstimateMethod::pl: {
      const auto& f = std::get<LinearModel>(family.variant).f;
      for (const auto& p : perms) s += pl_score(p, f, theta);
      break;
    }
    case EstimateMethod::ld: {
      const auto& f = std::get<LinearModel>(family.variant).f;
      const double w = grid_derivative(f, theta, opts.k, opts.ipfp);
      for (const auto& p : perms) s += linear_statistic(p, f) / static_cast<double>(p.size()) - w;
      break;
    }
    case EstimateMethod::ml:
    case EstimateMethod::kendall_ml:
      for (const auto& p : perms) s += ml_score(p, family, theta);
      break;
    case EstimateMethod::kendall_ld:
      for (const auto& p : perms) s += kendall_ld_score(p, theta);
      break;
  }
  return s;
}

EstimateResult estimate(std::span<const Permutation> perms, const ModelSpec& family,
                        EstimateMethod method, const EstimatorOptions& opts) {
  common_size(perms);
  check_method(family, method);
  switch (method) {
    case EstimateMethod::pl:
      return pl_estimate(perms, std::get<LinearModel>(family.variant).f, opts.root);
    case EstimateMethod::ld:
      return ld_estimate(perms, std::get<LinearModel>(family.variant).f, opts.k, opts.root, opts.ipfp);
    case EstimateMethod::ml:
    case EstimateMethod::kendall_ml:
      return ml_exact(perms, family, opts.root);
    case EstimateMethod::kendall_ld:
      return kendall_ld_estimate(perms, opts.root);
  }
  throw UnsupportedError("unknown estimation method");
}

// ---- uniformity test ------------------------------------------------------

UniformityTest uniformity_test(const Permutation& tau) {
  const double n = static_cast<double>(tau.size());
  if (tau.size() < 2) throw DomainError("uniformity_test: n must be >= 2");
  UniformityTest t;
  t.statistic = static_cast<double>(rank_product_sum(tau)) / (n * n * n);
  const double up = 1.0 + 1.0 / n;
  t.mean = 0.25 * up * up;
  t.variance = (1.0 - 1.0 / n) * up * up / (144.0 * n);
  t.z = (t.statistic - t.mean) / std::sqrt(t.variance);
  t.p_normal = 0.5 * std::erfc(t.z / std::sqrt(2.0));
  const double gap = t.statistic - t.mean;
  t.chebyshev_bound = gap == 0.0 ? 1.0 : t.variance / (gap * gap);
  return t;
}

nlohmann::json to_json(const UniformityTest& t) {
  return {{"statistic", number(t.statistic)}, {"mean", number(t.mean)},
          {"variance", number(t.variance)},   {"z", number(t.z)},
          {"p_normal", number(t.p_normal)},   {"chebyshev_bound", number(t.chebyshev_bound)}};
}

bool threshold_test(double theta_hat, double theta0, double theta1) {
  if (!(theta0 < theta1)) throw DomainError("threshold_test: need theta0 < theta1");
  return theta_hat > 0.5 * (theta0 + theta1);
}

}  // namespace permfit
