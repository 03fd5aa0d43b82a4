#include "permfit/kendall.hpp"

#include <array>
#include <cmath>
#include <limits>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "permfit/errors.hpp"

namespace permfit {

namespace {

// log((e^t − 1)/t), accurate near 0 and for large |t|.
double log_expm1_ratio(double t) {
  if (std::abs(t) < 1e-2) {
    const double t2 = t * t;
    return t / 2.0 + t2 / 24.0 - t2 * t2 / 2880.0 + t2 * t2 * t2 / 181440.0;
  }
  if (t > 30.0) return t + std::log1p(-std::exp(-t)) - std::log(t);
  return std::log(std::expm1(t) / t);
}

// g(t) = t/(1 − e^{−t}), the derivative of log((e^t − 1)/t) times t plus 1.
double g_ratio(double t) {
  if (std::abs(t) < 1e-8) return 1.0 + t / 2.0;
  return t / -std::expm1(-t);
}

}  // namespace

double kendall_log_z(std::size_t n, double theta) {
  if (n < 1) throw DomainError("kendall_log_z: n must be >= 1");
  if (!std::isfinite(theta)) throw DomainError("kendall_log_z: theta must be finite");
  const double x = theta / static_cast<double>(n);
  double s = 0.0;
  if (std::abs(x) < 1e-8) {
    // log(j) + (j−1)x/2 + (j²−1)x²/24 from the expansion of log([j]_q).
    for (std::size_t j = 2; j <= n; ++j) {
      const double jd = static_cast<double>(j);
      s += std::log(jd) + (jd - 1.0) * x / 2.0 + (jd * jd - 1.0) * x * x / 24.0;
    }
    return s;
  }
  // log((q^j − 1)/(q − 1)) = log_expm1_ratio(jx) − log_expm1_ratio(x) + log j.
  const double base = log_expm1_ratio(x);
  for (std::size_t j = 2; j <= n; ++j) {
    const double jd = static_cast<double>(j);
    s += log_expm1_ratio(jd * x) - base + std::log(jd);
  }
  return s;
}

double kendall_log_z_prime(std::size_t n, double theta) {
  if (n < 1) throw DomainError("kendall_log_z_prime: n must be >= 1");
  if (!std::isfinite(theta)) throw DomainError("kendall_log_z_prime: theta must be finite");
  const double nd = static_cast<double>(n);
  const double x = theta / nd;
  double s = 0.0;
  if (std::abs(x) < 1e-5) {
    for (std::size_t j = 2; j <= n; ++j) {
      const double jd = static_cast<double>(j);
      const double j2 = jd * jd;
      s += (jd - 1.0) / 2.0 + (j2 - 1.0) * x / 12.0 - (j2 * j2 - 1.0) * x * x * x / 720.0;
    }
  } else {
    const double gx = g_ratio(x);
    for (std::size_t j = 2; j <= n; ++j) s += (g_ratio(static_cast<double>(j) * x) - gx) / x;
  }
  // s is d/dx of log Z; dx/dθ = 1/n.
  return s / nd;
}

double kendall_limit_c(double theta) {
  if (!std::isfinite(theta)) throw DomainError("kendall_limit_c: theta must be finite");
  if (std::abs(theta) < 1e-2) {
    // Termwise integral of the integrand's series over [0,1].
    const double t2 = theta * theta;
    return theta / 4.0 + t2 / 72.0 - t2 * t2 / 14400.0 + t2 * t2 * t2 / 1270080.0;
  }
  auto integrand = [theta](double x) { return log_expm1_ratio(theta * x); };
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(integrand, 0.0, 1.0, 15,
                                                                        1e-14);
}

double kendall_limit_c_prime(double theta) {
  const double h = std::max(1e-5, 1e-5 * std::abs(theta));
  return (kendall_limit_c(theta + h) - kendall_limit_c(theta - h)) / (2.0 * h);
}

std::string_view to_string(KendallDensityForm form) {
  switch (form) {
    case KendallDensityForm::printed_sum: return "printed_sum";
    case KendallDensityForm::swapped_difference: return "swapped_difference";
    case KendallDensityForm::reflected_difference: return "reflected_difference";
  }
  return "unknown";
}

double kendall_density_value(KendallDensityForm form, double theta, double x, double y) {
  if (std::abs(theta) < 1e-8) return 1.0;
  const double num = (theta / 2.0) * std::sinh(theta / 2.0);
  const double ep = std::exp(theta / 4.0), em = std::exp(-theta / 4.0);
  const double c_diff = std::cosh(theta * (x - y) / 2.0);
  const double c_sum = std::cosh(theta * (x + y - 1.0) / 2.0);
  double d = 0.0;
  switch (form) {
    case KendallDensityForm::printed_sum: d = em * c_diff + ep * c_sum; break;
    case KendallDensityForm::swapped_difference: d = ep * c_diff - em * c_sum; break;
    case KendallDensityForm::reflected_difference: d = ep * c_sum - em * c_diff; break;
  }
  return num / (d * d);
}

std::vector<double> kendall_density_grid(KendallDensityForm form, double theta, std::size_t k) {
  if (k < 1) throw DomainError("kendall_density_grid: k must be >= 1");
  if (!std::isfinite(theta)) throw DomainError("kendall_density_grid: theta must be finite");
  const double kd = static_cast<double>(k);
  std::vector<double> out(k * k);
  for (std::size_t r = 0; r < k; ++r)
    for (std::size_t c = 0; c < k; ++c)
      out[r * k + c] = kendall_density_value(form, theta, (static_cast<double>(r) + 0.5) / kd,
                                             (static_cast<double>(c) + 0.5) / kd);
  return out;
}

double kendall_variational_value(const std::vector<double>& density, std::size_t k, double theta) {
  if (density.size() != k * k) throw DomainError("kendall_variational_value: expected k*k values");
  // Cell probabilities from the midpoint samples, renormalized.
  std::vector<double> p(density);
  double total = 0.0;
  for (double v : p) {
    if (!(v >= 0.0) || !std::isfinite(v))
      throw DomainError("kendall_variational_value: density must be finite and nonnegative");
    total += v;
  }
  for (auto& v : p) v /= total;

  // P[r][c] = mass in rows < r and columns > c (strictly), for discordance.
  // Discordant pair: one point up-left of the other. For a point in cell
  // (r,c), the partner lies in rows < r and columns > c, or rows > r and
  // columns < c. Sharing a row or column counts as discordant w.p. 1/2.
  std::vector<double> pre((k + 1) * (k + 1), 0.0);  // pre[(r)*(k+1)+c] = Σ_{r'<r, c'<c} p
  for (std::size_t r = 0; r < k; ++r)
    for (std::size_t c = 0; c < k; ++c)
      pre[(r + 1) * (k + 1) + (c + 1)] =
          p[r * k + c] + pre[r * (k + 1) + (c + 1)] + pre[(r + 1) * (k + 1) + c] - pre[r * (k + 1) + c];
  const auto box = [&](std::size_t r0, std::size_t r1, std::size_t c0, std::size_t c1) {
    // Σ p over rows [r0,r1) and columns [c0,c1).
    if (r0 >= r1 || c0 >= c1) return 0.0;
    return pre[r1 * (k + 1) + c1] - pre[r0 * (k + 1) + c1] - pre[r1 * (k + 1) + c0] + pre[r0 * (k + 1) + c0];
  };
  std::vector<double> row_mass(k, 0.0), col_mass(k, 0.0);
  for (std::size_t r = 0; r < k; ++r)
    for (std::size_t c = 0; c < k; ++c) {
      row_mass[r] += p[r * k + c];
      col_mass[c] += p[r * k + c];
    }
  double disc = 0.0;
  for (std::size_t r = 0; r < k; ++r)
    for (std::size_t c = 0; c < k; ++c) {
      const double m = p[r * k + c];
      if (m == 0.0) continue;
      const double strict = box(0, r, c + 1, k) + box(r + 1, k, 0, c);
      // Same row or column minus the shared cell, counted half; the cell
      // itself is discordant with probability 1/2 as well.
      const double tied = row_mass[r] + col_mass[c] - m;
      disc += m * (strict + 0.5 * tied);
    }
  const double cell_area = 1.0 / (static_cast<double>(k) * static_cast<double>(k));
  double kl = 0.0;
  for (double v : p)
    if (v > 0.0) kl += v * std::log(v / cell_area);
  return theta / 2.0 * disc - kl;
}

double density_marginal_deviation(const std::vector<double>& density, std::size_t k) {
  if (density.size() != k * k) throw DomainError("density_marginal_deviation: expected k*k values");
  const double kd = static_cast<double>(k);
  double dev = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    double row = 0.0, col = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      row += density[i * k + j];
      col += density[j * k + i];
    }
    dev = std::max({dev, std::abs(row / kd - 1.0), std::abs(col / kd - 1.0)});
  }
  return dev;
}

namespace {

KendallDensityForm choose_form() {
  constexpr std::array<KendallDensityForm, 3> forms{KendallDensityForm::printed_sum,
                                                    KendallDensityForm::swapped_difference,
                                                    KendallDensityForm::reflected_difference};
  constexpr std::array<double, 3> thetas{1.0, 2.0, 5.0};
  constexpr std::size_t k = 400;
  auto best = forms[0];
  double best_score = std::numeric_limits<double>::infinity();
  for (auto form : forms) {
    double score = 0.0;
    for (double theta : thetas) {
      const auto grid = kendall_density_grid(form, theta, k);
      bool finite = true;
      for (double v : grid) finite = finite && std::isfinite(v) && v >= 0.0;
      if (!finite) {
        score = std::numeric_limits<double>::infinity();
        break;
      }
      score = std::max({score, density_marginal_deviation(grid, k),
                        std::abs(kendall_variational_value(grid, k, theta) - kendall_limit_c(theta))});
    }
    if (score < best_score) {
      best_score = score;
      best = form;
    }
  }
  return best;
}

}  // namespace

KendallDensityForm select_kendall_density_form() {
  static const KendallDensityForm form = choose_form();
  return form;
}

std::vector<double> kendall_limit_density(double theta, std::size_t k) {
  return kendall_density_grid(select_kendall_density_form(), theta, k);
}

}  // namespace permfit
