// permfit command-line tool. Exit codes: 0 success, 2 no root, 1 error.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "permfit/permfit.h"

#ifndef PERMFIT_DATA_DIR
#define PERMFIT_DATA_DIR "data"
#endif

namespace {

struct Failure {
  std::string message;
};

void check(pf_status s, const std::string& what) {
  if (s != PF_OK) throw Failure{what + ": " + pf_status_name(s) + ": " + pf_last_error()};
}

template <class T, void (*Destroy)(T*)>
struct Deleter {
  void operator()(T* p) const { Destroy(p); }
};
using PermPtr = std::unique_ptr<pf_permutation, Deleter<pf_permutation, pf_permutation_destroy>>;
using ScorePtr = std::unique_ptr<pf_score, Deleter<pf_score, pf_score_destroy>>;
using SetPtr = std::unique_ptr<pf_sample_set, Deleter<pf_sample_set, pf_sample_set_destroy>>;

// Calls a buffer-filling C function, growing the buffer once if needed.
template <class Fn>
std::string fetch_text(Fn&& fn, const std::string& what, std::size_t guess = 1 << 16) {
  std::string buf(guess, '\0');
  std::size_t len = 0;
  pf_status s = fn(buf.data(), buf.size(), &len);
  if (s == PF_ERR_BUFFER) {
    buf.assign(len + 1, '\0');
    s = fn(buf.data(), buf.size(), &len);
  }
  check(s, what);
  buf.resize(len);
  return buf;
}

std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

ScorePtr builtin_score(const std::string& name) {
  pf_score* f = nullptr;
  check(pf_score_builtin(name.c_str(), &f), "score function");
  return ScorePtr(f);
}

// Writes to `path`, or stdout when empty or "-".
class Output {
 public:
  explicit Output(const std::string& path) {
    if (!path.empty() && path != "-") {
      file_.open(path);
      if (!file_) throw Failure{"cannot open " + path + " for writing"};
    }
  }
  std::ostream& stream() { return file_.is_open() ? static_cast<std::ostream&>(file_) : std::cout; }

 private:
  std::ofstream file_;
};

void write_grid(std::ostream& out, std::size_t k, const std::vector<double>& v) {
  out << k << '\n';
  for (std::size_t r = 0; r < k; ++r) {
    for (std::size_t c = 0; c < k; ++c) out << (c ? "," : "") << fmt(v[r * k + c]);
    out << '\n';
  }
}

pf_model make_model(const std::string& kind, const pf_score* f, double theta, std::size_t n) {
  pf_model m{};
  m.kind = kind == "kendall" ? PF_MODEL_KENDALL : PF_MODEL_LINEAR;
  m.f = f;
  m.theta = theta;
  m.n = n;
  return m;
}

// ---- fit --------------------------------------------------------------------

struct FitArgs {
  std::string model = "linear";
  std::string f = "xy";
  std::vector<std::string> data;
  std::string method = "pl";
  std::size_t k = 1000;
  std::size_t iters = 0;
  double tol = 1e-8;
  bool multi = false;
};

int run_fit(const FitArgs& a) {
  auto score = builtin_score(a.f);
  pf_sample_set* raw = nullptr;
  check(pf_sample_set_create(&raw), "fit");
  SetPtr set(raw);
  if (!a.multi && a.data.size() != 1) throw Failure{"fit: pass exactly one --data file, or use --multi"};
  for (const auto& path : a.data) check(pf_sample_set_load(set.get(), path.c_str()), "fit: " + path);
  if (!a.multi && pf_sample_set_count(set.get()) != 1)
    throw Failure{"fit: " + a.data.front() + " holds several draws; use --multi"};

  pf_method method = PF_METHOD_PL;
  if (a.model == "kendall") {
    if (a.method == "pl") throw Failure{"fit: method pl is only available for the linear model"};
    method = a.method == "ld" ? PF_METHOD_KENDALL_LD : PF_METHOD_KENDALL_ML;
  } else {
    method = a.method == "ld" ? PF_METHOD_LD : a.method == "ml" ? PF_METHOD_ML : PF_METHOD_PL;
  }
  pf_fit_options opts;
  pf_fit_options_default(&opts);
  opts.tol = a.tol;
  opts.k = a.k;
  opts.ipfp.max_iter = a.iters;
  const auto model = make_model(a.model, score.get(), 0.0, 0);

  pf_estimate est{};
  const pf_status s = pf_fit(set.get(), &model, method, &opts, &est);
  if (s != PF_OK && s != PF_NO_ROOT) check(s, "fit");
  std::cout << fetch_text([&](char* b, std::size_t c, std::size_t* l) { return pf_estimate_to_json(&est, b, c, l); },
                          "fit")
            << '\n';
  if (s == PF_NO_ROOT) {
    std::cerr << "permfit: no root: " << pf_last_error() << '\n';
    return 2;
  }
  return 0;
}

// ---- logz -------------------------------------------------------------------

struct LogzArgs {
  std::string f = "xy";
  double theta_min = -500.0;
  double theta_max = 500.0;
  std::size_t steps = 101;
  std::size_t k = 100;
  std::size_t iters = 0;
  double tol = 1e-12;
  std::string out;
};

int run_logz(const LogzArgs& a) {
  if (a.steps < 1) throw Failure{"logz: --steps must be >= 1"};
  if (a.theta_max < a.theta_min) throw Failure{"logz: --theta-max must be >= --theta-min"};
  auto score = builtin_score(a.f);
  pf_ipfp_options ipfp{a.tol, a.iters};
  Output out(a.out);
  auto& os = out.stream();
  os << "theta,w_k,w_k_prime,status\n";
  for (std::size_t i = 0; i < a.steps; ++i) {
    const double theta =
        a.steps == 1 ? a.theta_min
                     : a.theta_min + (a.theta_max - a.theta_min) * static_cast<double>(i) /
                                         static_cast<double>(a.steps - 1);
    pf_wk_result r{};
    check(pf_w_k(score.get(), theta, a.k, &ipfp, 1, &r), "logz at theta " + fmt(theta));
    os << fmt(theta) << ',' << fmt(r.w_k) << ',' << fmt(r.w_k_prime) << ','
       << (r.converged ? "ok" : "max_iter") << '\n';
  }
  return 0;
}

// ---- density ----------------------------------------------------------------

struct DensityArgs {
  std::string model = "linear";
  std::string f = "xy";
  double theta = 0.0;
  std::size_t k = 100;
  std::size_t iters = 0;
  double tol = 1e-12;
  std::string out;
};

int run_density(const DensityArgs& a) {
  std::vector<double> grid(a.k * a.k);
  if (a.model == "kendall") {
    check(pf_kendall_limit_density(a.theta, a.k, grid.data()), "density");
  } else {
    auto score = builtin_score(a.f);
    pf_ipfp_options ipfp{a.tol, a.iters};
    check(pf_limit_density(score.get(), a.theta, a.k, &ipfp, grid.data(), nullptr), "density");
  }
  Output out(a.out);
  write_grid(out.stream(), a.k, grid);
  return 0;
}

// ---- sample -----------------------------------------------------------------

struct SampleArgs {
  std::string model = "linear";
  std::string f = "xy";
  double theta = 0.0;
  std::size_t n = 10;
  std::size_t draws = 1;
  std::size_t burn = 100;
  std::size_t thin = 1;
  std::string sampler = "swap";
  std::uint64_t seed = 0;
  std::string out;
  std::size_t hist = 0;
  std::string hist_out;
};

int run_sample(const SampleArgs& a) {
  ScorePtr score;
  if (a.model == "linear") score = builtin_score(a.f);
  const auto model = make_model(a.model, score.get(), a.theta, a.n);

  pf_sample_options opts;
  pf_sample_options_default(&opts);
  opts.draws = a.draws;
  opts.burn = a.burn;
  opts.thin = a.thin;
  opts.seed = a.seed;
  opts.sampler = a.sampler == "aux" ? PF_SAMPLER_AUX : PF_SAMPLER_SWAP;
  if (a.sampler == "auto") {
    int aux = 0;
    check(pf_supports_aux(&model, &aux), "sample");
    if (aux) {
      opts.sampler = PF_SAMPLER_AUX;
    } else {
      std::cerr << "permfit: auxiliary sampler needs f = xy and theta > 0; using the swap sampler\n";
    }
  }
  if (a.hist && a.hist_out.empty() && (a.out.empty() || a.out == "-"))
    throw Failure{"sample: --hist needs --hist-out or --out so the two outputs stay separate"};

  pf_sample_set* raw = nullptr;
  check(pf_sample(&model, &opts, &raw), "sample");
  SetPtr set(raw);
  {
    Output out(a.out);
    out.stream() << fetch_text(
        [&](char* b, std::size_t c, std::size_t* l) { return pf_sample_set_to_csv(set.get(), b, c, l); },
        "sample", 1 << 20);
  }
  if (a.hist) {
    const std::size_t k = a.hist;
    std::vector<double> freq(k * k, 0.0);
    std::vector<std::int64_t> counts(k * k);
    const std::size_t m = pf_sample_set_count(set.get());
    for (std::size_t d = 0; d < m; ++d) {
      pf_permutation* p = nullptr;
      check(pf_sample_set_get(set.get(), d, &p), "sample");
      PermPtr pi(p);
      check(pf_bin_counts(pi.get(), k, counts.data()), "sample --hist");
      for (std::size_t i = 0; i < counts.size(); ++i) freq[i] += static_cast<double>(counts[i]);
    }
    // Step-density scale, comparable with the density command.
    const double scale = static_cast<double>(k * k) / (static_cast<double>(m) * static_cast<double>(a.n));
    for (auto& v : freq) v *= scale;
    Output hist(a.hist_out);
    write_grid(hist.stream(), k, freq);
  }
  return 0;
}

// ---- lottery ----------------------------------------------------------------

struct LotteryArgs {
  std::string data = std::string(PERMFIT_DATA_DIR) + "/draft_lottery_1970.csv";
  std::size_t k = 1000;
  std::size_t iters = 200;
  std::size_t hist_k = 10;
  std::uint64_t seed = 1970;
  double tol = 1e-8;
};

int run_lottery(const LotteryArgs& a) {
  pf_lottery_options opts;
  pf_lottery_options_default(&opts);
  opts.k = a.k;
  opts.ipfp_iters = a.iters;
  opts.hist_k = a.hist_k;
  opts.seed = a.seed;
  opts.tol = a.tol;
  const auto text = fetch_text(
      [&](char* b, std::size_t c, std::size_t* l) { return pf_lottery_report(a.data.c_str(), &opts, b, c, l); },
      "lottery");
  std::cout << nlohmann::json::parse(text).dump(2) << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Exponential-family models on permutations: fitting, sampling and grid scaling"};
  app.require_subcommand(1);
  const std::vector<std::string> scores{"xy", "centered", "footrule", "sq"};
  const std::vector<std::string> models{"linear", "kendall"};

  FitArgs fit;
  auto* fit_cmd = app.add_subcommand("fit", "Estimate theta from permutation data (JSON to stdout)");
  fit_cmd->add_option("--model", fit.model)->check(CLI::IsMember(models));
  fit_cmd->add_option("--f", fit.f, "Score function")->check(CLI::IsMember(scores));
  fit_cmd->add_option("--data", fit.data, "Permutation CSV (i,pi) or multi-draw CSV (draw,i,pi)")->required();
  fit_cmd->add_option("--method", fit.method)->check(CLI::IsMember({"pl", "ld", "ml"}));
  fit_cmd->add_option("--k", fit.k, "Grid order for ld")->check(CLI::PositiveNumber);
  fit_cmd->add_option("--iters", fit.iters, "IPFP iterations per ld evaluation (0: run to tolerance)");
  fit_cmd->add_option("--tol", fit.tol, "Root tolerance")->check(CLI::PositiveNumber);
  fit_cmd->add_flag("--multi", fit.multi, "Pool every draw from every --data file");

  LogzArgs logz;
  auto* logz_cmd = app.add_subcommand("logz", "Grid approximation of the limiting log-partition curve (CSV)");
  logz_cmd->add_option("--f", logz.f)->check(CLI::IsMember(scores));
  logz_cmd->add_option("--theta-min", logz.theta_min);
  logz_cmd->add_option("--theta-max", logz.theta_max);
  logz_cmd->add_option("--steps", logz.steps, "Number of evenly spaced theta values");
  logz_cmd->add_option("--k", logz.k)->check(CLI::PositiveNumber);
  logz_cmd->add_option("--iters", logz.iters, "IPFP iterations (0: run to tolerance)");
  logz_cmd->add_option("--tol", logz.tol, "IPFP tolerance")->check(CLI::PositiveNumber);
  logz_cmd->add_option("--out", logz.out, "Output file (default stdout)");

  DensityArgs density;
  auto* density_cmd = app.add_subcommand("density", "Limiting density on a k x k grid (CSV)");
  density_cmd->add_option("--model", density.model)->check(CLI::IsMember(models));
  density_cmd->add_option("--f", density.f)->check(CLI::IsMember(scores));
  density_cmd->add_option("--theta", density.theta)->required();
  density_cmd->add_option("--k", density.k)->check(CLI::PositiveNumber);
  density_cmd->add_option("--iters", density.iters, "IPFP iteration cap (0: default)");
  density_cmd->add_option("--tol", density.tol, "IPFP tolerance")->check(CLI::PositiveNumber);
  density_cmd->add_option("--out", density.out, "Output file (default stdout)");

  SampleArgs smp;
  auto* sample_cmd = app.add_subcommand("sample", "Draw permutations by MCMC (draw,i,pi CSV)");
  sample_cmd->add_option("--model", smp.model)->check(CLI::IsMember(models));
  sample_cmd->add_option("--f", smp.f)->check(CLI::IsMember(scores));
  sample_cmd->add_option("--theta", smp.theta)->required();
  sample_cmd->add_option("--n", smp.n)->required()->check(CLI::PositiveNumber);
  sample_cmd->add_option("--draws", smp.draws)->check(CLI::PositiveNumber);
  sample_cmd->add_option("--burn", smp.burn, "Sweeps before the first draw");
  sample_cmd->add_option("--thin", smp.thin, "Sweeps between draws")->check(CLI::PositiveNumber);
  sample_cmd->add_option("--sampler", smp.sampler, "swap, aux, or auto (aux when supported)")
      ->check(CLI::IsMember({"swap", "aux", "auto"}));
  sample_cmd->add_option("--seed", smp.seed);
  sample_cmd->add_option("--out", smp.out, "Output file (default stdout)");
  sample_cmd->add_option("--hist", smp.hist, "Also write the binned k x k frequency grid");
  sample_cmd->add_option("--hist-out", smp.hist_out, "File for the --hist grid");

  LotteryArgs lot;
  auto* lottery_cmd = app.add_subcommand("lottery", "Analysis of the 1970 draft lottery (JSON)");
  lottery_cmd->add_option("--data", lot.data, "day_of_year,draw_order CSV");
  lottery_cmd->add_option("--k", lot.k, "Grid order for the LD fit")->check(CLI::PositiveNumber);
  lottery_cmd->add_option("--iters", lot.iters, "IPFP iterations per LD evaluation");
  lottery_cmd->add_option("--hist-k", lot.hist_k, "Order of the binned grids")->check(CLI::PositiveNumber);
  lottery_cmd->add_option("--seed", lot.seed, "Seed of the uniform reference permutation");
  lottery_cmd->add_option("--tol", lot.tol, "Root tolerance")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*fit_cmd) return run_fit(fit);
    if (*logz_cmd) return run_logz(logz);
    if (*density_cmd) return run_density(density);
    if (*sample_cmd) return run_sample(smp);
    if (*lottery_cmd) return run_lottery(lot);
  } catch (const Failure& e) {
    std::cerr << "permfit: " << e.message << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "permfit: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
