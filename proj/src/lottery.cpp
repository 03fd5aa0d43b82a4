#include "permfit/lottery.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <string>

#include "permfit/errors.hpp"
#include "permfit/estimators.hpp"
#include "permfit/rng.hpp"
#include "permfit/sampling.hpp"

namespace permfit {

namespace {

long long parse_cell(std::string_view cell, const std::string& where) {
  while (!cell.empty() && std::isspace(static_cast<unsigned char>(cell.front()))) cell.remove_prefix(1);
  while (!cell.empty() && std::isspace(static_cast<unsigned char>(cell.back()))) cell.remove_suffix(1);
  long long v = 0;
  auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (cell.empty() || ec != std::errc() || ptr != cell.data() + cell.size())
    throw IoError(where + ": not an integer: '" + std::string(cell) + "'");
  return v;
}

nlohmann::json grid_rows(const BinMatrix& m) {
  auto rows = nlohmann::json::array();
  for (std::size_t r = 1; r <= m.k; ++r) {
    auto row = nlohmann::json::array();
    for (std::size_t s = 1; s <= m.k; ++s) row.push_back(m(r, s));
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace

LotteryData read_lottery_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw IoError(path.string() + ": empty file");
  std::string header;
  for (char c : line)
    if (!std::isspace(static_cast<unsigned char>(c))) header += static_cast<char>(std::tolower(c));
  if (header != "day_of_year,draw_order")
    throw IoError(path.string() + ": expected header 'day_of_year,draw_order'");

  std::vector<std::int32_t> day_at_draw(kLotteryDays, 0);
  std::vector<bool> seen_day(kLotteryDays + 1, false);
  std::size_t rows = 0, lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto where = path.string() + ":" + std::to_string(lineno);
    const auto comma = line.find(',');
    if (comma == std::string::npos || line.find(',', comma + 1) != std::string::npos)
      throw IoError(where + ": expected 2 columns");
    const auto day = parse_cell(std::string_view(line).substr(0, comma), where);
    const auto draw = parse_cell(std::string_view(line).substr(comma + 1), where);
    const auto n = static_cast<long long>(kLotteryDays);
    if (day < 1 || day > n) throw DomainError(where + ": day_of_year outside 1..366");
    if (draw < 1 || draw > n) throw DomainError(where + ": draw_order outside 1..366");
    if (seen_day[day]) throw DomainError(where + ": day_of_year " + std::to_string(day) + " repeated");
    if (day_at_draw[draw - 1] != 0)
      throw DomainError(where + ": draw_order " + std::to_string(draw) + " repeated");
    seen_day[day] = true;
    day_at_draw[draw - 1] = static_cast<std::int32_t>(day);
    ++rows;
  }
  if (rows != kLotteryDays)
    throw DomainError(path.string() + ": expected 366 rows, found " + std::to_string(rows));
  Permutation pi(std::move(day_at_draw));
  auto tau = pi.complement();
  return {std::move(pi), std::move(tau)};
}

nlohmann::json lottery_report(const LotteryData& data, const LotteryOptions& opts) {
  const auto n = data.tau.size();
  const auto xy = ScoreFunction::xy();
  const auto test = uniformity_test(data.tau);

  nlohmann::json out = to_json(test);
  out["n"] = n;
  out["chebyshev_published"] = kPublishedChebyshevBound;
  // Flag the printed bound when it disagrees with the formula by more than
  // rounding of its two significant digits.
  out["chebyshev_mismatch"] = std::abs(test.chebyshev_bound - kPublishedChebyshevBound) > 5e-5;
  {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.10g", spearman_r(data.pi, Permutation::identity(n)));
    out["spearman_r"] = std::strtod(buf, nullptr);
  }

  RootOptions root;
  root.tol = opts.tol;
  out["pl"] = to_json(pl_estimate(data.tau, xy, root));
  IpfpOptions ipfp;
  ipfp.max_iter = opts.ipfp_iters;
  auto ld = to_json(ld_estimate(data.tau, xy, opts.k, root, ipfp));
  ld["iters"] = opts.ipfp_iters;
  out["ld"] = std::move(ld);

  CounterRng rng(opts.seed);
  const auto reference = uniform_permutation(n, rng);
  out["bins"] = {{"k", opts.hist_k},
                 {"tau", grid_rows(bin_counts(data.tau, opts.hist_k))},
                 {"uniform_reference", grid_rows(bin_counts(reference, opts.hist_k))},
                 {"reference_seed", opts.seed}};
  return out;
}

}  // namespace permfit
