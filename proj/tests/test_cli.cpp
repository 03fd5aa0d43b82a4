#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

namespace fs = std::filesystem;

namespace {

struct Run {
  int code = -1;
  std::string out;
};

Run run(const std::string& args) {
  const std::string cmd = std::string(PERMFIT_CLI) + " " + args + " 2>/dev/null";
  Run r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return r;
  char buf[4096];
  std::size_t got;
  while ((got = fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, got);
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "permfit_cli_test";
  fs::create_directories(dir);
  return dir / name;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Grid CSV: order on the first line, then k rows.
std::vector<double> parse_grid(const std::string& text, std::size_t& k) {
  std::istringstream in(text);
  std::string line;
  std::getline(in, line);
  k = std::stoul(line);
  std::vector<double> v;
  while (std::getline(in, line)) {
    std::istringstream row(line);
    std::string cell;
    while (std::getline(row, cell, ',')) v.push_back(std::stod(cell));
  }
  return v;
}

double correlation(const std::vector<double>& a, const std::vector<double>& b) {
  const double n = double(a.size());
  double ma = 0, mb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) ma += a[i] / n, mb += b[i] / n;
  double sab = 0, saa = 0, sbb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  return sab / std::sqrt(saa * sbb);
}

const std::string kTau = PERMFIT_DATA_DIR "/lottery_tau.csv";

}  // namespace

TEST(Cli, FitPseudoLikelihood) {
  const auto r = run("fit --data " + kTau + " --method pl");
  ASSERT_EQ(r.code, 0);
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j["method"], "PL");
  EXPECT_NEAR(j["theta_hat"].get<double>(), 2.92, 0.01);
}

TEST(Cli, FitLimitingDensity) {
  const auto r = run("fit --data " + kTau + " --method ld --k 1000 --iters 200");
  ASSERT_EQ(r.code, 0);
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j["k"], 1000);
  EXPECT_NEAR(j["theta_hat"].get<double>(), 2.96, 0.05);
}

TEST(Cli, ExitCodes) {
  const auto id = scratch("identity.csv");
  {
    std::ofstream out(id);
    out << "i,pi\n";
    for (int i = 1; i <= 20; ++i) out << i << ',' << i << '\n';
  }
  const auto none = run("fit --data " + id.string());
  EXPECT_EQ(none.code, 2);
  EXPECT_EQ(nlohmann::json::parse(none.out)["status"], "no_root");

  const auto bad = scratch("bad.csv");
  std::ofstream(bad) << "i,pi\n1,1\n2,1\n";
  EXPECT_EQ(run("fit --data " + bad.string()).code, 1);
  EXPECT_EQ(run("fit --data /nonexistent.csv").code, 1);
  EXPECT_EQ(run("fit --data " + kTau + " --model kendall --method pl").code, 1);
  EXPECT_EQ(run("frobnicate").code, 1);
}

TEST(Cli, MultiWithOneFileMatchesSingle) {
  const auto single = run("fit --data " + kTau);
  const auto multi = run("fit --multi --data " + kTau);
  ASSERT_EQ(single.code, 0);
  EXPECT_EQ(single.out, multi.out);
}

TEST(Cli, LogzAtZeroTheta) {
  const auto r = run("logz --theta-min -2 --theta-max 2 --steps 5 --k 20");
  ASSERT_EQ(r.code, 0);
  std::istringstream in(r.out);
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "theta,w_k,w_k_prime,status");
  int rows = 0;
  while (std::getline(in, line)) {
    ++rows;
    if (line.rfind("0,", 0) == 0) EXPECT_EQ(line.substr(0, 4), "0,0,");
    EXPECT_NE(line.find(",ok"), std::string::npos);
  }
  EXPECT_EQ(rows, 5);
}

TEST(Cli, DensityFlatAtZero) {
  const auto r = run("density --theta 0 --k 5");
  ASSERT_EQ(r.code, 0);
  std::size_t k = 0;
  const auto v = parse_grid(r.out, k);
  ASSERT_EQ(k, 5u);
  ASSERT_EQ(v.size(), 25u);
  for (double x : v) EXPECT_NEAR(x, 1.0, 1e-10);
}

TEST(Cli, KendallDensityHasUnitRowMeans) {
  const auto r = run("density --model kendall --theta 3 --k 50");
  ASSERT_EQ(r.code, 0);
  std::size_t k = 0;
  const auto v = parse_grid(r.out, k);
  ASSERT_EQ(v.size(), k * k);
  for (std::size_t i = 0; i < k; ++i) {
    double m = 0;
    for (std::size_t s = 0; s < k; ++s) m += v[i * k + s] / double(k);
    EXPECT_NEAR(m, 1.0, 1e-3);
  }
}

TEST(Cli, SampleIsDeterministic) {
  const auto a = run("sample --theta 2 --n 40 --draws 3 --seed 9");
  const auto b = run("sample --theta 2 --n 40 --draws 3 --seed 9");
  ASSERT_EQ(a.code, 0);
  EXPECT_EQ(a.out, b.out);
  EXPECT_EQ(a.out.rfind("draw,i,pi\n", 0), 0u);
  EXPECT_NE(a.out, run("sample --theta 2 --n 40 --draws 3 --seed 10").out);
  EXPECT_EQ(run("sample --model kendall --theta 1 --n 10 --sampler aux").code, 1);
  EXPECT_EQ(run("sample --model kendall --theta 1 --n 10 --sampler auto").code, 0);
}

TEST(Cli, HistogramTracksDensity) {
  const auto draws = scratch("draws.csv"), hist = scratch("hist.csv");
  const auto r = run("sample --theta 20 --n 10000 --draws 1 --burn 10 --sampler aux --seed 3 --out " +
                     draws.string() + " --hist 10 --hist-out " + hist.string());
  ASSERT_EQ(r.code, 0);
  std::size_t k1 = 0, k2 = 0;
  const auto h = parse_grid(slurp(hist), k1);
  const auto d = parse_grid(run("density --theta 20 --k 10").out, k2);
  ASSERT_EQ(k1, 10u);
  ASSERT_EQ(k2, 10u);
  EXPECT_GT(correlation(h, d), 0.9);
}

TEST(Cli, LotteryReport) {
  const auto r = run("lottery --k 200");
  ASSERT_EQ(r.code, 0);
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_NEAR(j["statistic"].get<double>(), 0.2702, 5e-5);
  EXPECT_NEAR(j["spearman_r"].get<double>(), -0.226, 0.001);
  EXPECT_EQ(j["n"], 366);
}
