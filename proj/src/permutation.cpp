#include "permfit/permutation.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <ostream>
#include <sstream>
#include <string>

#include "permfit/errors.hpp"
#include "permfit/score_function.hpp"

namespace permfit {

Permutation::Permutation(std::vector<std::int32_t> map) : map_(std::move(map)) {
  const auto n = map_.size();
  if (n == 0) throw DomainError("permutation must have n >= 1");
  std::vector<bool> seen(n, false);
  for (auto v : map_) {
    if (v < 1 || static_cast<std::size_t>(v) > n)
      throw DomainError("permutation value " + std::to_string(v) + " outside 1.." +
                        std::to_string(n));
    if (seen[v - 1]) throw DomainError("permutation value " + std::to_string(v) + " repeated");
    seen[v - 1] = true;
  }
}

Permutation Permutation::identity(std::size_t n) {
  std::vector<std::int32_t> m(n);
  std::iota(m.begin(), m.end(), 1);
  return Permutation(std::move(m));
}

Permutation Permutation::reversed(std::size_t n) {
  std::vector<std::int32_t> m(n);
  for (std::size_t i = 0; i < n; ++i) m[i] = static_cast<std::int32_t>(n - i);
  return Permutation(std::move(m));
}

Permutation Permutation::inverse() const {
  std::vector<std::int32_t> inv(map_.size());
  for (std::size_t i = 0; i < map_.size(); ++i) inv[map_[i] - 1] = static_cast<std::int32_t>(i + 1);
  return Permutation(std::move(inv));
}

Permutation Permutation::compose(const Permutation& sigma) const {
  if (sigma.size() != size()) throw SizeMismatch("compose: permutation sizes differ");
  std::vector<std::int32_t> out(size());
  for (std::size_t i = 0; i < size(); ++i) out[i] = map_[sigma.map_[i] - 1];
  return Permutation(std::move(out));
}

Permutation Permutation::complement() const {
  const auto n1 = static_cast<std::int32_t>(size() + 1);
  std::vector<std::int32_t> out(size());
  for (std::size_t i = 0; i < size(); ++i) out[i] = n1 - map_[i];
  return Permutation(std::move(out));
}

namespace {

std::uint64_t merge_count(std::vector<std::int32_t>& a, std::vector<std::int32_t>& buf,
                          std::size_t lo, std::size_t hi) {
  if (hi - lo < 2) return 0;
  const std::size_t mid = lo + (hi - lo) / 2;
  std::uint64_t count = merge_count(a, buf, lo, mid) + merge_count(a, buf, mid, hi);
  std::size_t i = lo, j = mid, out = lo;
  while (i < mid && j < hi) {
    if (a[j] < a[i]) {
      count += mid - i;
      buf[out++] = a[j++];
    } else {
      buf[out++] = a[i++];
    }
  }
  while (i < mid) buf[out++] = a[i++];
  while (j < hi) buf[out++] = a[j++];
  std::copy(buf.begin() + static_cast<std::ptrdiff_t>(lo), buf.begin() + static_cast<std::ptrdiff_t>(hi),
            a.begin() + static_cast<std::ptrdiff_t>(lo));
  return count;
}

}  // namespace

std::uint64_t inversions(const Permutation& pi) {
  std::vector<std::int32_t> a(pi.values().begin(), pi.values().end());
  std::vector<std::int32_t> buf(a.size());
  return merge_count(a, buf, 0, a.size());
}

double linear_statistic(const Permutation& pi, const ScoreFunction& f) {
  const auto n = static_cast<double>(pi.size());
  double s = 0.0;
  for (std::size_t i = 1; i <= pi.size(); ++i) s += f(static_cast<double>(i) / n, pi(i) / n);
  return s;
}

std::uint64_t rank_product_sum(const Permutation& pi) {
  std::uint64_t s = 0;
  for (std::size_t i = 1; i <= pi.size(); ++i) s += i * static_cast<std::uint64_t>(pi(i));
  return s;
}

double spearman_r(const Permutation& pi, const Permutation& sigma) {
  if (pi.size() != sigma.size()) throw SizeMismatch("spearman_r: permutation sizes differ");
  const auto n = static_cast<double>(pi.size());
  if (pi.size() == 1) return 1.0;
  long double ss = 0;
  for (std::size_t i = 1; i <= pi.size(); ++i) {
    const long double d = pi(i) - sigma(i);
    ss += d * d;
  }
  return static_cast<double>(1.0L - 6.0L * ss / (n * (n * n - 1.0)));
}

std::size_t bin_index(std::size_t i, std::size_t n, std::size_t k) { return (k * i + n - 1) / n; }

std::int64_t bin_margin(std::size_t n, std::size_t k, std::size_t r) {
  // Bin r holds the i with (r−1)/k < i/n ≤ r/k.
  return static_cast<std::int64_t>(n * r / k) - static_cast<std::int64_t>(n * (r - 1) / k);
}

BinMatrix bin_counts(const Permutation& pi, std::size_t k) {
  const auto n = pi.size();
  if (k < 1 || k > n)
    throw DomainError("bin_counts: need 1 <= k <= n (k=" + std::to_string(k) + ", n=" +
                      std::to_string(n) + ")");
  BinMatrix m{k, n, std::vector<std::int64_t>(k * k, 0)};
  for (std::size_t i = 1; i <= n; ++i)
    ++m(bin_index(i, n, k), bin_index(static_cast<std::size_t>(pi(i)), n, k));
  return m;
}

void validate_bin_matrix(const BinMatrix& m) {
  if (m.k < 1 || m.k > m.n || m.counts.size() != m.k * m.k)
    throw DomainError("bin matrix: inconsistent shape");
  for (std::size_t r = 1; r <= m.k; ++r) {
    std::int64_t row = 0, col = 0;
    for (std::size_t s = 1; s <= m.k; ++s) {
      if (m(r, s) < 0 || m(s, r) < 0) throw DomainError("bin matrix: negative count");
      row += m(r, s);
      col += m(s, r);
    }
    const auto want = bin_margin(m.n, m.k, r);
    if (row != want || col != want)
      throw DomainError("bin matrix: row/column " + std::to_string(r) + " sums to " +
                        std::to_string(row) + "/" + std::to_string(col) + ", expected " +
                        std::to_string(want));
  }
}

double fisher_yates_logpmf(const BinMatrix& m) {
  validate_bin_matrix(m);
  double logp = -std::lgamma(static_cast<double>(m.n) + 1.0);
  for (std::size_t r = 1; r <= m.k; ++r)
    logp += 2.0 * std::lgamma(static_cast<double>(bin_margin(m.n, m.k, r)) + 1.0);
  for (auto c : m.counts) logp -= std::lgamma(static_cast<double>(c) + 1.0);
  return logp;
}

double cdf_distance(const Permutation& pi) {
  // Both CDFs are determined by N(a,b) = #{i ≤ a : π(i) ≤ b}. Inside the open
  // lattice cell ((a−1)/n, a/n) × ((b−1)/n, b/n) F_ν is constant at
  // N(a−1,b−1)/n while F_μ increases monotonically, so the supremum over
  // the cell is approached at its upper corner, where F_μ → N(a,b)/n.
  const auto n = pi.size();
  std::vector<std::int64_t> prev(n + 1, 0), cur(n + 1, 0);
  std::int64_t best = 0;
  for (std::size_t a = 1; a <= n; ++a) {
    const auto v = static_cast<std::size_t>(pi(a));
    for (std::size_t b = 0; b <= n; ++b) cur[b] = prev[b] + (b >= v ? 1 : 0);
    for (std::size_t b = 1; b <= n; ++b) {
      const std::int64_t smeared = cur[b];
      const std::int64_t points = prev[b - 1];
      best = std::max(best, smeared - points);
      // Lower-right and upper-left corners of the cell.
      best = std::max(best, std::max(cur[b - 1], prev[b]) - points);
    }
    std::swap(prev, cur);
  }
  return static_cast<double>(best) / static_cast<double>(n);
}

// ---- CSV ------------------------------------------------------------------

namespace {

std::string trim(std::string s) {
  const auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

std::vector<long long> parse_row(const std::string& line, std::size_t expected,
                                 const std::string& where) {
  std::vector<long long> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    cell = trim(cell);
    long long v = 0;
    const auto* end = cell.data() + cell.size();
    auto [ptr, ec] = std::from_chars(cell.data(), end, v);
    if (ec != std::errc() || ptr != end || cell.empty())
      throw IoError(where + ": not an integer: '" + cell + "'");
    out.push_back(v);
  }
  if (out.size() != expected)
    throw IoError(where + ": expected " + std::to_string(expected) + " columns");
  return out;
}

std::vector<std::string> read_lines(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    line = trim(line);
    if (!line.empty()) lines.push_back(line);
  }
  if (lines.empty()) throw IoError(path.string() + ": empty file");
  return lines;
}

std::string normalized_header(std::string h) {
  h.erase(std::remove_if(h.begin(), h.end(), [](unsigned char c) { return std::isspace(c); }),
          h.end());
  std::transform(h.begin(), h.end(), h.begin(), [](unsigned char c) { return std::tolower(c); });
  return h;
}

Permutation assemble(const std::vector<std::pair<long long, long long>>& rows,
                     const std::string& where) {
  const auto n = rows.size();
  std::vector<std::int32_t> map(n, 0);
  for (auto [i, p] : rows) {
    if (i < 1 || static_cast<std::size_t>(i) > n)
      throw DomainError(where + ": index " + std::to_string(i) + " outside 1.." + std::to_string(n));
    if (map[i - 1] != 0) throw DomainError(where + ": index " + std::to_string(i) + " repeated");
    if (p < 1 || static_cast<std::size_t>(p) > n)
      throw DomainError(where + ": value " + std::to_string(p) + " outside 1.." + std::to_string(n));
    map[i - 1] = static_cast<std::int32_t>(p);
  }
  try {
    return Permutation(std::move(map));
  } catch (const DomainError& e) {
    throw DomainError(where + ": " + e.what());
  }
}

}  // namespace

Permutation read_permutation_csv(const std::filesystem::path& path) {
  const auto lines = read_lines(path);
  if (normalized_header(lines[0]) != "i,pi")
    throw IoError(path.string() + ": expected header 'i,pi'");
  std::vector<std::pair<long long, long long>> rows;
  for (std::size_t l = 1; l < lines.size(); ++l) {
    auto v = parse_row(lines[l], 2, path.string() + ":" + std::to_string(l + 1));
    rows.emplace_back(v[0], v[1]);
  }
  if (rows.empty()) throw IoError(path.string() + ": no rows");
  return assemble(rows, path.string());
}

void write_permutation_csv(std::ostream& out, const Permutation& pi) {
  out << "i,pi\n";
  for (std::size_t i = 1; i <= pi.size(); ++i) out << i << ',' << pi(i) << '\n';
}

std::vector<Permutation> read_multi_draw_csv(const std::filesystem::path& path) {
  const auto lines = read_lines(path);
  if (normalized_header(lines[0]) != "draw,i,pi")
    throw IoError(path.string() + ": expected header 'draw,i,pi'");
  std::map<long long, std::vector<std::pair<long long, long long>>> by_draw;
  for (std::size_t l = 1; l < lines.size(); ++l) {
    auto v = parse_row(lines[l], 3, path.string() + ":" + std::to_string(l + 1));
    by_draw[v[0]].emplace_back(v[1], v[2]);
  }
  if (by_draw.empty()) throw IoError(path.string() + ": no rows");
  std::vector<Permutation> out;
  for (const auto& [draw, rows] : by_draw)
    out.push_back(assemble(rows, path.string() + " draw " + std::to_string(draw)));
  return out;
}

void write_multi_draw_csv(std::ostream& out, std::span<const Permutation> draws) {
  out << "draw,i,pi\n";
  for (std::size_t d = 0; d < draws.size(); ++d)
    for (std::size_t i = 1; i <= draws[d].size(); ++i)
      out << d + 1 << ',' << i << ',' << draws[d](i) << '\n';
}

std::vector<Permutation> read_permutations(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::string header;
  std::getline(in, header);
  if (normalized_header(header) == "draw,i,pi") return read_multi_draw_csv(path);
  return {read_permutation_csv(path)};
}

}  // namespace permfit
