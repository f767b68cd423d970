#include "debater/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_map>

#include "debater/error.hpp"

namespace debater::metrics {

namespace {

void require_same_length(std::size_t a, std::size_t b) {
  if (a != b) {
    throw Error("metrics.length", "labelings differ in length (" + std::to_string(a) + " vs " +
                                      std::to_string(b) + ")");
  }
}

std::vector<std::size_t> dense_labels(std::span<const int> labels, std::size_t& k) {
  std::unordered_map<int, std::size_t> ids;
  std::vector<std::size_t> out;
  out.reserve(labels.size());
  for (int l : labels) {
    auto [it, inserted] = ids.emplace(l, ids.size());
    out.push_back(it->second);
  }
  k = ids.size();
  return out;
}

double choose2(std::uint64_t x) { return 0.5 * static_cast<double>(x) * static_cast<double>(x > 0 ? x - 1 : 0); }

bool is_relabeling(const ContingencyTable& t) {
  if (t.row_sums.size() != t.col_sums.size()) return false;
  for (const auto& row : t.counts) {
    if (std::count_if(row.begin(), row.end(), [](auto c) { return c > 0; }) != 1) return false;
  }
  for (std::size_t j = 0; j < t.col_sums.size(); ++j) {
    std::size_t nz = 0;
    for (const auto& row : t.counts) nz += row[j] > 0;
    if (nz != 1) return false;
  }
  return true;
}

}  // namespace

ContingencyTable ContingencyTable::from_labelings(std::span<const int> u, std::span<const int> v) {
  require_same_length(u.size(), v.size());
  std::size_t ku = 0, kv = 0;
  auto du = dense_labels(u, ku);
  auto dv = dense_labels(v, kv);
  ContingencyTable t;
  t.counts.assign(ku, std::vector<std::uint64_t>(kv, 0));
  t.row_sums.assign(ku, 0);
  t.col_sums.assign(kv, 0);
  for (std::size_t i = 0; i < du.size(); ++i) {
    ++t.counts[du[i]][dv[i]];
    ++t.row_sums[du[i]];
    ++t.col_sums[dv[i]];
  }
  t.n = u.size();
  return t;
}

double entropy(std::span<const std::uint64_t> sizes, std::uint64_t n) {
  if (n == 0) return 0.0;
  double h = 0.0;
  for (auto s : sizes) {
    if (s == 0) continue;
    const double p = static_cast<double>(s) / static_cast<double>(n);
    h -= p * std::log(p);
  }
  return h;
}

double mutual_information(const ContingencyTable& t) {
  if (t.n == 0) return 0.0;
  const double n = static_cast<double>(t.n);
  double mi = 0.0;
  for (std::size_t i = 0; i < t.row_sums.size(); ++i) {
    for (std::size_t j = 0; j < t.col_sums.size(); ++j) {
      const auto nij = t.counts[i][j];
      if (nij == 0) continue;
      const double c = static_cast<double>(nij);
      mi += (c / n) * std::log(n * c / (static_cast<double>(t.row_sums[i]) * static_cast<double>(t.col_sums[j])));
    }
  }
  return std::max(0.0, mi);
}

double expected_mutual_information(const ContingencyTable& t) {
  if (t.n == 0) return 0.0;
  const auto N = static_cast<double>(t.n);
  const double lg_n = std::lgamma(N + 1.0);
  double emi = 0.0;
  for (auto ai_u : t.row_sums) {
    for (auto bj_u : t.col_sums) {
      const auto ai = static_cast<double>(ai_u);
      const auto bj = static_cast<double>(bj_u);
      const double fixed = std::lgamma(ai + 1.0) + std::lgamma(bj + 1.0) + std::lgamma(N - ai + 1.0) +
                           std::lgamma(N - bj + 1.0) - lg_n;
      const auto lo = std::max<std::int64_t>(1, static_cast<std::int64_t>(ai_u + bj_u) - static_cast<std::int64_t>(t.n));
      const auto hi = static_cast<std::int64_t>(std::min(ai_u, bj_u));
      for (std::int64_t nij_i = lo; nij_i <= hi; ++nij_i) {
        const auto nij = static_cast<double>(nij_i);
        const double log_p = fixed - std::lgamma(nij + 1.0) - std::lgamma(ai - nij + 1.0) -
                             std::lgamma(bj - nij + 1.0) - std::lgamma(N - ai - bj + nij + 1.0);
        emi += (nij / N) * std::log(N * nij / (ai * bj)) * std::exp(log_p);
      }
    }
  }
  return emi;
}

double ami(std::span<const int> u, std::span<const int> v) {
  const auto t = ContingencyTable::from_labelings(u, v);
  if (is_relabeling(t)) return 1.0;
  const double mi = mutual_information(t);
  const double emi = expected_mutual_information(t);
  const double mean_h = 0.5 * (entropy(t.row_sums, t.n) + entropy(t.col_sums, t.n));
  const double denom = mean_h - emi;
  if (std::abs(denom) < 1e-15) return 0.0;
  return (mi - emi) / denom;
}

double ari(std::span<const int> u, std::span<const int> v) {
  const auto t = ContingencyTable::from_labelings(u, v);
  if (t.n < 2 || is_relabeling(t)) return 1.0;
  double index = 0.0;
  for (const auto& row : t.counts) {
    for (auto c : row) index += choose2(c);
  }
  double sum_a = 0.0, sum_b = 0.0;
  for (auto a : t.row_sums) sum_a += choose2(a);
  for (auto b : t.col_sums) sum_b += choose2(b);
  const double expected = sum_a * sum_b / choose2(t.n);
  const double max_index = 0.5 * (sum_a + sum_b);
  const double denom = max_index - expected;
  if (denom == 0.0) return 1.0;
  return (index - expected) / denom;
}

Prf precision_recall_f1(std::uint64_t tp, std::uint64_t fp, std::uint64_t fn) {
  Prf out;
  if (tp + fp > 0) out.precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
  if (tp + fn > 0) out.recall = static_cast<double>(tp) / static_cast<double>(tp + fn);
  if (out.precision + out.recall > 0.0) {
    out.f1 = 2.0 * out.precision * out.recall / (out.precision + out.recall);
  }
  return out;
}

double pearson(std::span<const double> xs, std::span<const double> ys) {
  require_same_length(xs.size(), ys.size());
  if (xs.size() < 2) throw Error("metrics.length", "correlation needs at least two points");
  const double n = static_cast<double>(xs.size());
  const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxy += (xs[i] - mx) * (ys[i] - my);
    sxx += (xs[i] - mx) * (xs[i] - mx);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) throw Error("metrics.constant", "correlation of a constant input is undefined");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

std::vector<double> average_ranks(std::span<const double> xs) {
  std::vector<std::size_t> order(xs.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return xs[a] < xs[b]; });
  std::vector<double> ranks(xs.size());
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() && xs[order[j + 1]] == xs[order[i]]) ++j;
    const double rank = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t r = i; r <= j; ++r) ranks[order[r]] = rank;
    i = j + 1;
  }
  return ranks;
}

double spearman(std::span<const double> xs, std::span<const double> ys) {
  require_same_length(xs.size(), ys.size());
  const auto rx = average_ranks(xs);
  const auto ry = average_ranks(ys);
  return pearson(rx, ry);
}

}  // namespace debater::metrics
