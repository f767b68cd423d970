#include "debater/themes.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>

#include "debater/error.hpp"

namespace debater::themes {

namespace {

double log_choose(double n, double k) {
  return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

}  // namespace

double enrichment_pvalue(const EnrichmentQuery& q) {
  const auto N = q.population, K = q.successes, n = q.draws, k = q.observed;
  if (K > N || n > N || k > std::min(K, n)) {
    throw Error("themes.query", "invalid enrichment query: N=" + std::to_string(N) + " K=" + std::to_string(K) +
                                    " n=" + std::to_string(n) + " k=" + std::to_string(k));
  }
  const std::uint64_t lo = (n + K > N) ? n + K - N : 0;
  if (k <= lo) return 1.0;
  const std::uint64_t hi = std::min(K, n);

  const auto dN = static_cast<double>(N), dK = static_cast<double>(K), dn = static_cast<double>(n);
  const double base = log_choose(dN, dn);
  auto log_pmf = [&](double i) { return log_choose(dK, i) + log_choose(dN - dK, dn - i) - base; };

  // Terms shrink away from the mode, so one lgamma evaluation anchors the sum
  // and the rest follow from the ratio of consecutive pmf values. Tails that
  // start below the mode are computed as one minus the lower tail.
  const auto mode = static_cast<std::uint64_t>(std::floor((dn + 1.0) * (dK + 1.0) / (dN + 2.0)));
  if (k > mode) {
    double t = std::exp(log_pmf(static_cast<double>(k)));
    double sum = 0.0;
    for (std::uint64_t i = k; i <= hi && t > 0.0; ++i) {
      sum += t;
      if (t < sum * 1e-20) break;
      const double di = static_cast<double>(i);
      t *= (dK - di) * (dn - di) / ((di + 1.0) * (dN - dK - dn + di + 1.0));
    }
    return std::clamp(sum, 0.0, 1.0);
  }
  double t = std::exp(log_pmf(static_cast<double>(k - 1)));
  double lower = 0.0;
  for (std::uint64_t i = k - 1;; --i) {
    lower += t;
    if (i == lo || t == 0.0 || t < lower * 1e-20) break;
    const double di = static_cast<double>(i);
    t *= di * (dN - dK - dn + di) / ((dK - di + 1.0) * (dn - di + 1.0));
  }
  return std::clamp(1.0 - lower, 0.0, 1.0);
}

std::vector<std::size_t> bh_correct(std::span<const double> pvalues, double alpha) {
  const std::size_t m = pvalues.size();
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return pvalues[a] < pvalues[b]; });
  std::size_t accepted = 0;
  for (std::size_t rank = 1; rank <= m; ++rank) {
    if (pvalues[order[rank - 1]] <= static_cast<double>(rank) * alpha / static_cast<double>(m)) accepted = rank;
  }
  std::vector<std::size_t> out(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(accepted));
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<ThemeResult> extract_themes(std::span<const int> assignment, std::size_t k,
                                        std::span<const text::SentenceRecord> sentences,
                                        const wikify::RelatednessScorer& relatedness, const ThemeParams& params) {
  if (assignment.size() != sentences.size()) {
    throw Error("themes.invalid", "assignment has " + std::to_string(assignment.size()) + " entries for " +
                                      std::to_string(sentences.size()) + " sentences");
  }
  const std::string layer(text::kConceptLayer);
  std::vector<std::set<std::string>> concepts(sentences.size());
  for (std::size_t i = 0; i < sentences.size(); ++i) {
    auto it = sentences[i].layers.find(layer);
    if (it == sentences[i].layers.end()) {
      throw Error("themes.no_concepts", "sentence " + sentences[i].id + " has no CONCEPT layer");
    }
    for (const auto& span : it->second) concepts[i].insert(span.tag);
    if (assignment[i] < 0 || static_cast<std::size_t>(assignment[i]) >= k) {
      throw Error("themes.invalid", "cluster id out of range for sentence " + sentences[i].id);
    }
  }

  std::map<std::string, std::uint64_t> corpus_count;
  std::vector<std::uint64_t> cluster_size(k, 0);
  std::vector<std::map<std::string, std::uint64_t>> cluster_count(k);
  for (std::size_t i = 0; i < sentences.size(); ++i) {
    const auto t = static_cast<std::size_t>(assignment[i]);
    ++cluster_size[t];
    for (const auto& c : concepts[i]) {
      ++corpus_count[c];
      ++cluster_count[t][c];
    }
  }

  struct Test {
    std::size_t cluster;
    Theme theme;
  };
  std::vector<Test> tests;
  for (std::size_t t = 0; t < k; ++t) {
    for (const auto& [c, count] : cluster_count[t]) {
      EnrichmentQuery q{sentences.size(), corpus_count[c], cluster_size[t], count};
      tests.push_back({t, Theme{c, enrichment_pvalue(q), count, corpus_count[c]}});
    }
  }
  std::vector<double> pvalues;
  for (const auto& test : tests) pvalues.push_back(test.theme.p_value);
  const auto accepted = bh_correct(pvalues, params.alpha);

  std::vector<std::vector<Theme>> survivors(k);
  for (auto idx : accepted) survivors[tests[idx].cluster].push_back(tests[idx].theme);

  std::vector<ThemeResult> out;
  for (std::size_t t = 0; t < k; ++t) {
    auto& list = survivors[t];
    std::sort(list.begin(), list.end(), [](const Theme& a, const Theme& b) {
      return a.p_value != b.p_value ? a.p_value < b.p_value : a.concept_title < b.concept_title;
    });
    ThemeResult result;
    result.cluster = static_cast<int>(t);
    result.alpha = params.alpha;
    for (auto& theme : list) {
      bool redundant = false;
      for (const auto& kept : result.themes) {
        if (relatedness.score(theme.concept_title, kept.concept_title) >= params.theta_dedupe) {
          redundant = true;
          break;
        }
      }
      if (!redundant) result.themes.push_back(std::move(theme));
    }
    out.push_back(std::move(result));
  }
  return out;
}

std::vector<ThemeResult> extract_themes(const cluster::Partition& partition,
                                        std::span<const text::SentenceRecord> sentences,
                                        const wikify::RelatednessScorer& relatedness, const ThemeParams& params) {
  return extract_themes(partition.assignment, partition.k(), sentences, relatedness, params);
}

}  // namespace debater::themes
