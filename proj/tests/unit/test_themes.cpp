#include "doctest.h"

#include <algorithm>
#include <cmath>

#include "debater/error.hpp"
#include "debater/themes.hpp"
#include "support/generators.hpp"
#include "support/oracles.hpp"

using namespace debater::themes;
using debater::text::SentenceRecord;

namespace {

SentenceRecord with_concepts(const std::string& id, const std::vector<std::string>& concepts) {
  auto r = debater::text::make_record(id, "x y z w");
  auto& layer = r.layers[std::string(debater::text::kConceptLayer)];
  for (const auto& c : concepts) layer.push_back({0, 0, c});
  return r;
}

// Relatedness given by a fixed table; 1 on the diagonal, 0 elsewhere.
class TableRelatedness final : public debater::wikify::RelatednessScorer {
 public:
  std::map<std::pair<std::string, std::string>, double> table;
  double score(std::string_view a, std::string_view b) const override {
    if (a == b) return 1.0;
    auto it = table.find({std::string(std::min(a, b)), std::string(std::max(a, b))});
    return it == table.end() ? 0.0 : it->second;
  }
};

}  // namespace

TEST_CASE("enrichment_pvalue examples") {
  CHECK(enrichment_pvalue({10, 4, 5, 3}) == doctest::Approx(66.0 / 252.0).epsilon(1e-12));
  CHECK(enrichment_pvalue({10, 4, 5, 0}) == 1.0);
  CHECK(enrichment_pvalue({10, 5, 5, 5}) == doctest::Approx(1.0 / 252.0).epsilon(1e-12));
  CHECK_THROWS_AS(enrichment_pvalue({10, 11, 5, 1}), debater::Error);
  CHECK_THROWS_AS(enrichment_pvalue({10, 4, 11, 1}), debater::Error);
  CHECK_THROWS_AS(enrichment_pvalue({10, 4, 5, 5}), debater::Error);
}

TEST_CASE("enrichment_pvalue equals exact summation on the full grid N <= 60") {
  std::size_t checked = 0;
  for (std::uint64_t N = 0; N <= 60; ++N) {
    for (std::uint64_t K = 0; K <= N; ++K) {
      for (std::uint64_t n = 0; n <= N; ++n) {
        for (std::uint64_t k = 0; k <= std::min(K, n); ++k) {
          const double got = enrichment_pvalue({N, K, n, k});
          const double want = oracle::hypergeom_upper_tail(N, K, n, k);
          REQUIRE(std::abs(got - want) < 1e-12);
          ++checked;
        }
      }
    }
  }
  CHECK(checked > 500000);
}

TEST_CASE("property: p-value decreases in k") {
  auto rng = gen::engine(31);
  for (int trial = 0; trial < 2000; ++trial) {
    const std::uint64_t N = gen::uniform(rng, 1, 5000);
    const std::uint64_t K = gen::uniform(rng, 0, N);
    const std::uint64_t n = gen::uniform(rng, 0, N);
    const std::uint64_t lo = n + K > N ? n + K - N : 0;
    double prev = 2.0;
    for (std::uint64_t k = 0; k <= std::min(K, n); ++k) {
      const double p = enrichment_pvalue({N, K, n, k});
      REQUIRE(p >= 0.0);
      REQUIRE(p <= 1.0);
      REQUIRE(p <= prev);
      // Strict where the step pmf(k-1) is representable next to the tail:
      // below one half the tail is dominated by its leading term.
      if (k > lo && prev < 0.5 && prev > 1e-290) REQUIRE(p < prev);
      prev = p;
    }
  }
}

TEST_CASE("log-space evaluation survives large N") {
  const double p = enrichment_pvalue({1000000, 5000, 20000, 400});
  CHECK(p >= 0.0);
  CHECK(p < 1e-100);
  CHECK(enrichment_pvalue({1000000, 500000, 500000, 250000}) == doctest::Approx(0.5).epsilon(0.01));
}

TEST_CASE("bh_correct examples") {
  CHECK(bh_correct(std::vector<double>{0.01, 0.02, 0.04, 0.20}, 0.05) == std::vector<std::size_t>{0, 1});
  CHECK(bh_correct(std::vector<double>{1.0, 1.0, 1.0}, 0.05).empty());
  CHECK(bh_correct(std::vector<double>{0.001}, 0.05) == std::vector<std::size_t>{0});
  // step-up: 0.03 at rank 2 fails (0.025) but rank 3 passes 0.0375, accepting all three
  CHECK(bh_correct(std::vector<double>{0.035, 0.03, 0.01, 0.9}, 0.05) == std::vector<std::size_t>{0, 1, 2});
  CHECK(bh_correct(std::vector<double>{}, 0.05).empty());
}

TEST_CASE("property: bh output is a prefix of the sorted p-values") {
  auto rng = gen::engine(32);
  for (int trial = 0; trial < 2000; ++trial) {
    std::vector<double> ps(gen::uniform(rng, 1, 40));
    for (auto& p : ps) p = std::pow(debater::random::unit(rng), 3.0);
    const auto acc = bh_correct(ps, 0.05);
    double max_acc = -1.0, min_rej = 2.0;
    for (std::size_t i = 0; i < ps.size(); ++i) {
      if (std::binary_search(acc.begin(), acc.end(), i)) max_acc = std::max(max_acc, ps[i]);
      else min_rej = std::min(min_rej, ps[i]);
    }
    REQUIRE(max_acc <= min_rej);
    // largest rank i with p_(i) <= i alpha / m, by direct search
    auto sorted = ps;
    std::sort(sorted.begin(), sorted.end());
    std::size_t expect = 0;
    for (std::size_t i = 1; i <= sorted.size(); ++i) {
      if (sorted[i - 1] <= 0.05 * static_cast<double>(i) / static_cast<double>(sorted.size())) expect = i;
    }
    REQUIRE(acc.size() == expect);
  }
}

namespace {

// 3 clusters x 20 sentences; Traffic in 15 of cluster 0 and 2 of the other 40.
std::pair<std::vector<SentenceRecord>, std::vector<int>> planted_corpus() {
  std::vector<SentenceRecord> sentences;
  std::vector<int> assign;
  for (int c = 0; c < 3; ++c) {
    for (int i = 0; i < 20; ++i) {
      std::vector<std::string> concepts{"Everywhere"};
      if (c == 0 && i < 15) concepts.push_back("Traffic");
      if (c == 0 && i < 6) concepts.push_back("Traffic_congestion");
      if (c == 1 && i < 2) concepts.push_back("Traffic");
      if (c == 2 && i < 12) concepts.push_back("Parking");
      if (i % 5 == 0) concepts.push_back("Noise");
      sentences.push_back(with_concepts("s" + std::to_string(c) + "_" + std::to_string(i), concepts));
      assign.push_back(c);
    }
  }
  return {sentences, assign};
}

}  // namespace

TEST_CASE("extract_themes recovers planted signal, drops uniform and related concepts") {
  auto [sentences, assign] = planted_corpus();
  TableRelatedness rel;
  rel.table[{"Traffic", "Traffic_congestion"}] = 0.9;
  const auto results = extract_themes(assign, 3, sentences, rel, ThemeParams{});
  REQUIRE(results.size() == 3);
  REQUIRE_FALSE(results[0].themes.empty());
  CHECK(results[0].themes[0].concept_title == "Traffic");
  CHECK(results[0].themes[0].p_value < 1e-6);
  CHECK(results[0].themes[0].in_cluster == 15);
  CHECK(results[0].themes[0].in_corpus == 17);
  CHECK(std::abs(results[0].themes[0].p_value - oracle::hypergeom_upper_tail(60, 17, 20, 15)) < 1e-12);
  for (const auto& r : results) {
    for (const auto& t : r.themes) {
      CHECK(t.concept_title != "Everywhere");
      CHECK(t.concept_title != "Traffic_congestion");
    }
    for (std::size_t i = 1; i < r.themes.size(); ++i) CHECK(r.themes[i - 1].p_value <= r.themes[i].p_value);
  }
  REQUIRE_FALSE(results[2].themes.empty());
  CHECK(results[2].themes[0].concept_title == "Parking");
  CHECK(results[1].themes.empty());

  // Without the relatedness link both planted concepts survive in cluster 0.
  const auto plain = extract_themes(assign, 3, sentences, debater::wikify::JaccardRelatedness{}, ThemeParams{});
  std::vector<std::string> names;
  for (const auto& t : plain[0].themes) names.push_back(t.concept_title);
  CHECK(names == std::vector<std::string>{"Traffic", "Traffic_congestion"});
}

TEST_CASE("property: theme lists ignore sentence order") {
  auto [sentences, assign] = planted_corpus();
  const debater::wikify::JaccardRelatedness rel;
  const auto base = extract_themes(assign, 3, sentences, rel, ThemeParams{});
  auto rng = gen::engine(33);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<std::size_t> order(sentences.size());
    std::iota(order.begin(), order.end(), 0);
    debater::random::shuffle(order, rng);
    std::vector<SentenceRecord> s2;
    std::vector<int> a2;
    for (auto i : order) {
      s2.push_back(sentences[i]);
      a2.push_back(assign[i]);
    }
    const auto got = extract_themes(a2, 3, s2, rel, ThemeParams{});
    REQUIRE(got.size() == base.size());
    for (std::size_t c = 0; c < got.size(); ++c) {
      REQUIRE(got[c].themes.size() == base[c].themes.size());
      for (std::size_t i = 0; i < got[c].themes.size(); ++i) {
        REQUIRE(got[c].themes[i].concept_title == base[c].themes[i].concept_title);
        REQUIRE(got[c].themes[i].p_value == base[c].themes[i].p_value);
      }
    }
  }
}

TEST_CASE("extract_themes errors") {
  std::vector<SentenceRecord> bare{debater::text::make_record("a", "no layer here")};
  try {
    extract_themes(std::vector<int>{0}, 1, bare, debater::wikify::JaccardRelatedness{}, ThemeParams{});
    FAIL("expected error");
  } catch (const debater::Error& e) {
    CHECK(e.code() == "themes.no_concepts");
  }
  std::vector<SentenceRecord> one{with_concepts("a", {"X"})};
  CHECK_THROWS_AS(extract_themes(std::vector<int>{0, 1}, 2, one, debater::wikify::JaccardRelatedness{}, ThemeParams{}),
                  debater::Error);
}
