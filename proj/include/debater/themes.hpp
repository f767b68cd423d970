#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "debater/cluster.hpp"
#include "debater/text.hpp"
#include "debater/wikify.hpp"

namespace debater::themes {

// Hypergeometric draw: population N sentences of which K mention the concept;
// the cluster holds n sentences, k of them mentioning it.
struct EnrichmentQuery {
  std::uint64_t population = 0;   // N
  std::uint64_t successes = 0;    // K
  std::uint64_t draws = 0;        // n
  std::uint64_t observed = 0;     // k
};

// Upper tail P(X >= k). One log-gamma evaluation anchors the sum, so large N
// neither overflows nor underflows prematurely.
double enrichment_pvalue(const EnrichmentQuery& q);

// Benjamini-Hochberg step-up. Returns accepted indices in ascending order.
std::vector<std::size_t> bh_correct(std::span<const double> pvalues, double alpha);

struct Theme {
  std::string concept_title;
  double p_value = 1.0;
  std::uint64_t in_cluster = 0;  // k
  std::uint64_t in_corpus = 0;   // K
};

struct ThemeResult {
  int cluster = 0;
  std::vector<Theme> themes;
  double alpha = 0.05;
};

struct ThemeParams {
  double alpha = 0.05;
  double theta_dedupe = 0.8;
};

// Sentences must carry the CONCEPT layer. Occurrence is binary per sentence
// and the background is the whole corpus.
std::vector<ThemeResult> extract_themes(std::span<const int> assignment, std::size_t k,
                                        std::span<const text::SentenceRecord> sentences,
                                        const wikify::RelatednessScorer& relatedness, const ThemeParams& params);
std::vector<ThemeResult> extract_themes(const cluster::Partition& partition,
                                        std::span<const text::SentenceRecord> sentences,
                                        const wikify::RelatednessScorer& relatedness, const ThemeParams& params);

}  // namespace debater::themes
