#pragma once

#include <cstddef>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "debater/scorers.hpp"
#include "debater/text.hpp"

namespace debater::kpa {

using text::SentenceRecord;

struct KpaParams {
  std::size_t k_max = 10;
  double tau = 0.55;
  double tau_dup = 0.75;
  double q_min = 0.5;
  std::size_t min_tokens = 3;  // word tokens, inclusive window
  std::size_t max_tokens = 20;
  std::size_t delta = 2;
  std::optional<std::vector<std::string>> given_key_points;
  bool multi_match = false;  // every sentence >= tau counts for every key point
};

// Throws "kpa.invalid".
void validate(const KpaParams& params);

class PairMatcher {
 public:
  virtual ~PairMatcher() = default;
  // Symmetric, in [0,1], 1 for identical texts.
  virtual double match(const SentenceRecord& sentence, const SentenceRecord& key_point) const = 0;
  // Matchers with corpus statistics return a copy fitted to `corpus`; the
  // rest return nullptr and are used as they are.
  virtual std::unique_ptr<PairMatcher> fit(std::span<const SentenceRecord> corpus) const {
    (void)corpus;
    return nullptr;
  }
  // scores[b][a] = match(as[a], bs[b]). The default calls match() per pair;
  // overrides must agree with it exactly.
  virtual std::vector<std::vector<double>> score_matrix(std::span<const SentenceRecord> as,
                                                        std::span<const SentenceRecord> bs) const;
};

// |A ∩ B| / sqrt(|A| |B|) over lowercased word-token sets.
class TokenOverlapMatcher final : public PairMatcher {
 public:
  double match(const SentenceRecord& a, const SentenceRecord& b) const override;
  std::vector<std::vector<double>> score_matrix(std::span<const SentenceRecord> as,
                                                std::span<const SentenceRecord> bs) const override;
};

// Cosine of L2-normalised TF-IDF vectors over word tokens. idf is smoothed,
// ln((1 + n) / (1 + df)) + 1, so a term shared by every sentence still counts.
// Unfitted, every idf is 1.
class TfidfCosineMatcher final : public PairMatcher {
 public:
  double match(const SentenceRecord& a, const SentenceRecord& b) const override;
  std::unique_ptr<PairMatcher> fit(std::span<const SentenceRecord> corpus) const override;
  std::vector<std::vector<double>> score_matrix(std::span<const SentenceRecord> as,
                                                std::span<const SentenceRecord> bs) const override;

 private:
  std::map<std::string, double> vector_of(const std::vector<std::string>& terms) const;

  std::unordered_map<std::string, double> idf_;
  double unseen_idf_ = 1.0;
};

std::vector<std::string> word_terms(const SentenceRecord& s);

struct MatchTable {
  std::vector<std::vector<double>> scores;      // [candidate][sentence]
  std::vector<std::vector<double>> redundancy;  // [candidate][candidate]

  std::size_t candidates() const { return scores.size(); }
  std::size_t sentences() const { return scores.empty() ? 0 : scores[0].size(); }
};

// Throws "kpa.empty" when either list is empty.
MatchTable match_matrix(std::span<const SentenceRecord> sentences, std::span<const SentenceRecord> candidates,
                        const PairMatcher& matcher);

std::vector<std::size_t> greedy_select(const MatchTable& table, const KpaParams& params);

struct Match {
  std::string sentence_id;
  std::string text;
  double score = 0;

  bool operator==(const Match&) const = default;
};

struct KeyPoint {
  std::string text;
  std::size_t salience = 0;
  std::vector<Match> matches;  // descending score

  bool operator==(const KeyPoint&) const = default;
};

struct KeyPointSummary {
  std::vector<KeyPoint> key_points;  // descending salience
  double coverage = 0;
  std::size_t total_sentences = 0;
  std::size_t candidate_count = 0;

  bool operator==(const KeyPointSummary&) const = default;
};

// Index of the key point each sentence went to, or nullopt.
struct Assignment {
  std::vector<std::optional<std::size_t>> sentence_to_key_point;
  KeyPointSummary summary;
};

Assignment assign(const MatchTable& table, std::span<const std::size_t> selected, double tau,
                  std::span<const SentenceRecord> sentences, std::span<const std::string> key_point_texts,
                  bool multi_match = false);

struct Comment {
  std::string id;
  std::string text;
};

// Sentences of the comments, ids "<comment id>.<n>" from 1, in canonical order:
// by content hash, then text, then id.
std::vector<SentenceRecord> comment_sentences(std::span<const Comment> comments);

// Throws "kpa.empty" for no sentences, "kpa.no_candidates" when filtering
// leaves nothing (semantic).
KeyPointSummary run_kpa(std::span<const Comment> comments, const KpaParams& params, const PairMatcher& matcher,
                        const scorers::ScorerRegistry& registry);
KeyPointSummary run_kpa(const std::vector<std::string>& comments, const KpaParams& params, const PairMatcher& matcher,
                        const scorers::ScorerRegistry& registry);

struct SalienceShift {
  std::string key_point;
  std::size_t old_salience = 0;
  std::size_t new_salience = 0;

  bool operator==(const SalienceShift&) const = default;
};

// Throws "kpa.invalid" when the base summary has no key points.
std::vector<SalienceShift> compare_over_time(const KeyPointSummary& base, std::span<const Comment> comments_new,
                                             KpaParams params, const PairMatcher& matcher,
                                             const scorers::ScorerRegistry& registry);

std::string summary_json(const KeyPointSummary& summary);
// Coverage line, then each key point with salience and its top two matches.
std::string summary_report(const KeyPointSummary& summary, std::size_t top_matches = 2);

}  // namespace debater::kpa
