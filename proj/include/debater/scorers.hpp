#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "debater/text.hpp"

namespace debater::scorers {

enum class ActionPolarity { promoting, suppressing };

struct Topic {
  std::string text;
  std::optional<std::string> target;  // canonical concept title
  ActionPolarity polarity = ActionPolarity::promoting;
};

// Throws "topic.invalid" for empty text.
void validate(const Topic& topic);

struct Lexicons {
  std::unordered_set<std::string> opinion_markers;          // single lowercased tokens
  std::vector<std::vector<std::string>> evidence_markers;   // token sequences
  std::unordered_map<std::string, int> sentiment;           // +1 / -1

  static Lexicons parse(std::string_view opinion, std::string_view evidence, std::string_view sentiment_tsv);
  static const Lexicons& bundled();
};

// "word<TAB>+1|-1" lines. Throws "lexicon.invalid".
std::unordered_map<std::string, int> parse_sentiment_tsv(std::string_view contents);

enum class ScoreKind { claim, evidence, quality };

struct ScoredSentence {
  text::SentenceRecord sentence;
  double score = 0;
  ScoreKind kind = ScoreKind::claim;
};

enum class Stance { pro, con };

struct StanceLabel {
  Stance label = Stance::pro;
  double confidence = 0;
};

// Codepoint offsets into the sentence text, end exclusive.
struct CharSpan {
  std::size_t start = 0;
  std::size_t end = 0;

  bool operator==(const CharSpan&) const = default;
};

// Target present when the CONCEPT layer carries it, or when the title's words
// (underscores as spaces) occur as consecutive tokens, case-insensitively.
bool mentions_target(const text::SentenceRecord& sentence, std::string_view title);

std::size_t opinion_marker_count(const text::SentenceRecord& sentence, const Lexicons& lex);
std::size_t evidence_marker_count(const text::SentenceRecord& sentence, const Lexicons& lex);

// All baselines throw "sentence.empty" for a sentence without word tokens.
double claim_score_baseline(const text::SentenceRecord& sentence, const Topic& topic, const Lexicons& lex);
double evidence_score_baseline(const text::SentenceRecord& sentence, const Topic& topic, const Lexicons& lex);

double length_component(std::size_t word_tokens);
double cleanliness_component(const text::SentenceRecord& sentence);
double quality_score_baseline(const text::SentenceRecord& sentence);

// Signed sentiment sum; a negator among the two preceding tokens flips a word.
int sentiment_polarity(const text::SentenceRecord& sentence, const Lexicons& lex);
// Throws "stance.abstain" (semantic) when the polarity is zero.
StanceLabel stance_baseline(const text::SentenceRecord& argument, const Topic& topic, const Lexicons& lex);

// Strips a leading reporting clause and a trailing parenthetical citation.
// Throws "boundary.too_short" when fewer than two word tokens would remain.
CharSpan claim_boundaries_baseline(const text::SentenceRecord& sentence);

// ---- registry ---------------------------------------------------------------

class ClaimScorer {
 public:
  virtual ~ClaimScorer() = default;
  virtual double score(const text::SentenceRecord& sentence, const Topic& topic) const = 0;
};

class EvidenceScorer {
 public:
  virtual ~EvidenceScorer() = default;
  virtual double score(const text::SentenceRecord& sentence, const Topic& topic) const = 0;
};

class QualityScorer {
 public:
  virtual ~QualityScorer() = default;
  virtual double score(const text::SentenceRecord& sentence) const = 0;
};

class StanceClassifier {
 public:
  virtual ~StanceClassifier() = default;
  virtual StanceLabel classify(const text::SentenceRecord& argument, const Topic& topic) const = 0;
};

class BoundaryExtractor {
 public:
  virtual ~BoundaryExtractor() = default;
  virtual CharSpan extract(const text::SentenceRecord& sentence) const = 0;
};

inline constexpr std::string_view kBaselineId = "baseline";

struct ScorerRegistry {
  std::shared_ptr<const ClaimScorer> claim;
  std::shared_ptr<const EvidenceScorer> evidence;
  std::shared_ptr<const QualityScorer> quality;
  std::shared_ptr<const StanceClassifier> stance;
  std::shared_ptr<const BoundaryExtractor> boundary;

  // Every slot filled with the bundled-lexicon baseline.
  static ScorerRegistry baseline();
  // Slot name -> implementation id; slots not named stay baseline. Throws
  // "registry.unknown_slot" / "registry.unknown_impl".
  static ScorerRegistry from_config(const std::map<std::string, std::string>& slots);
  static const std::vector<std::string>& slot_names();
};

}  // namespace debater::scorers
