#pragma once

#include <cstddef>
#include <istream>
#include <memory>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "debater/text.hpp"

namespace debater::wikify {

// A (surface, target) row of a title or redirect table.
struct SurfaceRecord {
  std::string surface;
  std::string target;
};

struct ConceptMention {
  std::string concept_title;
  std::size_t first_token = 0;
  std::size_t last_token = 0;  // inclusive
  std::string surface;
  bool via_redirect = false;

  bool operator==(const ConceptMention&) const = default;
};

// Surface-form table with titles and redirects resolved to canonical titles.
// Matching is token-level: surfaces are tokenised with text::tokenize and
// compared on case-folded NFC tokens, then filtered by the case policy.
class ConceptLexicon {
 public:
  struct Entry {
    std::string surface;          // normalised surface, original case
    std::string concept_title;    // canonical title after redirect resolution
    std::vector<std::string> tokens;  // normalised surface tokens, original case
    bool via_redirect = false;
    bool case_sensitive_only = false;  // single-token surfaces
    bool blocked = false;
  };

  ConceptLexicon();
  ConceptLexicon(ConceptLexicon&&) noexcept;
  ConceptLexicon& operator=(ConceptLexicon&&) noexcept;
  ~ConceptLexicon();

  std::size_t size() const { return entries_.size(); }
  std::size_t title_count() const { return title_count_; }
  std::size_t redirect_count() const { return redirect_count_; }
  std::size_t max_surface_tokens() const { return max_tokens_; }
  const std::vector<Entry>& entries() const { return entries_; }

  // Canonical concept for a normalised surface (exact case), if present.
  const Entry* find(std::string_view surface) const;

 private:
  friend ConceptLexicon load_lexicon(const std::vector<SurfaceRecord>&, const std::vector<SurfaceRecord>&,
                                     const std::vector<std::string>&);
  friend std::vector<ConceptMention> wikify(const text::SentenceRecord&, const ConceptLexicon&);

  struct TrieNode;
  std::vector<Entry> entries_;
  std::unordered_map<std::string, std::size_t> by_surface_;
  std::unique_ptr<TrieNode> root_;
  std::size_t title_count_ = 0;
  std::size_t redirect_count_ = 0;
  std::size_t max_tokens_ = 0;
};

// NFC, whitespace collapsed, underscores read as spaces.
std::string normalize_surface(std::string_view surface);

// Errors: redirect cycle ("lexicon.cycle", message lists the cycle), two
// targets for one surface ("lexicon.conflict"), redirect to an unknown page
// ("lexicon.dangling").
ConceptLexicon load_lexicon(const std::vector<SurfaceRecord>& titles, const std::vector<SurfaceRecord>& redirects,
                            const std::vector<std::string>& blocklist);

// Two-column TSV (surface, target); '#' lines ignored. A one-column line is a
// title mapping to itself.
std::vector<SurfaceRecord> read_surface_tsv(std::istream& in);
std::vector<SurfaceRecord> parse_surface_tsv(std::string_view contents);
std::vector<std::string> parse_word_list(std::string_view contents);

// Small general-purpose lexicon shipped with the library.
const ConceptLexicon& bundled_lexicon();

// Greedy longest-leftmost, non-overlapping, sorted by first token.
std::vector<ConceptMention> wikify(const text::SentenceRecord& sentence, const ConceptLexicon& lexicon);

// Adds the CONCEPT layer (tag = concept title) to a record.
void annotate_concepts(text::SentenceRecord& sentence, const ConceptLexicon& lexicon);

class RelatednessScorer {
 public:
  virtual ~RelatednessScorer() = default;
  // Symmetric, in [0, 1], score(c, c) = 1.
  virtual double score(std::string_view a, std::string_view b) const = 0;
};

// Jaccard overlap of lowercased title tokens; underscores separate tokens.
double relatedness_baseline(std::string_view a, std::string_view b);

class JaccardRelatedness final : public RelatednessScorer {
 public:
  double score(std::string_view a, std::string_view b) const override { return relatedness_baseline(a, b); }
};

}  // namespace debater::wikify
