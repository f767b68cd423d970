#pragma once

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "debater/error.hpp"
#include "debater/text.hpp"

namespace debater::index {

// Postings refer to sentences by ordinal in the id-sorted store.
struct TermPosting {
  std::uint32_t sentence = 0;
  std::vector<std::uint32_t> positions;

  bool operator==(const TermPosting&) const = default;
};

struct TokenSpan {
  std::uint32_t first = 0;
  std::uint32_t last = 0;  // inclusive

  auto operator<=>(const TokenSpan&) const = default;
};

struct LayerPosting {
  std::uint32_t sentence = 0;
  std::vector<TokenSpan> spans;  // sorted

  bool operator==(const LayerPosting&) const = default;
};

class SentenceIndex {
 public:
  SentenceIndex() = default;

  // Tokens are indexed lowercased; every layer span is indexed under its layer
  // and tag. Throws "index.duplicate_id".
  static SentenceIndex build(std::vector<text::SentenceRecord> sentences);

  std::size_t size() const { return store_.size(); }
  std::size_t term_count() const { return postings_.size(); }
  const text::SentenceRecord& sentence(std::size_t ordinal) const { return store_[ordinal]; }
  const std::vector<text::SentenceRecord>& sentences() const { return store_; }

  // Empty span when the term is absent.
  std::span<const TermPosting> postings(const std::string& lowercased_term) const;
  bool has_layer(const std::string& name) const { return layers_.contains(name); }
  std::vector<std::string> layer_names() const;
  // All spans of a layer, or only those carrying `tag`.
  std::span<const LayerPosting> layer_postings(const std::string& name) const;
  std::span<const LayerPosting> layer_postings(const std::string& name, const std::string& tag) const;

  // A new index whose sentences gain a layer with one span per token whose
  // lowercased surface is in `words`. Throws "index.layer_exists".
  SentenceIndex with_lexicon_layer(const std::string& name, const std::vector<std::string>& words) const;

  // Single-file container: magic "SIDX1", then store, postings and layer
  // sections. Throws "index.format" on a malformed file.
  void save(std::ostream& out) const;
  static SentenceIndex load(std::istream& in);
  void save_file(const std::string& path) const;
  static SentenceIndex load_file(const std::string& path);

  // Postings and layers as JSON text, for inspection.
  std::string dump_json() const;

  bool operator==(const SentenceIndex&) const = default;

 private:
  struct Layer {
    std::vector<LayerPosting> all;
    std::map<std::string, std::vector<LayerPosting>> by_tag;

    bool operator==(const Layer&) const = default;
  };

  void index_sentence(std::uint32_t ordinal);
  void index_layer(std::uint32_t ordinal, const std::string& name, const std::vector<text::AnnotationSpan>& spans);

  std::vector<text::SentenceRecord> store_;
  std::unordered_map<std::string, std::vector<TermPosting>> postings_;
  std::map<std::string, Layer> layers_;
};

// ---- query language -------------------------------------------------------

struct Element {
  enum class Kind { word, phrase, layer };
  Kind kind = Kind::word;
  std::vector<std::string> terms;  // lowercased tokens; one for a word
  std::string layer;
  std::optional<std::string> tag;

  bool operator==(const Element&) const = default;
};

struct Gap {
  bool adjacent = true;
  std::uint32_t min = 0;
  std::uint32_t max = 0;

  bool operator==(const Gap&) const = default;
};

struct QueryPlan {
  std::vector<Element> elements;
  std::vector<Gap> gaps;  // gaps[i] sits between elements i and i + 1

  bool operator==(const QueryPlan&) const = default;
};

inline constexpr std::uint32_t kDefaultGapMax = 10;

class QueryParseError : public Error {
 public:
  QueryParseError(std::size_t offset, const std::string& what)
      : Error("query.parse", what + " at offset " + std::to_string(offset)), offset_(offset), reason_(what) {}
  // Character (codepoint) offset into the query text.
  std::size_t offset() const { return offset_; }
  const std::string& reason() const { return reason_; }

 private:
  std::size_t offset_;
  std::string reason_;
};

// query   := element (sep element)*
// sep     := whitespace (adjacent) | "..." or "…" (1 to W intervening tokens)
// element := word | "quoted phrase" | <LAYER> | <LAYER:Tag>
// Bare words are tokenized like sentence text; one that splits into several
// tokens becomes a phrase.
QueryPlan parse_query(std::string_view text, std::uint32_t default_gap_max = kDefaultGapMax);
// Inverse of parse_query on the plans it produces; gap widths are not written,
// so reparse with the same W. Throws "query.unprintable" for terms no query
// text tokenizes to.
std::string print_query(const QueryPlan& plan);

struct QueryMatch {
  std::string sentence_id;
  std::vector<TokenSpan> spans;  // one per element

  bool operator==(const QueryMatch&) const = default;
};

struct Page {
  std::size_t limit = std::numeric_limits<std::size_t>::max();
  std::size_t offset = 0;
};

// Leftmost match per sentence (lexicographically smallest span tuple), results
// in sentence id order. Throws "query.unknown_layer".
std::vector<QueryMatch> execute(const QueryPlan& plan, const SentenceIndex& index, Page page = {});

}  // namespace debater::index
