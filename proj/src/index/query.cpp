#include <algorithm>
#include <limits>

#include "debater/sent_index.hpp"

namespace debater::index {

namespace {

bool is_ws(char32_t c) { return c == U' ' || c == U'\t' || c == U'\n' || c == U'\r' || c == 0x00A0 || c == 0x3000; }

// Query text is lowercased before tokenizing so printing lowercased terms
// reproduces them.
std::vector<std::string> query_terms(std::string_view content) {
  std::vector<std::string> out;
  for (auto& t : text::tokenize(text::lowercase(content))) out.push_back(std::move(t.surface));
  return out;
}

class Parser {
 public:
  Parser(std::string_view text, std::uint32_t gap_max) : cps_(text::decode_utf8(text)), gap_max_(gap_max) {}

  QueryPlan run() {
    if (gap_max_ < 1) throw Error("query.invalid", "gap width must be at least 1");
    QueryPlan plan;
    skip_ws();
    if (at_end()) throw QueryParseError(pos_, "empty query");
    while (true) {
      plan.elements.push_back(element());
      skip_ws();
      if (at_end()) break;
      if (const auto len = ellipsis_at(pos_)) {
        const auto sep = pos_;
        pos_ += len;
        skip_ws();
        if (at_end()) throw QueryParseError(sep, "expected element after separator");
        plan.gaps.push_back(Gap{false, 1, gap_max_});
      } else {
        plan.gaps.push_back(Gap{true, 0, 0});
      }
    }
    return plan;
  }

 private:
  bool at_end() const { return pos_ >= cps_.size(); }
  void skip_ws() {
    while (!at_end() && is_ws(cps_[pos_])) ++pos_;
  }
  std::size_t ellipsis_at(std::size_t p) const {
    if (p < cps_.size() && cps_[p] == U'…') return 1;
    if (p + 2 < cps_.size() && cps_[p] == U'.' && cps_[p + 1] == U'.' && cps_[p + 2] == U'.') return 3;
    return 0;
  }

  static std::vector<std::string> lowered_tokens(std::u32string_view content) {
    return query_terms(text::encode_utf8(content));
  }

  static Element terms_element(std::vector<std::string> terms) {
    Element e;
    e.kind = terms.size() == 1 ? Element::Kind::word : Element::Kind::phrase;
    e.terms = std::move(terms);
    return e;
  }

  Element element() {
    const auto start = pos_;
    const char32_t c = cps_[pos_];
    if (ellipsis_at(pos_)) throw QueryParseError(pos_, "expected element before separator");
    if (c == U'<') return layer();
    if (c == U'"') {
      const auto close = cps_.find(U'"', pos_ + 1);
      if (close == std::u32string::npos) throw QueryParseError(cps_.size(), "unclosed phrase");
      auto terms = lowered_tokens(std::u32string_view(cps_).substr(pos_ + 1, close - pos_ - 1));
      if (terms.empty()) throw QueryParseError(start, "empty phrase");
      pos_ = close + 1;
      return terms_element(std::move(terms));
    }
    if (c == U'>') throw QueryParseError(pos_, "unexpected '>'");
    std::size_t end = pos_;
    while (end < cps_.size() && !is_ws(cps_[end]) && cps_[end] != U'<' && cps_[end] != U'"' && !ellipsis_at(end)) {
      ++end;
    }
    auto terms = lowered_tokens(std::u32string_view(cps_).substr(pos_, end - pos_));
    pos_ = end;
    if (terms.empty()) throw QueryParseError(start, "expected element");
    return terms_element(std::move(terms));
  }

  Element layer() {
    const auto open = pos_;
    std::size_t p = open + 1;
    std::size_t colon = std::u32string::npos;
    while (p < cps_.size() && cps_[p] != U'>') {
      if (cps_[p] == U'<' || cps_[p] == U'"') throw QueryParseError(p, "unexpected character in layer element");
      if (cps_[p] == U':' && colon == std::u32string::npos) colon = p;
      ++p;
    }
    if (p >= cps_.size()) throw QueryParseError(cps_.size(), "unclosed layer element");
    Element e;
    e.kind = Element::Kind::layer;
    const auto name_end = colon == std::u32string::npos ? p : colon;
    auto name = std::u32string_view(cps_).substr(open + 1, name_end - open - 1);
    if (name.empty()) throw QueryParseError(open + 1, "empty layer name");
    for (std::size_t i = 0; i < name.size(); ++i) {
      if (is_ws(name[i])) throw QueryParseError(open + 1 + i, "whitespace in layer name");
    }
    e.layer = text::encode_utf8(name);
    if (colon != std::u32string::npos) {
      auto tag = std::u32string_view(cps_).substr(colon + 1, p - colon - 1);
      if (tag.empty()) throw QueryParseError(colon + 1, "empty layer tag");
      e.tag = text::encode_utf8(tag);
    }
    pos_ = p + 1;
    return e;
  }

  std::u32string cps_;
  std::size_t pos_ = 0;
  std::uint32_t gap_max_;
};

// A term prints bare when reparsing the bare text gives the same single term.
bool prints_bare(const std::string& term) {
  if (term.empty()) return false;
  for (char32_t c : text::decode_utf8(term)) {
    if (is_ws(c) || c == U'<' || c == U'>' || c == U'"' || c == U'…') return false;
  }
  if (term.find("...") != std::string::npos) return false;
  return query_terms(term) == std::vector<std::string>{term};
}

// Terms inside quotes. Tokenization is context sensitive (a clitic such as 's
// only splits off when glued to its word), so the terms are grouped into
// space-separated pieces that each tokenize back to exactly their terms.
// Shortest pieces win so ordinary phrases print one term per piece.
std::string quoted(const std::vector<std::string>& terms) {
  const auto n = terms.size();
  for (const auto& t : terms) {
    if (t.empty() || t.find('"') != std::string::npos) {
      throw Error("query.unprintable", "term cannot be written in the query language");
    }
  }
  auto valid = [&](std::size_t i, std::size_t j) {
    std::string piece;
    for (std::size_t k = i; k < j; ++k) piece += terms[k];
    return query_terms(piece) == std::vector<std::string>(terms.begin() + i, terms.begin() + j);
  };
  constexpr auto kNone = std::numeric_limits<std::size_t>::max();
  std::vector<std::size_t> from(n + 1, kNone);
  from[0] = 0;
  for (std::size_t j = 1; j <= n; ++j) {
    for (std::size_t i = j; i-- > 0;) {
      if (from[i] != kNone && valid(i, j)) {
        from[j] = i;
        break;
      }
    }
  }
  if (from[n] == kNone) throw Error("query.unprintable", "phrase cannot be written in the query language");
  std::vector<std::string> pieces;
  for (std::size_t j = n; j > 0; j = from[j]) {
    std::string piece;
    for (std::size_t k = from[j]; k < j; ++k) piece += terms[k];
    pieces.push_back(std::move(piece));
  }
  std::string out = "\"";
  for (std::size_t p = pieces.size(); p-- > 0;) out += pieces[p] + (p ? " " : "");
  return out + "\"";
}

}  // namespace

QueryPlan parse_query(std::string_view text, std::uint32_t default_gap_max) {
  return Parser(text, default_gap_max).run();
}

std::string print_query(const QueryPlan& plan) {
  std::string out;
  for (std::size_t i = 0; i < plan.elements.size(); ++i) {
    if (i > 0) out += plan.gaps[i - 1].adjacent ? " " : " ... ";
    const auto& e = plan.elements[i];
    switch (e.kind) {
      case Element::Kind::layer:
        out += "<" + e.layer + (e.tag ? ":" + *e.tag : "") + ">";
        break;
      case Element::Kind::word:
        if (prints_bare(e.terms[0])) {
          out += e.terms[0];
          break;
        }
        [[fallthrough]];
      case Element::Kind::phrase:
        out += quoted(e.terms);
        break;
    }
  }
  return out;
}

namespace {

const TermPosting* find_posting(std::span<const TermPosting> list, std::uint32_t sentence) {
  auto it = std::lower_bound(list.begin(), list.end(), sentence,
                             [](const TermPosting& p, std::uint32_t s) { return p.sentence < s; });
  return it != list.end() && it->sentence == sentence ? &*it : nullptr;
}

const LayerPosting* find_layer(std::span<const LayerPosting> list, std::uint32_t sentence) {
  auto it = std::lower_bound(list.begin(), list.end(), sentence,
                             [](const LayerPosting& p, std::uint32_t s) { return p.sentence < s; });
  return it != list.end() && it->sentence == sentence ? &*it : nullptr;
}

// Per-element source lists resolved once per query.
struct Source {
  std::vector<std::span<const TermPosting>> terms;
  std::span<const LayerPosting> layer;
  bool is_layer = false;
};

std::vector<std::uint32_t> sentences_of(const Source& s) {
  std::vector<std::uint32_t> out;
  if (s.is_layer) {
    for (const auto& p : s.layer) out.push_back(p.sentence);
    return out;
  }
  std::size_t smallest = 0;
  for (std::size_t i = 1; i < s.terms.size(); ++i) {
    if (s.terms[i].size() < s.terms[smallest].size()) smallest = i;
  }
  for (const auto& p : s.terms[smallest]) out.push_back(p.sentence);
  return out;
}

std::vector<TokenSpan> spans_in(const Source& s, std::uint32_t sentence) {
  std::vector<TokenSpan> out;
  if (s.is_layer) {
    if (const auto* p = find_layer(s.layer, sentence)) out = p->spans;
    return out;
  }
  std::vector<const TermPosting*> posts;
  for (const auto& list : s.terms) {
    const auto* p = find_posting(list, sentence);
    if (!p) return out;
    posts.push_back(p);
  }
  const auto len = static_cast<std::uint32_t>(posts.size());
  for (auto start : posts[0]->positions) {
    bool ok = true;
    for (std::uint32_t j = 1; j < len && ok; ++j) {
      ok = std::binary_search(posts[j]->positions.begin(), posts[j]->positions.end(), start + j);
    }
    if (ok) out.push_back({start, start + len - 1});
  }
  return out;
}

// Lexicographically smallest span tuple, depth first with failure memo.
class Matcher {
 public:
  Matcher(const QueryPlan& plan, std::vector<std::vector<TokenSpan>> cands)
      : plan_(plan), cands_(std::move(cands)), failed_(cands_.size()) {
    for (std::size_t i = 0; i < cands_.size(); ++i) failed_[i].assign(cands_[i].size(), false);
  }

  bool run(std::vector<TokenSpan>& out) {
    out.resize(cands_.size());
    for (std::size_t c = 0; c < cands_[0].size(); ++c) {
      if (extend(0, c, out)) return true;
    }
    return false;
  }

 private:
  bool extend(std::size_t i, std::size_t c, std::vector<TokenSpan>& out) {
    if (failed_[i][c]) return false;
    out[i] = cands_[i][c];
    if (i + 1 == cands_.size()) return true;
    const auto& gap = plan_.gaps[i];
    const std::uint64_t lo = static_cast<std::uint64_t>(out[i].last) + 1 + (gap.adjacent ? 0 : gap.min);
    const std::uint64_t hi = static_cast<std::uint64_t>(out[i].last) + 1 + (gap.adjacent ? 0 : gap.max);
    const auto& next = cands_[i + 1];
    auto it = std::lower_bound(next.begin(), next.end(), lo, [](const TokenSpan& s, std::uint64_t v) { return s.first < v; });
    for (; it != next.end() && it->first <= hi; ++it) {
      if (extend(i + 1, static_cast<std::size_t>(it - next.begin()), out)) return true;
    }
    failed_[i][c] = true;
    return false;
  }

  const QueryPlan& plan_;
  std::vector<std::vector<TokenSpan>> cands_;
  std::vector<std::vector<bool>> failed_;
};

}  // namespace

std::vector<QueryMatch> execute(const QueryPlan& plan, const SentenceIndex& index, Page page) {
  if (plan.elements.empty()) throw Error("query.invalid", "query plan has no elements");
  if (plan.gaps.size() + 1 != plan.elements.size()) throw Error("query.invalid", "gap count must be elements - 1");
  std::vector<Source> sources;
  for (const auto& e : plan.elements) {
    Source s;
    if (e.kind == Element::Kind::layer) {
      if (!index.has_layer(e.layer)) {
        throw Error("query.unknown_layer", "unknown layer '" + e.layer + "'");
      }
      s.is_layer = true;
      s.layer = e.tag ? index.layer_postings(e.layer, *e.tag) : index.layer_postings(e.layer);
    } else {
      if (e.terms.empty()) throw Error("query.invalid", "element without terms");
      for (const auto& t : e.terms) s.terms.push_back(index.postings(t));
    }
    sources.push_back(std::move(s));
  }
  for (const auto& g : plan.gaps) {
    if (!g.adjacent && (g.min < 1 || g.max < g.min)) throw Error("query.invalid", "gap bounds must satisfy 1 <= min <= max");
  }

  // Candidate sentences: intersection of every element's sentence list.
  std::vector<std::uint32_t> candidates;
  std::vector<std::vector<std::uint32_t>> lists;
  for (const auto& s : sources) lists.push_back(sentences_of(s));
  std::sort(lists.begin(), lists.end(), [](const auto& a, const auto& b) { return a.size() < b.size(); });
  candidates = lists[0];
  for (std::size_t i = 1; i < lists.size() && !candidates.empty(); ++i) {
    std::vector<std::uint32_t> next;
    std::set_intersection(candidates.begin(), candidates.end(), lists[i].begin(), lists[i].end(),
                          std::back_inserter(next));
    candidates = std::move(next);
  }

  std::vector<QueryMatch> out;
  std::size_t skipped = 0;
  for (auto sentence : candidates) {
    if (out.size() >= page.limit) break;
    std::vector<std::vector<TokenSpan>> cands;
    bool empty = false;
    for (const auto& s : sources) {
      cands.push_back(spans_in(s, sentence));
      if (cands.back().empty()) {
        empty = true;
        break;
      }
    }
    if (empty) continue;
    std::vector<TokenSpan> spans;
    if (!Matcher(plan, std::move(cands)).run(spans)) continue;
    if (skipped < page.offset) {
      ++skipped;
      continue;
    }
    out.push_back({index.sentence(sentence).id, std::move(spans)});
  }
  return out;
}

}  // namespace debater::index
