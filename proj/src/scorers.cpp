#include "debater/scorers.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <regex>

#include "debater/bundled.hpp"
#include "debater/error.hpp"

namespace debater::scorers {

using text::SentenceRecord;

void validate(const Topic& topic) {
  if (text::trim(topic.text).empty()) throw Error("topic.invalid", "topic text must be non-empty");
  if (topic.target && text::trim(*topic.target).empty()) {
    throw Error("topic.invalid", "topic target must be non-empty when given");
  }
}

std::unordered_map<std::string, int> parse_sentiment_tsv(std::string_view contents) {
  std::unordered_map<std::string, int> out;
  std::size_t line_no = 0;
  for (const auto& line : text::data_lines(contents)) {
    ++line_no;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) throw Error("lexicon.invalid", "sentiment line " + std::to_string(line_no) + ": missing tab");
    const auto word = text::lowercase(text::trim(line.substr(0, tab)));
    const auto sign = text::trim(line.substr(tab + 1));
    if (word.empty()) throw Error("lexicon.invalid", "sentiment line " + std::to_string(line_no) + ": empty word");
    if (sign == "+1") {
      out[word] = 1;
    } else if (sign == "-1") {
      out[word] = -1;
    } else {
      throw Error("lexicon.invalid", "sentiment line " + std::to_string(line_no) + ": polarity must be +1 or -1");
    }
  }
  return out;
}

Lexicons Lexicons::parse(std::string_view opinion, std::string_view evidence, std::string_view sentiment_tsv) {
  Lexicons lex;
  for (const auto& line : text::data_lines(opinion)) lex.opinion_markers.insert(text::lowercase(text::trim(line)));
  for (const auto& line : text::data_lines(evidence)) {
    std::vector<std::string> seq;
    for (const auto& t : text::tokenize(line)) seq.push_back(text::lowercase(t.surface));
    if (!seq.empty()) lex.evidence_markers.push_back(std::move(seq));
  }
  lex.sentiment = parse_sentiment_tsv(sentiment_tsv);
  return lex;
}

const Lexicons& Lexicons::bundled() {
  static const Lexicons lex = parse(bundled::file("data/lexicon/opinion_markers.txt"),
                                    bundled::file("data/lexicon/evidence_markers.txt"),
                                    bundled::file("data/lexicon/sentiment.tsv"));
  return lex;
}

namespace {

std::vector<std::string> lowered(const SentenceRecord& s) {
  std::vector<std::string> out;
  out.reserve(s.tokens.size());
  for (const auto& t : s.tokens) out.push_back(text::lowercase(t.surface));
  return out;
}

void require_words(const SentenceRecord& s) {
  if (text::word_count(s.tokens) == 0) throw Error("sentence.empty", "sentence has no words");
}

std::size_t count_sequence(const std::vector<std::string>& toks, const std::vector<std::string>& seq) {
  if (seq.empty() || seq.size() > toks.size()) return 0;
  std::size_t n = 0;
  for (std::size_t i = 0; i + seq.size() <= toks.size(); ++i) {
    if (std::equal(seq.begin(), seq.end(), toks.begin() + static_cast<std::ptrdiff_t>(i))) ++n;
  }
  return n;
}

bool is_negator(const std::string& t) { return t == "not" || t == "never" || t == "no" || t == "n't"; }

}  // namespace

bool mentions_target(const SentenceRecord& s, std::string_view title) {
  if (auto it = s.layers.find(std::string(text::kConceptLayer)); it != s.layers.end()) {
    for (const auto& sp : it->second) {
      if (sp.tag == title) return true;
    }
  }
  std::string spaced(title);
  std::replace(spaced.begin(), spaced.end(), '_', ' ');
  std::vector<std::string> seq;
  for (const auto& t : text::tokenize(spaced)) seq.push_back(text::lowercase(t.surface));
  return count_sequence(lowered(s), seq) > 0;
}

std::size_t opinion_marker_count(const SentenceRecord& s, const Lexicons& lex) {
  std::size_t n = 0;
  for (const auto& t : lowered(s)) n += lex.opinion_markers.contains(t);
  return n;
}

std::size_t evidence_marker_count(const SentenceRecord& s, const Lexicons& lex) {
  const auto toks = lowered(s);
  std::size_t n = 0;
  for (const auto& m : lex.evidence_markers) n += count_sequence(toks, m);
  return n;
}

double claim_score_baseline(const SentenceRecord& s, const Topic& topic, const Lexicons& lex) {
  require_words(s);
  if (topic.target && !mentions_target(s, *topic.target)) return 0.0;
  const double markers = static_cast<double>(opinion_marker_count(s, lex));
  return 0.5 + 0.5 * std::min(1.0, markers / 2.0);
}

double evidence_score_baseline(const SentenceRecord& s, const Topic&, const Lexicons& lex) {
  require_words(s);
  bool numeral = false;
  for (const auto& t : s.tokens) {
    for (char32_t c : text::decode_utf8(t.surface)) {
      if (c >= U'0' && c <= U'9') numeral = true;
    }
  }
  const double markers = static_cast<double>(evidence_marker_count(s, lex));
  return std::min(1.0, 0.4 * markers + (numeral ? 0.2 : 0.0));
}

// Rises over 3..7 words, flat to 25, falls to zero past 60.
double length_component(std::size_t n) {
  if (n < 3 || n > 60) return 0.0;
  if (n < 7) return static_cast<double>(n - 2) / 5.0;
  if (n <= 25) return 1.0;
  return static_cast<double>(61 - n) / 36.0;
}

double cleanliness_component(const SentenceRecord& s) {
  const auto cps = text::decode_utf8(s.text);
  auto punct = [](char32_t c) { return c == U'!' || c == U'?' || c == U'.' || c == U',' || c == U';' || c == U':'; };
  std::size_t runs = 0;
  for (std::size_t i = 0; i < cps.size();) {
    std::size_t j = i;
    while (j < cps.size() && punct(cps[j])) ++j;
    if (j - i >= 2) ++runs;
    i = j == i ? i + 1 : j;
  }

  bool caps = false;
  for (const auto& t : s.tokens) {
    std::size_t letters = 0;
    bool all_upper = true;
    for (char32_t c : text::decode_utf8(t.surface)) {
      if (c < 0x80 && std::isalpha(static_cast<int>(c))) {
        ++letters;
        if (!std::isupper(static_cast<int>(c))) all_upper = false;
      }
    }
    // four letters spares short acronyms such as US or EU
    if (letters >= 4 && all_upper) caps = true;
  }

  static const std::regex url(R"((https?://|www\.)\S+)", std::regex::icase);
  const bool has_url = std::regex_search(s.text, url);

  bool personal = false;
  for (const auto& t : s.tokens) {
    if (!text::is_word(t)) continue;
    static const std::unordered_set<std::string> openers = {"i", "we", "you", "my", "our", "your", "me", "us"};
    personal = openers.contains(text::lowercase(t.surface));
    break;
  }

  const double c = 1.0 - 0.25 * static_cast<double>(runs) - 0.25 * caps - 0.25 * has_url - 0.25 * personal;
  return std::max(0.0, c);
}

double quality_score_baseline(const SentenceRecord& s) {
  require_words(s);
  return length_component(text::word_count(s.tokens)) * cleanliness_component(s);
}

int sentiment_polarity(const SentenceRecord& s, const Lexicons& lex) {
  const auto toks = lowered(s);
  int total = 0;
  for (std::size_t i = 0; i < toks.size(); ++i) {
    auto it = lex.sentiment.find(toks[i]);
    if (it == lex.sentiment.end()) continue;
    int v = it->second;
    for (std::size_t back = 1; back <= 2 && back <= i; ++back) {
      if (is_negator(toks[i - back])) {
        v = -v;
        break;
      }
    }
    total += v;
  }
  return total;
}

StanceLabel stance_baseline(const SentenceRecord& argument, const Topic& topic, const Lexicons& lex) {
  validate(topic);
  require_words(argument);
  const int p = sentiment_polarity(argument, lex);
  if (p == 0) throw Error("stance.abstain", "no sentiment evidence for a stance", ErrorKind::semantic);
  const bool positive = p > 0;
  const bool pro = topic.polarity == ActionPolarity::promoting ? positive : !positive;
  return {pro ? Stance::pro : Stance::con, std::min(1.0, std::abs(p) / 3.0)};
}

CharSpan claim_boundaries_baseline(const SentenceRecord& s) {
  require_words(s);
  const auto toks = lowered(s);
  const std::size_t n = toks.size();
  std::size_t first = 0;
  std::size_t last = n;  // exclusive

  static const std::unordered_set<std::string> verbs = {"said", "says", "argued", "believes", "claimed"};
  for (std::size_t v = 1; v <= 4 && v < n; ++v) {
    if (!text::is_word(s.tokens[v - 1])) break;
    if (verbs.contains(toks[v])) {
      first = v + 1;
      if (first < n && toks[first] == "that") ++first;
      break;
    }
  }

  // Trailing "( ... )" optionally followed by closing punctuation.
  std::size_t end = n;
  while (end > first && !text::is_word(s.tokens[end - 1]) && toks[end - 1] != ")") --end;
  if (end > first && toks[end - 1] == ")") {
    std::size_t open = end - 1;
    while (open > first && toks[open] != "(") --open;
    if (toks[open] == "(") last = open;
  }

  std::size_t words = 0;
  for (std::size_t i = first; i < last; ++i) words += text::is_word(s.tokens[i]);
  if (words < 2) throw Error("boundary.too_short", "claim would keep fewer than two words");
  // Trailing punctuation of the residue stays attached unless a citation was cut.
  std::size_t stop = last;
  if (last != n) {
    while (stop > first && !text::is_word(s.tokens[stop - 1])) --stop;
  }
  return {s.tokens[first].start, s.tokens[stop - 1].end};
}

// ---- registry ---------------------------------------------------------------

namespace {

struct BaselineClaim final : ClaimScorer {
  double score(const SentenceRecord& s, const Topic& t) const override {
    return claim_score_baseline(s, t, Lexicons::bundled());
  }
};
struct BaselineEvidence final : EvidenceScorer {
  double score(const SentenceRecord& s, const Topic& t) const override {
    return evidence_score_baseline(s, t, Lexicons::bundled());
  }
};
struct BaselineQuality final : QualityScorer {
  double score(const SentenceRecord& s) const override { return quality_score_baseline(s); }
};
struct BaselineStance final : StanceClassifier {
  StanceLabel classify(const SentenceRecord& a, const Topic& t) const override {
    return stance_baseline(a, t, Lexicons::bundled());
  }
};
struct BaselineBoundary final : BoundaryExtractor {
  CharSpan extract(const SentenceRecord& s) const override { return claim_boundaries_baseline(s); }
};

}  // namespace

const std::vector<std::string>& ScorerRegistry::slot_names() {
  static const std::vector<std::string> names = {"claim", "evidence", "quality", "stance", "boundary"};
  return names;
}

ScorerRegistry ScorerRegistry::baseline() {
  return {std::make_shared<BaselineClaim>(), std::make_shared<BaselineEvidence>(), std::make_shared<BaselineQuality>(),
          std::make_shared<BaselineStance>(), std::make_shared<BaselineBoundary>()};
}

ScorerRegistry ScorerRegistry::from_config(const std::map<std::string, std::string>& slots) {
  const auto& names = slot_names();
  for (const auto& [slot, impl] : slots) {
    if (std::find(names.begin(), names.end(), slot) == names.end()) {
      throw Error("registry.unknown_slot", "unknown scorer slot '" + slot + "'");
    }
    if (impl != kBaselineId) {
      throw Error("registry.unknown_impl", "no implementation '" + impl + "' for slot '" + slot + "'");
    }
  }
  return baseline();
}

}  // namespace debater::scorers
