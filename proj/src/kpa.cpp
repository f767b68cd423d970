#include "debater/kpa.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <numeric>
#include <set>
#include <thread>

#include "debater/error.hpp"
#include "json.hpp"

namespace debater::kpa {

void validate(const KpaParams& p) {
  auto bad = [](const std::string& m) { throw Error("kpa.invalid", m); };
  if (!(p.tau >= 0.0) || std::isnan(p.tau)) bad("tau must be >= 0");
  if (!(p.tau_dup >= p.tau)) bad("tau_dup must be >= tau");
  if (std::isnan(p.q_min)) bad("q_min must be a number");
  if (p.min_tokens < 1) bad("min_tokens must be >= 1");
  if (p.max_tokens < p.min_tokens) bad("max_tokens must be >= min_tokens");
  if (p.delta < 1) bad("delta must be >= 1");
  if (p.given_key_points) {
    if (p.given_key_points->empty()) bad("given_key_points must be non-empty when present");
    for (const auto& k : *p.given_key_points) {
      if (text::word_count(text::tokenize(k)) == 0) bad("given key point without words");
    }
  }
}

std::vector<std::string> word_terms(const SentenceRecord& s) {
  std::vector<std::string> out;
  for (const auto& t : s.tokens) {
    if (text::is_word(t)) out.push_back(text::lowercase(t.surface));
  }
  return out;
}

double TokenOverlapMatcher::match(const SentenceRecord& a, const SentenceRecord& b) const {
  const auto ta = word_terms(a);
  const auto tb = word_terms(b);
  std::set<std::string> sa(ta.begin(), ta.end()), sb(tb.begin(), tb.end());
  if (sa.empty() || sb.empty()) return ta == tb ? 1.0 : 0.0;
  std::size_t common = 0;
  for (const auto& t : sa) common += sb.contains(t);
  return static_cast<double>(common) / std::sqrt(static_cast<double>(sa.size()) * static_cast<double>(sb.size()));
}

double TfidfCosineMatcher::match(const SentenceRecord& a, const SentenceRecord& b) const {
  const auto ta = word_terms(a);
  const auto tb = word_terms(b);
  if (ta == tb) return 1.0;
  const auto va = vector_of(ta);
  const auto vb = vector_of(tb);
  double dot = 0;
  for (const auto& [t, w] : va) {
    if (auto it = vb.find(t); it != vb.end()) dot += w * it->second;
  }
  return std::clamp(dot, 0.0, 1.0);
}

std::map<std::string, double> TfidfCosineMatcher::vector_of(const std::vector<std::string>& terms) const {
  std::map<std::string, double> v;
  for (const auto& t : terms) v[t] += 1.0;
  double norm = 0;
  for (auto& [t, w] : v) {
    auto it = idf_.find(t);
    w *= it == idf_.end() ? unseen_idf_ : it->second;
    norm += w * w;
  }
  norm = std::sqrt(norm);
  for (auto& [t, w] : v) w /= norm;
  return v;
}

std::unique_ptr<PairMatcher> TfidfCosineMatcher::fit(std::span<const SentenceRecord> corpus) const {
  std::unordered_map<std::string, std::size_t> df;
  for (const auto& s : corpus) {
    auto terms = word_terms(s);
    std::sort(terms.begin(), terms.end());
    terms.erase(std::unique(terms.begin(), terms.end()), terms.end());
    for (const auto& t : terms) ++df[t];
  }
  auto out = std::make_unique<TfidfCosineMatcher>();
  const double n = static_cast<double>(corpus.size());
  for (const auto& [t, d] : df) out->idf_[t] = std::log((1.0 + n) / (1.0 + static_cast<double>(d))) + 1.0;
  out->unseen_idf_ = std::log(1.0 + n) + 1.0;
  return out;
}

namespace {

// Rows of an a-by-b job split over worker threads; each worker owns a strided
// set of rows, so the result does not depend on the thread count.
template <class F>
std::vector<std::vector<double>> parallel_rows(std::size_t rows, std::size_t cols, F&& cell) {
  std::vector<std::vector<double>> out(rows, std::vector<double>(cols));
  const std::size_t workers = std::clamp<std::size_t>(std::thread::hardware_concurrency(), 1, std::max<std::size_t>(1, rows));
  auto fill = [&](std::size_t w) {
    for (std::size_t r = w; r < rows; r += workers) {
      for (std::size_t c = 0; c < cols; ++c) out[r][c] = cell(r, c);
    }
  };
  if (workers == 1) {
    fill(0);
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(fill, w);
  }
  return out;
}

// Word terms interned to ids for the batch paths.
struct Interned {
  std::vector<std::vector<std::string>> raw;
  std::vector<std::vector<std::uint32_t>> ids;  // sorted unique
};

Interned intern(std::span<const SentenceRecord> records, std::unordered_map<std::string, std::uint32_t>& vocab) {
  Interned out;
  for (const auto& r : records) {
    auto terms = word_terms(r);
    std::vector<std::uint32_t> ids;
    for (const auto& t : terms) {
      auto [it, _] = vocab.try_emplace(t, static_cast<std::uint32_t>(vocab.size()));
      ids.push_back(it->second);
    }
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
    out.raw.push_back(std::move(terms));
    out.ids.push_back(std::move(ids));
  }
  return out;
}

std::size_t common_count(const std::vector<std::uint32_t>& a, const std::vector<std::uint32_t>& b) {
  std::size_t n = 0;
  for (std::size_t i = 0, j = 0; i < a.size() && j < b.size();) {
    if (a[i] < b[j]) {
      ++i;
    } else if (b[j] < a[i]) {
      ++j;
    } else {
      ++n, ++i, ++j;
    }
  }
  return n;
}

}  // namespace

std::vector<std::vector<double>> PairMatcher::score_matrix(std::span<const SentenceRecord> as,
                                                           std::span<const SentenceRecord> bs) const {
  return parallel_rows(bs.size(), as.size(), [&](std::size_t b, std::size_t a) { return match(as[a], bs[b]); });
}

std::vector<std::vector<double>> TokenOverlapMatcher::score_matrix(std::span<const SentenceRecord> as,
                                                                   std::span<const SentenceRecord> bs) const {
  std::unordered_map<std::string, std::uint32_t> vocab;
  const auto ia = intern(as, vocab);
  const auto ib = intern(bs, vocab);
  return parallel_rows(bs.size(), as.size(), [&](std::size_t b, std::size_t a) {
    const auto& x = ia.ids[a];
    const auto& y = ib.ids[b];
    if (x.empty() || y.empty()) return ia.raw[a] == ib.raw[b] ? 1.0 : 0.0;
    return static_cast<double>(common_count(x, y)) /
           std::sqrt(static_cast<double>(x.size()) * static_cast<double>(y.size()));
  });
}

std::vector<std::vector<double>> TfidfCosineMatcher::score_matrix(std::span<const SentenceRecord> as,
                                                                  std::span<const SentenceRecord> bs) const {
  // Same arithmetic as match(): weights summed in term order.
  using Sparse = std::vector<std::pair<std::string, double>>;
  auto vectors = [&](std::span<const SentenceRecord> rs, std::vector<std::vector<std::string>>& raw) {
    std::vector<Sparse> out;
    for (const auto& r : rs) {
      raw.push_back(word_terms(r));
      auto v = vector_of(raw.back());
      out.emplace_back(v.begin(), v.end());
    }
    return out;
  };
  std::vector<std::vector<std::string>> ra, rb;
  const auto va = vectors(as, ra);
  const auto vb = vectors(bs, rb);
  return parallel_rows(bs.size(), as.size(), [&](std::size_t b, std::size_t a) {
    if (ra[a] == rb[b]) return 1.0;
    // match(a, b) iterates a's terms in order and looks them up in b
    double dot = 0;
    const auto& x = va[a];
    const auto& y = vb[b];
    for (std::size_t i = 0, j = 0; i < x.size() && j < y.size();) {
      if (x[i].first < y[j].first) {
        ++i;
      } else if (y[j].first < x[i].first) {
        ++j;
      } else {
        dot += x[i].second * y[j].second;
        ++i, ++j;
      }
    }
    return std::clamp(dot, 0.0, 1.0);
  });
}

MatchTable match_matrix(std::span<const SentenceRecord> sentences, std::span<const SentenceRecord> candidates,
                        const PairMatcher& matcher) {
  if (sentences.empty() || candidates.empty()) throw Error("kpa.empty", "match_matrix needs sentences and candidates");
  MatchTable t;
  t.scores = matcher.score_matrix(sentences, candidates);
  t.redundancy = matcher.score_matrix(candidates, candidates);
  for (std::size_t c = 0; c < candidates.size(); ++c) t.redundancy[c][c] = 1.0;
  return t;
}

std::vector<std::size_t> greedy_select(const MatchTable& table, const KpaParams& params) {
  const auto nc = table.candidates();
  const auto ns = table.sentences();
  std::vector<std::size_t> selected;
  std::vector<bool> covered(ns, false), taken(nc, false);

  std::vector<double> mass(nc, 0.0);
  for (std::size_t c = 0; c < nc; ++c) {
    for (double v : table.scores[c]) {
      if (v >= params.tau) mass[c] += v;
    }
  }

  while (selected.size() < params.k_max) {
    std::optional<std::size_t> best;
    std::size_t best_gain = 0;
    for (std::size_t c = 0; c < nc; ++c) {
      if (taken[c]) continue;
      bool dup = false;
      for (auto k : selected) {
        if (table.redundancy[c][k] >= params.tau_dup) dup = true;
      }
      if (dup) continue;
      std::size_t gain = 0;
      for (std::size_t s = 0; s < ns; ++s) gain += !covered[s] && table.scores[c][s] >= params.tau;
      if (!best || gain > best_gain || (gain == best_gain && mass[c] > mass[*best])) {
        best = c;
        best_gain = gain;
      }
    }
    if (!best || best_gain < params.delta) break;
    selected.push_back(*best);
    taken[*best] = true;
    for (std::size_t s = 0; s < ns; ++s) {
      if (table.scores[*best][s] >= params.tau) covered[s] = true;
    }
  }
  return selected;
}

Assignment assign(const MatchTable& table, std::span<const std::size_t> selected, double tau,
                  std::span<const SentenceRecord> sentences, std::span<const std::string> key_point_texts,
                  bool multi_match) {
  Assignment out;
  const auto ns = sentences.size();
  out.sentence_to_key_point.assign(ns, std::nullopt);
  std::vector<KeyPoint> kps(selected.size());
  for (std::size_t k = 0; k < selected.size(); ++k) kps[k].text = key_point_texts[k];

  std::size_t assigned = 0;
  for (std::size_t s = 0; s < ns; ++s) {
    std::optional<std::size_t> best;
    for (std::size_t k = 0; k < selected.size(); ++k) {
      const double v = table.scores[selected[k]][s];
      if (v < tau) continue;
      if (multi_match) kps[k].matches.push_back({sentences[s].id, sentences[s].text, v});
      // equal scores go to the smaller text, so the pick does not depend on
      // the order key points were listed in
      const double b = best ? table.scores[selected[*best]][s] : 0.0;
      if (!best || v > b || (v == b && key_point_texts[k] < key_point_texts[*best])) best = k;
    }
    if (!best) continue;
    ++assigned;
    out.sentence_to_key_point[s] = *best;
    if (!multi_match) kps[*best].matches.push_back({sentences[s].id, sentences[s].text, table.scores[selected[*best]][s]});
  }

  for (auto& kp : kps) {
    std::stable_sort(kp.matches.begin(), kp.matches.end(), [](const Match& a, const Match& b) {
      return a.score != b.score ? a.score > b.score : a.sentence_id < b.sentence_id;
    });
    kp.salience = kp.matches.size();
  }
  // Selection order breaks salience ties, so the map stays index-stable.
  std::vector<std::size_t> order(kps.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return kps[a].salience > kps[b].salience; });
  std::vector<std::size_t> rank(kps.size());
  for (std::size_t r = 0; r < order.size(); ++r) {
    rank[order[r]] = r;
    out.summary.key_points.push_back(std::move(kps[order[r]]));
  }
  for (auto& a : out.sentence_to_key_point) {
    if (a) a = rank[*a];
  }
  out.summary.total_sentences = ns;
  out.summary.coverage = ns ? static_cast<double>(assigned) / static_cast<double>(ns) : 0.0;
  return out;
}

namespace {

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

std::vector<SentenceRecord> comment_sentences(std::span<const Comment> comments) {
  std::vector<SentenceRecord> out;
  for (const auto& c : comments) {
    std::size_t n = 0;
    for (auto& s : text::split_sentences(c.text)) {
      auto rec = text::make_record(c.id + "." + std::to_string(++n), std::move(s));
      if (text::word_count(rec.tokens) == 0) continue;
      out.push_back(std::move(rec));
    }
  }
  std::vector<std::uint64_t> keys;
  std::vector<std::size_t> order(out.size());
  std::iota(order.begin(), order.end(), 0);
  for (const auto& s : out) keys.push_back(fnv1a(s.text));
  std::sort(order.begin(), order.end(), [&](auto a, auto b) {
    if (keys[a] != keys[b]) return keys[a] < keys[b];
    if (out[a].text != out[b].text) return out[a].text < out[b].text;
    return out[a].id < out[b].id;
  });
  std::vector<SentenceRecord> sorted;
  sorted.reserve(out.size());
  for (auto i : order) sorted.push_back(std::move(out[i]));
  return sorted;
}

KeyPointSummary run_kpa(std::span<const Comment> comments, const KpaParams& params, const PairMatcher& matcher,
                        const scorers::ScorerRegistry& registry) {
  validate(params);
  if (comments.empty()) throw Error("kpa.empty", "no comments given");
  const auto sentences = comment_sentences(comments);
  if (sentences.empty()) throw Error("kpa.empty", "comments contain no sentences");

  auto fitted = matcher.fit(sentences);
  const PairMatcher& m = fitted ? *fitted : matcher;

  if (params.given_key_points) {
    std::vector<SentenceRecord> kps;
    for (std::size_t i = 0; i < params.given_key_points->size(); ++i) {
      kps.push_back(text::make_record("kp" + std::to_string(i + 1), (*params.given_key_points)[i]));
    }
    const auto table = match_matrix(sentences, kps, m);
    std::vector<std::size_t> all(kps.size());
    std::iota(all.begin(), all.end(), 0);
    auto out = assign(table, all, params.tau, sentences, *params.given_key_points, params.multi_match).summary;
    out.candidate_count = kps.size();
    return out;
  }

  std::vector<SentenceRecord> candidates;
  for (const auto& s : sentences) {
    const auto words = text::word_count(s.tokens);
    if (words < params.min_tokens || words > params.max_tokens) continue;
    if (registry.quality->score(s) < params.q_min) continue;
    candidates.push_back(s);
  }
  if (candidates.empty()) {
    throw Error("kpa.no_candidates",
                "no sentence passed the length and quality filters; lower q_min or widen the length window",
                ErrorKind::semantic);
  }
  const auto table = match_matrix(sentences, candidates, m);
  const auto selected = greedy_select(table, params);
  std::vector<std::string> texts;
  for (auto c : selected) texts.push_back(candidates[c].text);
  auto out = assign(table, selected, params.tau, sentences, texts, params.multi_match).summary;
  out.candidate_count = candidates.size();
  return out;
}

KeyPointSummary run_kpa(const std::vector<std::string>& comments, const KpaParams& params, const PairMatcher& matcher,
                        const scorers::ScorerRegistry& registry) {
  std::vector<Comment> cs;
  for (std::size_t i = 0; i < comments.size(); ++i) cs.push_back({"c" + std::to_string(i + 1), comments[i]});
  return run_kpa(cs, params, matcher, registry);
}

std::vector<SalienceShift> compare_over_time(const KeyPointSummary& base, std::span<const Comment> comments_new,
                                             KpaParams params, const PairMatcher& matcher,
                                             const scorers::ScorerRegistry& registry) {
  if (base.key_points.empty()) throw Error("kpa.invalid", "base summary has no key points");
  std::vector<std::string> texts;
  for (const auto& kp : base.key_points) texts.push_back(kp.text);
  params.given_key_points = texts;
  const auto now = run_kpa(comments_new, params, matcher, registry);
  std::vector<SalienceShift> out;
  for (const auto& kp : base.key_points) {
    std::size_t fresh = 0;
    for (const auto& n : now.key_points) {
      if (n.text == kp.text) fresh = n.salience;
    }
    out.push_back({kp.text, kp.salience, fresh});
  }
  return out;
}

std::string summary_json(const KeyPointSummary& s) {
  nlohmann::ordered_json j;
  auto kps = nlohmann::ordered_json::array();
  for (const auto& kp : s.key_points) {
    auto matches = nlohmann::ordered_json::array();
    for (const auto& m : kp.matches) {
      matches.push_back({{"sentence_id", m.sentence_id}, {"text", m.text}, {"score", m.score}});
    }
    kps.push_back({{"text", kp.text}, {"salience", kp.salience}, {"matches", std::move(matches)}});
  }
  j["key_points"] = std::move(kps);
  j["coverage"] = s.coverage;
  j["total_sentences"] = s.total_sentences;
  j["candidate_count"] = s.candidate_count;
  return j.dump(2);
}

std::string summary_report(const KeyPointSummary& s, std::size_t top_matches) {
  char buf[128];
  std::snprintf(buf, sizeof buf, "Coverage: %.1f%% (%zu of %zu sentences)\n", 100.0 * s.coverage,
                static_cast<std::size_t>(std::llround(s.coverage * static_cast<double>(s.total_sentences))),
                s.total_sentences);
  std::string out = buf;
  for (std::size_t i = 0; i < s.key_points.size(); ++i) {
    const auto& kp = s.key_points[i];
    out += "\n" + std::to_string(i + 1) + ". [" + std::to_string(kp.salience) + "] " + kp.text + "\n";
    for (std::size_t m = 0; m < kp.matches.size() && m < top_matches; ++m) {
      std::snprintf(buf, sizeof buf, "     %.2f  ", kp.matches[m].score);
      out += buf + kp.matches[m].text + "\n";
    }
  }
  return out;
}

}  // namespace debater::kpa
