#include "debater/narrative.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <set>

#include "debater/bundled.hpp"
#include "debater/cluster.hpp"
#include "debater/error.hpp"
#include "debater/themes.hpp"
#include "debater/wikify.hpp"
#include "json.hpp"

namespace debater::narrative {

using scorers::Stance;

void validate(const NarrativeParams& p) {
  if (p.paragraphs < 1) throw Error("narrative.invalid", "paragraphs must be >= 1");
  if (p.args_per_paragraph < 1) throw Error("narrative.invalid", "args_per_paragraph must be >= 1");
  if (p.top_n_quality < 1) throw Error("narrative.invalid", "top_n_quality must be >= 1");
  if (!(p.min_stance_confidence >= 0.0 && p.min_stance_confidence <= 1.0)) {
    throw Error("narrative.invalid", "min_stance_confidence must lie in [0, 1]");
  }
  if (p.restarts < 1) throw Error("narrative.invalid", "restarts must be >= 1");
  if (p.mode == Mode::kpa) kpa::validate(p.kpa);
}

Templates Templates::parse(std::string_view json) {
  try {
    const auto j = nlohmann::json::parse(json);
    Templates t;
    t.opening_pro = j.at("opening").at("pro").get<std::string>();
    t.opening_con = j.at("opening").at("con").get<std::string>();
    t.closing_pro = j.at("closing").at("pro").get<std::string>();
    t.closing_con = j.at("closing").at("con").get<std::string>();
    t.connectives = j.at("connectives").get<std::vector<std::string>>();
    if (t.connectives.empty()) throw Error("narrative.templates", "connective list is empty");
    return t;
  } catch (const nlohmann::json::exception& e) {
    throw Error("narrative.templates", std::string("bad template file: ") + e.what());
  }
}

const Templates& Templates::bundled() {
  static const Templates t = parse(bundled::file("data/narrative/templates.json"));
  return t;
}

DiscourseMarkers DiscourseMarkers::parse(std::string_view contents) {
  DiscourseMarkers d;
  for (const auto& line : text::data_lines(contents)) {
    auto m = text::lowercase(text::collapse_whitespace(text::trim(line)));
    if (!m.empty()) d.markers.push_back(std::move(m));
  }
  std::stable_sort(d.markers.begin(), d.markers.end(), [](const auto& a, const auto& b) { return a.size() > b.size(); });
  return d;
}

const DiscourseMarkers& DiscourseMarkers::bundled() {
  static const DiscourseMarkers d = parse(bundled::file("data/lexicon/discourse_markers.txt"));
  return d;
}

namespace {

bool is_terminal(char32_t c) { return c == U'.' || c == U'!' || c == U'?' || c == U'…'; }
bool is_closer(char32_t c) {
  return c == U'"' || c == U'\'' || c == U')' || c == U']' || c == U'”' || c == U'’' || c == U'»';
}

}  // namespace

std::string cleanup_rephrase(std::string_view input, const DiscourseMarkers& markers) {
  std::string s = text::trim(text::collapse_whitespace(input));
  for (bool stripped = true; stripped && !s.empty();) {
    stripped = false;
    const auto cps = text::decode_utf8(s);
    for (const auto& m : markers.markers) {
      const auto mlen = text::codepoint_length(m);
      if (mlen > cps.size()) continue;
      if (mlen < cps.size() && cps[mlen] != U' ') continue;
      const auto head = std::u32string_view(cps).substr(0, mlen);
      if (text::lowercase(text::encode_utf8(head)) != m) continue;
      s = text::trim(text::encode_utf8(std::u32string_view(cps).substr(mlen)));
      stripped = true;
      break;
    }
  }
  if (s.empty()) throw Error("narrative.empty_argument", "argument is empty after cleanup");
  s = text::capitalize_first(s);
  auto cps = text::decode_utf8(s);
  std::size_t end = cps.size();
  while (end > 0 && is_closer(cps[end - 1])) --end;
  if (end == 0 || !is_terminal(cps[end - 1])) s += ".";
  return s;
}

namespace {

struct Candidate {
  std::size_t index;
  double quality;
};

std::string fill(const std::string& tmpl, const std::string& topic) {
  std::string out = tmpl;
  const std::string key = "{topic}";
  for (auto pos = out.find(key); pos != std::string::npos; pos = out.find(key, pos + topic.size())) {
    out.replace(pos, key.size(), topic);
  }
  return out;
}

// Topic text without trailing terminal punctuation, for interpolation.
std::string topic_phrase(const std::string& text) {
  auto cps = text::decode_utf8(text::trim(text));
  while (!cps.empty() && is_terminal(cps.back())) cps.pop_back();
  return text::encode_utf8(cps);
}

std::string title_words(std::string title) {
  std::replace(title.begin(), title.end(), '_', ' ');
  return title;
}

std::vector<Paragraph> plan_kpa(const std::vector<std::string>& arguments, const std::vector<Candidate>& kept,
                                const NarrativeParams& params, const scorers::ScorerRegistry& registry,
                                const kpa::PairMatcher& matcher) {
  std::vector<kpa::Comment> comments;
  std::map<std::string, const Candidate*> by_id;
  for (const auto& c : kept) {
    comments.push_back({"a" + std::to_string(c.index), arguments[c.index]});
    by_id["a" + std::to_string(c.index)] = &c;
  }
  auto summary = kpa::run_kpa(comments, params.kpa, matcher, registry);
  if (summary.key_points.empty()) {
    throw Error("narrative.no_key_points", "key point analysis selected no key points; lower tau or delta",
                ErrorKind::semantic);
  }

  // Prominence: salience, then aggregate match mass, then text.
  std::vector<std::pair<double, const kpa::KeyPoint*>> ranked;
  for (const auto& kp : summary.key_points) {
    double mass = 0;
    for (const auto& m : kp.matches) mass += m.score;
    ranked.emplace_back(mass, &kp);
  }
  std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    if (a.second->salience != b.second->salience) return a.second->salience > b.second->salience;
    if (a.first != b.first) return a.first > b.first;
    return a.second->text < b.second->text;
  });

  std::vector<Paragraph> out;
  std::set<std::size_t> used;
  std::set<std::string> used_text;
  for (const auto& [mass, kp] : ranked) {
    if (out.size() >= params.paragraphs) break;
    // argument -> best sentence score under this key point
    std::map<std::size_t, double> best;
    for (const auto& m : kp->matches) {
      const auto dot = m.sentence_id.rfind('.');
      const auto* c = by_id.at(m.sentence_id.substr(0, dot));
      auto& b = best[c->index];
      b = std::max(b, m.score);
    }
    std::vector<std::pair<double, const Candidate*>> args;
    for (const auto& [idx, score] : best) {
      const auto it = std::find_if(kept.begin(), kept.end(), [&](const Candidate& c) { return c.index == idx; });
      args.emplace_back(score * it->quality, &*it);
    }
    std::stable_sort(args.begin(), args.end(), [](const auto& a, const auto& b) {
      return a.first != b.first ? a.first > b.first : a.second->index < b.second->index;
    });
    Paragraph p;
    p.header = text::trim(kp->text);
    for (const auto& [score, c] : args) {
      if (p.arguments.size() >= params.args_per_paragraph) break;
      if (used.contains(c->index)) continue;
      auto cleaned = cleanup_rephrase(arguments[c->index]);
      if (!used_text.insert(cleaned).second) continue;
      used.insert(c->index);
      p.arguments.push_back(std::move(cleaned));
      p.sources.push_back(c->index);
    }
    if (!p.arguments.empty()) out.push_back(std::move(p));
  }
  return out;
}

std::vector<Paragraph> plan_clustering(const std::vector<std::string>& arguments, const std::vector<Candidate>& kept,
                                       const NarrativeParams& params) {
  std::vector<text::SentenceRecord> records;
  std::vector<std::vector<std::string>> docs;
  std::vector<const Candidate*> members;
  for (const auto& c : kept) {
    auto terms = cluster::bow_terms(arguments[c.index]);
    if (terms.empty()) continue;  // nothing to cluster on
    auto rec = text::make_record("a" + std::to_string(c.index), arguments[c.index]);
    wikify::annotate_concepts(rec, wikify::bundled_lexicon());
    records.push_back(std::move(rec));
    docs.push_back(std::move(terms));
    members.push_back(&c);
  }
  if (docs.empty()) throw Error("narrative.no_arguments", "no argument has clusterable words", ErrorKind::semantic);

  const auto matrix = cluster::build_bow(docs, 1, 1.0);
  cluster::SibParams sp;
  sp.k = std::min(params.paragraphs, docs.size());
  sp.restarts = params.restarts;
  sp.seed = params.seed;
  const auto part = cluster::sib_cluster(matrix, sp);
  wikify::JaccardRelatedness rel;
  const auto themes = themes::extract_themes(part.assignment, sp.k, records, rel, themes::ThemeParams{});

  std::vector<std::vector<std::size_t>> clusters(sp.k);
  for (std::size_t i = 0; i < part.assignment.size(); ++i) clusters[static_cast<std::size_t>(part.assignment[i])].push_back(i);
  std::vector<std::size_t> order(sp.k);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return clusters[a].size() > clusters[b].size(); });

  std::vector<Paragraph> out;
  std::set<std::string> used_text;
  for (auto k : order) {
    if (clusters[k].empty()) continue;
    Paragraph p;
    if (!themes[k].themes.empty()) {
      p.header = title_words(themes[k].themes.front().concept_title);
    } else {
      // most frequent concept in the cluster, else its most frequent word
      std::map<std::string, std::size_t> counts;
      for (auto i : clusters[k]) {
        auto it = records[i].layers.find(std::string(text::kConceptLayer));
        if (it == records[i].layers.end()) continue;
        std::set<std::string> seen;
        for (const auto& sp2 : it->second) {
          if (seen.insert(sp2.tag).second) ++counts[sp2.tag];
        }
      }
      if (counts.empty()) {
        for (auto i : clusters[k]) {
          for (const auto& t : docs[i]) ++counts[t];
        }
      }
      auto top = std::max_element(counts.begin(), counts.end(),
                                  [](const auto& a, const auto& b) { return a.second < b.second; });
      p.header = title_words(top->first);
    }
    auto idx = clusters[k];
    std::stable_sort(idx.begin(), idx.end(), [&](auto a, auto b) {
      if (members[a]->quality != members[b]->quality) return members[a]->quality > members[b]->quality;
      return members[a]->index < members[b]->index;
    });
    for (auto i : idx) {
      if (p.arguments.size() >= params.args_per_paragraph) break;
      auto cleaned = cleanup_rephrase(arguments[members[i]->index]);
      if (!used_text.insert(cleaned).second) continue;
      p.arguments.push_back(std::move(cleaned));
      p.sources.push_back(members[i]->index);
    }
    if (!p.arguments.empty()) out.push_back(std::move(p));
    if (out.size() >= params.paragraphs) break;
  }
  return out;
}

}  // namespace

Speech generate_narrative(const scorers::Topic& topic, const std::vector<std::string>& arguments,
                          const NarrativeParams& params, const scorers::ScorerRegistry& registry,
                          const kpa::PairMatcher& matcher, const Templates& templates) {
  validate(params);
  scorers::validate(topic);
  if (arguments.empty()) throw Error("narrative.empty", "no arguments given");

  std::vector<Candidate> kept;
  for (std::size_t i = 0; i < arguments.size(); ++i) {
    const auto rec = text::make_record("a" + std::to_string(i), arguments[i]);
    if (text::word_count(rec.tokens) == 0) continue;
    try {
      const auto label = registry.stance->classify(rec, topic);
      if (label.label != params.stance || label.confidence < params.min_stance_confidence) continue;
    } catch (const Error& e) {
      if (e.code() == "stance.abstain") continue;
      throw;
    }
    kept.push_back({i, registry.quality->score(rec)});
  }
  if (kept.empty()) throw Error("narrative.no_arguments", "no arguments with requested stance", ErrorKind::semantic);

  std::stable_sort(kept.begin(), kept.end(), [](const Candidate& a, const Candidate& b) {
    return a.quality != b.quality ? a.quality > b.quality : a.index < b.index;
  });
  if (kept.size() > params.top_n_quality) kept.resize(params.top_n_quality);
  std::sort(kept.begin(), kept.end(), [](const Candidate& a, const Candidate& b) { return a.index < b.index; });

  Speech s;
  s.paragraphs = params.mode == Mode::kpa ? plan_kpa(arguments, kept, params, registry, matcher)
                                          : plan_clustering(arguments, kept, params);
  const auto phrase = topic_phrase(topic.text);
  const bool pro = params.stance == Stance::pro;
  s.opening = fill(pro ? templates.opening_pro : templates.opening_con, phrase);
  s.closing = fill(pro ? templates.closing_pro : templates.closing_con, phrase);

  s.full_text = s.opening;
  for (std::size_t i = 0; i < s.paragraphs.size(); ++i) {
    s.full_text += "\n\n" + templates.connectives[i % templates.connectives.size()];
    for (const auto& a : s.paragraphs[i].arguments) s.full_text += " " + a;
  }
  s.full_text += "\n\n" + s.closing + "\n";
  return s;
}

std::string speech_json(const Speech& s) {
  nlohmann::ordered_json j;
  j["opening"] = s.opening;
  auto ps = nlohmann::ordered_json::array();
  for (const auto& p : s.paragraphs) ps.push_back({{"header", p.header}, {"arguments", p.arguments}});
  j["paragraphs"] = std::move(ps);
  j["closing"] = s.closing;
  j["full_text"] = s.full_text;
  return j.dump(2);
}

}  // namespace debater::narrative
