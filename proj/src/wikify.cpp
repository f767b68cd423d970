#include "debater/wikify.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>
#include <unordered_set>

#include "debater/bundled.hpp"
#include "debater/error.hpp"

namespace debater::wikify {

struct ConceptLexicon::TrieNode {
  std::unordered_map<std::string, std::unique_ptr<TrieNode>> children;
  std::vector<std::size_t> entries;
};

ConceptLexicon::ConceptLexicon() : root_(std::make_unique<TrieNode>()) {}
ConceptLexicon::ConceptLexicon(ConceptLexicon&&) noexcept = default;
ConceptLexicon& ConceptLexicon::operator=(ConceptLexicon&&) noexcept = default;
ConceptLexicon::~ConceptLexicon() = default;

const ConceptLexicon::Entry* ConceptLexicon::find(std::string_view surface) const {
  auto it = by_surface_.find(std::string(surface));
  return it == by_surface_.end() ? nullptr : &entries_[it->second];
}

std::string normalize_surface(std::string_view surface) {
  std::string s(surface);
  std::replace(s.begin(), s.end(), '_', ' ');
  return text::collapse_whitespace(text::nfc(s));
}

namespace {

std::string join(const std::vector<std::string>& parts, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

std::string folded_key(const std::vector<std::string>& tokens) {
  std::string key;
  for (const auto& t : tokens) {
    key += text::casefold(t);
    key.push_back('\x1f');
  }
  return key;
}

}  // namespace

ConceptLexicon load_lexicon(const std::vector<SurfaceRecord>& titles, const std::vector<SurfaceRecord>& redirects,
                            const std::vector<std::string>& blocklist) {
  ConceptLexicon lex;

  // Pages are identified by normalised name; the canonical display form is the
  // title record's target as written.
  std::map<std::string, std::string> title_display;
  for (const auto& r : titles) {
    auto key = normalize_surface(r.target);
    title_display.emplace(key, r.target);
  }
  std::map<std::string, std::pair<std::string, std::string>> redirect_of;  // key -> (raw source, raw target)
  for (const auto& r : redirects) {
    auto key = normalize_surface(r.surface);
    if (key == normalize_surface(r.target)) continue;  // identity after normalisation
    auto [it, inserted] = redirect_of.emplace(key, std::make_pair(r.surface, r.target));
    if (!inserted && normalize_surface(it->second.second) != normalize_surface(r.target)) {
      throw Error("lexicon.conflict", "surface '" + r.surface + "' redirects to both '" + it->second.second +
                                          "' and '" + r.target + "'");
    }
  }

  std::map<std::string, std::string> resolved;  // page key -> canonical display
  auto resolve = [&](const std::string& raw) -> std::string {
    std::string key = normalize_surface(raw);
    if (auto hit = resolved.find(key); hit != resolved.end()) return hit->second;
    std::vector<std::string> path_keys;
    std::vector<std::string> path_raw;
    std::string current_raw = raw;
    while (true) {
      if (auto hit = resolved.find(key); hit != resolved.end()) {
        for (const auto& k : path_keys) resolved[k] = hit->second;
        return hit->second;
      }
      auto seen = std::find(path_keys.begin(), path_keys.end(), key);
      if (seen != path_keys.end()) {
        std::vector<std::string> cycle(path_raw.begin() + (seen - path_keys.begin()), path_raw.end());
        throw Error("lexicon.cycle", "redirect cycle: " + join(cycle, ","));
      }
      auto red = redirect_of.find(key);
      if (red == redirect_of.end()) {
        auto title = title_display.find(key);
        if (title == title_display.end()) {
          throw Error("lexicon.dangling", "redirect chain from '" + raw + "' ends at '" + current_raw +
                                              "', which is not a title");
        }
        path_keys.push_back(key);
        for (const auto& k : path_keys) resolved[k] = title->second;
        return title->second;
      }
      path_keys.push_back(key);
      path_raw.push_back(red->second.first);
      current_raw = red->second.second;
      key = normalize_surface(current_raw);
    }
  };

  std::unordered_set<std::string> blocked;
  for (const auto& b : blocklist) blocked.insert(text::casefold(normalize_surface(b)));

  std::map<std::string, std::size_t> folded_multi;  // folded key of multi-token surfaces -> entry
  auto add_surface = [&](const std::string& raw_surface, const std::string& target_title, bool via_redirect) {
    ConceptLexicon::Entry entry;
    entry.surface = normalize_surface(raw_surface);
    for (auto& t : text::tokenize(entry.surface)) entry.tokens.push_back(std::move(t.surface));
    if (entry.tokens.empty()) {
      throw Error("lexicon.invalid", "surface '" + raw_surface + "' has no tokens");
    }
    entry.concept_title = target_title;
    entry.via_redirect = via_redirect;
    entry.case_sensitive_only = entry.tokens.size() == 1;
    entry.blocked = blocked.contains(text::casefold(entry.surface));

    if (auto it = lex.by_surface_.find(entry.surface); it != lex.by_surface_.end()) {
      auto& existing = lex.entries_[it->second];
      if (existing.concept_title != target_title) {
        throw Error("lexicon.conflict", "surface '" + entry.surface + "' maps to both '" +
                                            existing.concept_title + "' and '" + target_title + "'");
      }
      existing.via_redirect = existing.via_redirect && via_redirect;
      return;
    }
    const auto key = folded_key(entry.tokens);
    if (entry.tokens.size() > 1) {
      if (auto it = folded_multi.find(key); it != folded_multi.end() &&
                                             lex.entries_[it->second].concept_title != target_title) {
        throw Error("lexicon.conflict", "surface '" + entry.surface + "' maps to both '" +
                                            lex.entries_[it->second].concept_title + "' and '" + target_title + "'");
      }
      folded_multi.emplace(key, lex.entries_.size());
    }

    ConceptLexicon::TrieNode* node = lex.root_.get();
    for (const auto& t : entry.tokens) {
      auto& child = node->children[text::casefold(t)];
      if (!child) child = std::make_unique<ConceptLexicon::TrieNode>();
      node = child.get();
    }
    node->entries.push_back(lex.entries_.size());
    lex.max_tokens_ = std::max(lex.max_tokens_, entry.tokens.size());
    lex.by_surface_.emplace(entry.surface, lex.entries_.size());
    lex.entries_.push_back(std::move(entry));
  };

  for (const auto& r : titles) {
    const auto target_title = resolve(r.target);
    add_surface(r.surface, target_title, target_title != r.target);
  }
  for (const auto& r : redirects) add_surface(r.surface, resolve(r.surface), true);

  lex.title_count_ = title_display.size();
  lex.redirect_count_ = redirect_of.size();
  return lex;
}

std::vector<SurfaceRecord> parse_surface_tsv(std::string_view contents) {
  std::vector<SurfaceRecord> out;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < contents.size()) {
    auto nl = contents.find('\n', pos);
    if (nl == std::string_view::npos) nl = contents.size();
    std::string line(contents.substr(pos, nl - pos));
    pos = nl + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    auto tab = line.find('\t');
    if (tab == std::string::npos) {
      out.push_back({line, line});
      continue;
    }
    if (line.find('\t', tab + 1) != std::string::npos) {
      throw Error("lexicon.format", "line " + std::to_string(line_no) + ": expected two tab-separated columns");
    }
    out.push_back({line.substr(0, tab), line.substr(tab + 1)});
  }
  return out;
}

std::vector<SurfaceRecord> read_surface_tsv(std::istream& in) {
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_surface_tsv(ss.str());
}

std::vector<std::string> parse_word_list(std::string_view contents) {
  std::vector<std::string> out;
  for (auto& line : text::data_lines(contents)) out.push_back(text::trim(line));
  return out;
}

const ConceptLexicon& bundled_lexicon() {
  static const ConceptLexicon lex = load_lexicon(parse_surface_tsv(bundled::file("data/lexicon/titles.tsv")),
                                                 parse_surface_tsv(bundled::file("data/lexicon/redirects.tsv")),
                                                 parse_word_list(bundled::file("data/lexicon/blocklist.txt")));
  return lex;
}

std::vector<ConceptMention> wikify(const text::SentenceRecord& sentence, const ConceptLexicon& lexicon) {
  std::vector<ConceptMention> out;
  const auto& toks = sentence.tokens;
  const std::size_t n = toks.size();
  if (n == 0) return out;
  std::vector<std::string> exact(n), folded(n);
  for (std::size_t i = 0; i < n; ++i) {
    exact[i] = text::nfc(toks[i].surface);
    folded[i] = text::casefold(exact[i]);
  }

  std::vector<const ConceptLexicon::TrieNode*> path;
  std::size_t i = 0;
  while (i < n) {
    path.clear();
    const ConceptLexicon::TrieNode* node = lexicon.root_.get();
    for (std::size_t j = i; j < n && j - i < lexicon.max_tokens_; ++j) {
      auto it = node->children.find(folded[j]);
      if (it == node->children.end()) break;
      node = it->second.get();
      path.push_back(node);
    }

    const ConceptLexicon::Entry* match = nullptr;
    std::size_t length = 0;
    for (std::size_t d = path.size(); d >= 1 && !match; --d) {
      const auto& ids = path[d - 1]->entries;
      if (ids.empty()) continue;
      if (d > 1) {
        for (auto id : ids) {
          if (!lexicon.entries_[id].blocked) {
            match = &lexicon.entries_[id];
            break;
          }
        }
      } else {
        const ConceptLexicon::Entry* exact_hit = nullptr;
        std::set<std::string> targets;
        const ConceptLexicon::Entry* any = nullptr;
        for (auto id : ids) {
          const auto& e = lexicon.entries_[id];
          if (e.blocked) continue;
          if (e.tokens[0] == exact[i]) exact_hit = &e;
          targets.insert(e.concept_title);
          any = &e;
        }
        if (exact_hit) {
          match = exact_hit;
        } else if (text::starts_uppercase(exact[i]) && targets.size() == 1) {
          match = any;
        }
      }
      if (match) length = d;
    }

    if (match) {
      ConceptMention m;
      m.concept_title = match->concept_title;
      m.first_token = i;
      m.last_token = i + length - 1;
      m.surface = text::slice(sentence.text, toks[i].start, toks[i + length - 1].end);
      m.via_redirect = match->via_redirect;
      out.push_back(std::move(m));
      i += length;
    } else {
      ++i;
    }
  }
  return out;
}

void annotate_concepts(text::SentenceRecord& sentence, const ConceptLexicon& lexicon) {
  auto& layer = sentence.layers[std::string(text::kConceptLayer)];
  layer.clear();
  for (const auto& m : wikify(sentence, lexicon)) {
    layer.push_back({m.first_token, m.last_token, m.concept_title});
  }
}

double relatedness_baseline(std::string_view a, std::string_view b) {
  if (text::trim(a).empty() || text::trim(b).empty()) {
    throw Error("relatedness.empty", "concept titles must be non-empty");
  }
  auto tokens = [](std::string_view title) {
    std::string s = text::lowercase(title);
    std::replace(s.begin(), s.end(), '_', ' ');
    std::set<std::string> out;
    std::istringstream in(s);
    for (std::string t; in >> t;) out.insert(t);
    return out;
  };
  const auto ta = tokens(a), tb = tokens(b);
  std::size_t inter = 0;
  for (const auto& t : ta) inter += tb.contains(t);
  const std::size_t uni = ta.size() + tb.size() - inter;
  return uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

}  // namespace debater::wikify
