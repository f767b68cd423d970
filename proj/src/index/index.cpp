#include <algorithm>
#include <unordered_set>

#include "debater/sent_index.hpp"
#include "json.hpp"

namespace debater::index {

SentenceIndex SentenceIndex::build(std::vector<text::SentenceRecord> sentences) {
  std::sort(sentences.begin(), sentences.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
  for (std::size_t i = 1; i < sentences.size(); ++i) {
    if (sentences[i].id == sentences[i - 1].id) {
      throw Error("index.duplicate_id", "duplicate sentence id '" + sentences[i].id + "'");
    }
  }
  if (sentences.size() > std::numeric_limits<std::uint32_t>::max()) {
    throw Error("index.too_large", "too many sentences for one index");
  }
  for (const auto& s : sentences) text::validate(s);

  SentenceIndex idx;
  idx.store_ = std::move(sentences);
  for (std::uint32_t i = 0; i < idx.store_.size(); ++i) idx.index_sentence(i);
  return idx;
}

void SentenceIndex::index_sentence(std::uint32_t ordinal) {
  const auto& s = store_[ordinal];
  std::unordered_map<std::string, std::vector<std::uint32_t>> local;
  std::vector<std::string> order;
  for (std::uint32_t p = 0; p < s.tokens.size(); ++p) {
    auto term = text::lowercase(s.tokens[p].surface);
    auto [it, inserted] = local.try_emplace(term);
    if (inserted) order.push_back(term);
    it->second.push_back(p);
  }
  for (const auto& term : order) postings_[term].push_back({ordinal, std::move(local[term])});
  for (const auto& [name, spans] : s.layers) index_layer(ordinal, name, spans);
}

void SentenceIndex::index_layer(std::uint32_t ordinal, const std::string& name,
                                const std::vector<text::AnnotationSpan>& spans) {
  auto& layer = layers_[name];
  if (spans.empty()) return;
  LayerPosting all{ordinal, {}};
  std::map<std::string, std::vector<TokenSpan>> tagged;
  for (const auto& sp : spans) {
    TokenSpan ts{static_cast<std::uint32_t>(sp.first_token), static_cast<std::uint32_t>(sp.last_token)};
    all.spans.push_back(ts);
    tagged[sp.tag].push_back(ts);
  }
  auto normalise = [](std::vector<TokenSpan>& v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
  };
  normalise(all.spans);
  layer.all.push_back(std::move(all));
  for (auto& [tag, v] : tagged) {
    normalise(v);
    layer.by_tag[tag].push_back({ordinal, std::move(v)});
  }
}

std::span<const TermPosting> SentenceIndex::postings(const std::string& lowercased_term) const {
  auto it = postings_.find(lowercased_term);
  if (it == postings_.end()) return {};
  return it->second;
}

std::vector<std::string> SentenceIndex::layer_names() const {
  std::vector<std::string> out;
  for (const auto& [name, layer] : layers_) out.push_back(name);
  return out;
}

std::span<const LayerPosting> SentenceIndex::layer_postings(const std::string& name) const {
  auto it = layers_.find(name);
  if (it == layers_.end()) return {};
  return it->second.all;
}

std::span<const LayerPosting> SentenceIndex::layer_postings(const std::string& name, const std::string& tag) const {
  auto it = layers_.find(name);
  if (it == layers_.end()) return {};
  auto t = it->second.by_tag.find(tag);
  if (t == it->second.by_tag.end()) return {};
  return t->second;
}

SentenceIndex SentenceIndex::with_lexicon_layer(const std::string& name, const std::vector<std::string>& words) const {
  if (layers_.contains(name)) throw Error("index.layer_exists", "layer '" + name + "' already exists");
  if (name.empty()) throw Error("index.invalid", "layer name must be non-empty");
  std::unordered_set<std::string> lexicon;
  for (const auto& w : words) lexicon.insert(text::lowercase(text::trim(w)));

  SentenceIndex out = *this;
  out.layers_[name];
  for (std::uint32_t i = 0; i < out.store_.size(); ++i) {
    auto& s = out.store_[i];
    auto& spans = s.layers[name];
    for (std::size_t p = 0; p < s.tokens.size(); ++p) {
      auto lower = text::lowercase(s.tokens[p].surface);
      if (lexicon.contains(lower)) spans.push_back({p, p, lower});
    }
    out.index_layer(i, name, spans);
  }
  return out;
}

std::string SentenceIndex::dump_json() const {
  nlohmann::ordered_json j;
  j["sentences"] = store_.size();
  std::vector<std::string> terms;
  terms.reserve(postings_.size());
  for (const auto& [t, p] : postings_) terms.push_back(t);
  std::sort(terms.begin(), terms.end());
  auto& jt = j["postings"] = nlohmann::ordered_json::object();
  for (const auto& t : terms) {
    auto arr = nlohmann::ordered_json::array();
    for (const auto& p : postings_.at(t)) arr.push_back({{"id", store_[p.sentence].id}, {"positions", p.positions}});
    jt[t] = std::move(arr);
  }
  auto& jl = j["layers"] = nlohmann::ordered_json::object();
  for (const auto& [name, layer] : layers_) {
    auto tags = nlohmann::ordered_json::object();
    for (const auto& [tag, posts] : layer.by_tag) {
      auto arr = nlohmann::ordered_json::array();
      for (const auto& p : posts) {
        auto spans = nlohmann::ordered_json::array();
        for (const auto& s : p.spans) spans.push_back({s.first, s.last});
        arr.push_back({{"id", store_[p.sentence].id}, {"spans", std::move(spans)}});
      }
      tags[tag] = std::move(arr);
    }
    jl[name] = std::move(tags);
  }
  return j.dump(2);
}

}  // namespace debater::index
