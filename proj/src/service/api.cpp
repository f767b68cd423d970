#include "debater/api.hpp"

#include <algorithm>
#include <functional>
#include <map>

#include "debater/cluster.hpp"
#include "debater/error.hpp"
#include "debater/schema.hpp"
#include "debater/themes.hpp"
#include "debater/wikify.hpp"

namespace debater::api {

using nlohmann::json;

namespace {

text::SentenceRecord annotated(std::string id, std::string body) {
  auto r = text::make_record(std::move(id), std::move(body));
  wikify::annotate_concepts(r, wikify::bundled_lexicon());
  return r;
}

void require_schema(const std::string& name, const json& body) {
  if (auto e = schema::check(schema::bundled(name + ".request"), body)) {
    throw Error("body.schema", "request does not match schema " + name + ".request: " + *e);
  }
}

template <class T>
T get_or(const json& j, const char* key, T fallback) {
  return j.contains(key) && !j[key].is_null() ? j[key].get<T>() : fallback;
}

const char* stance_name(scorers::Stance s) { return s == scorers::Stance::pro ? "pro" : "con"; }

Json wikify_endpoint(const json& body, const Context&) {
  const auto rec = text::make_record("t", body["text"].get<std::string>());
  auto mentions = Json::array();
  for (const auto& m : wikify::wikify(rec, wikify::bundled_lexicon())) {
    mentions.push_back({{"title", m.concept_title},
                        {"surface", m.surface},
                        {"start", rec.tokens[m.first_token].start},
                        {"end", rec.tokens[m.last_token].end},
                        {"first_token", m.first_token},
                        {"last_token", m.last_token},
                        {"via_redirect", m.via_redirect}});
  }
  return {{"mentions", std::move(mentions)}};
}

Json relatedness_endpoint(const json& body, const Context&) {
  wikify::JaccardRelatedness r;
  return {{"score", r.score(body["a"].get<std::string>(), body["b"].get<std::string>())}};
}

Json cluster_endpoint(const json& body, const Context&) {
  std::vector<std::vector<std::string>> docs;
  for (const auto& d : body["documents"]) docs.push_back(cluster::bow_terms(d.get<std::string>()));
  const auto matrix = cluster::build_bow(docs, get_or<std::size_t>(body, "min_df", 1), get_or(body, "max_df", 1.0));
  const auto k = body["k"].get<std::size_t>();
  const auto restarts = get_or<std::size_t>(body, "restarts", 10);
  const auto seed = get_or<std::uint64_t>(body, "seed", 0);
  const auto algorithm = get_or<std::string>(body, "algorithm", "sib");

  std::vector<int> assignment;
  double objective = 0;
  if (algorithm == "sib") {
    cluster::SibParams p;
    p.k = k;
    p.restarts = restarts;
    p.seed = seed;
    auto part = cluster::sib_cluster(matrix, p);
    assignment = std::move(part.assignment);
    objective = part.objective;
  } else {
    auto r = cluster::kmeans_cluster(matrix, k, restarts, seed);
    assignment = std::move(r.partition.assignment);
    objective = r.inertia;
  }
  std::vector<std::size_t> sizes(k, 0);
  for (int a : assignment) ++sizes[static_cast<std::size_t>(a)];
  return {{"algorithm", algorithm},
          {"assignment", assignment},
          {"sizes", sizes},
          {"vocabulary_size", matrix.n_terms()},
          {"objective", objective}};
}

Json themes_endpoint(const json& body, const Context&) {
  std::vector<text::SentenceRecord> records;
  const auto& sentences = body["sentences"];
  for (std::size_t i = 0; i < sentences.size(); ++i) {
    records.push_back(annotated("s" + std::to_string(i + 1), sentences[i].get<std::string>()));
  }
  const auto assignment = body["assignment"].get<std::vector<int>>();
  const auto k = static_cast<std::size_t>(*std::max_element(assignment.begin(), assignment.end())) + 1;
  themes::ThemeParams p;
  p.alpha = get_or(body, "alpha", p.alpha);
  p.theta_dedupe = get_or(body, "theta_dedupe", p.theta_dedupe);
  wikify::JaccardRelatedness rel;
  auto clusters = Json::array();
  for (const auto& r : themes::extract_themes(assignment, k, records, rel, p)) {
    auto ts = Json::array();
    for (const auto& t : r.themes) {
      ts.push_back({{"title", t.concept_title},
                    {"p_value", t.p_value},
                    {"in_cluster", t.in_cluster},
                    {"in_corpus", t.in_corpus}});
    }
    clusters.push_back({{"cluster", r.cluster}, {"themes", std::move(ts)}});
  }
  return {{"clusters", std::move(clusters)}};
}

Json claim_score_endpoint(const json& body, const Context& c) {
  return {{"score", c.registry.claim->score(annotated("s", body["sentence"].get<std::string>()),
                                            topic_from_json(body["topic"]))}};
}

Json evidence_score_endpoint(const json& body, const Context& c) {
  return {{"score", c.registry.evidence->score(annotated("s", body["sentence"].get<std::string>()),
                                               topic_from_json(body["topic"]))}};
}

Json quality_endpoint(const json& body, const Context& c) {
  return {{"score", c.registry.quality->score(annotated("s", body["sentence"].get<std::string>()))}};
}

Json boundaries_endpoint(const json& body, const Context& c) {
  const auto rec = annotated("s", body["sentence"].get<std::string>());
  const auto span = c.registry.boundary->extract(rec);
  return {{"start", span.start}, {"end", span.end}, {"claim", text::slice(rec.text, span.start, span.end)}};
}

Json stance_endpoint(const json& body, const Context& c) {
  const auto label =
      c.registry.stance->classify(annotated("a", body["argument"].get<std::string>()), topic_from_json(body["topic"]));
  return {{"stance", stance_name(label.label)}, {"confidence", label.confidence}};
}

Json narrative_endpoint(const json& body, const Context& c) {
  const auto params = narrative_params_from_json(body.value("params", json::object()));
  const auto matcher = matcher_named(get_or<std::string>(body, "matcher", "tfidf"));
  const auto speech = narrative::generate_narrative(topic_from_json(body["topic"]),
                                                    body["arguments"].get<std::vector<std::string>>(), params,
                                                    c.registry, *matcher);
  return Json::parse(narrative::speech_json(speech));
}

Json index_query_endpoint(const json& body, const Context& c) {
  std::shared_ptr<const index::SentenceIndex> idx = c.index;
  if (body.contains("sentences")) {
    std::vector<text::SentenceRecord> records;
    for (const auto& s : body["sentences"]) {
      records.push_back(annotated(s["id"].get<std::string>(), s["text"].get<std::string>()));
    }
    idx = std::make_shared<const index::SentenceIndex>(index::SentenceIndex::build(std::move(records)));
  }
  if (!idx) {
    throw Error("index.not_loaded", "no index is loaded and the request carries no sentences", ErrorKind::semantic);
  }
  const auto q = body["query"].get<std::string>();
  const auto plan = index::parse_query(q, get_or<std::uint32_t>(body, "gap_width", index::kDefaultGapMax));
  index::Page page;
  page.limit = get_or<std::size_t>(body, "limit", 100);
  page.offset = get_or<std::size_t>(body, "offset", 0);

  const auto& store = idx->sentences();
  auto matches = Json::array();
  for (const auto& m : index::execute(plan, *idx, page)) {
    const auto it = std::lower_bound(store.begin(), store.end(), m.sentence_id,
                                     [](const text::SentenceRecord& r, const std::string& id) { return r.id < id; });
    auto spans = Json::array();
    for (const auto& s : m.spans) spans.push_back({s.first, s.last});
    matches.push_back({{"id", m.sentence_id}, {"text", it->text}, {"spans", std::move(spans)}});
  }
  return {{"query", q}, {"matches", std::move(matches)}};
}

using Handler = std::function<Json(const json&, const Context&)>;

const std::map<std::string, Handler, std::less<>>& table() {
  static const std::map<std::string, Handler, std::less<>> t = {
      {"/wikify", wikify_endpoint},
      {"/relatedness", relatedness_endpoint},
      {"/cluster", cluster_endpoint},
      {"/themes", themes_endpoint},
      {"/claim/score", claim_score_endpoint},
      {"/claim/boundaries", boundaries_endpoint},
      {"/evidence/score", evidence_score_endpoint},
      {"/quality", quality_endpoint},
      {"/stance", stance_endpoint},
      {"/narrative", narrative_endpoint},
      {"/index/query", index_query_endpoint},
  };
  return t;
}

}  // namespace

const std::vector<std::string>& endpoints() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> out;
    for (const auto& [k, v] : table()) out.push_back(k);
    return out;
  }();
  return names;
}

std::string schema_name(std::string_view endpoint) {
  std::string s(endpoint.substr(endpoint.starts_with('/') ? 1 : 0));
  std::replace(s.begin(), s.end(), '/', '_');
  return s;
}

Json call(std::string_view endpoint, const json& body, const Context& context) {
  const auto it = table().find(endpoint);
  if (it == table().end()) throw Error("route.unknown", "no endpoint " + std::string(endpoint));
  require_schema(schema_name(endpoint), body);
  return it->second(body, context);
}

scorers::Topic topic_from_json(const json& j) {
  scorers::Topic t;
  t.text = j.at("text").get<std::string>();
  if (j.contains("target") && !j["target"].is_null()) t.target = j["target"].get<std::string>();
  if (get_or<std::string>(j, "polarity", "promoting") == "suppressing") t.polarity = scorers::ActionPolarity::suppressing;
  return t;
}

kpa::KpaParams kpa_params_from_json(const json& j) {
  kpa::KpaParams p;
  p.k_max = get_or(j, "k_max", p.k_max);
  p.tau = get_or(j, "tau", p.tau);
  p.tau_dup = get_or(j, "tau_dup", p.tau_dup);
  p.q_min = get_or(j, "q_min", p.q_min);
  p.min_tokens = get_or(j, "min_tokens", p.min_tokens);
  p.max_tokens = get_or(j, "max_tokens", p.max_tokens);
  p.delta = get_or(j, "delta", p.delta);
  p.multi_match = get_or(j, "multi_match", p.multi_match);
  if (j.contains("key_points")) p.given_key_points = j["key_points"].get<std::vector<std::string>>();
  return p;
}

narrative::NarrativeParams narrative_params_from_json(const json& j) {
  narrative::NarrativeParams p;
  if (get_or<std::string>(j, "stance", "pro") == "con") p.stance = scorers::Stance::con;
  p.min_stance_confidence = get_or(j, "min_stance_confidence", p.min_stance_confidence);
  p.top_n_quality = get_or(j, "top_n_quality", p.top_n_quality);
  p.paragraphs = get_or(j, "paragraphs", p.paragraphs);
  p.args_per_paragraph = get_or(j, "args_per_paragraph", p.args_per_paragraph);
  if (get_or<std::string>(j, "mode", "kpa") == "clustering") p.mode = narrative::Mode::clustering;
  p.seed = get_or(j, "seed", p.seed);
  p.restarts = get_or(j, "restarts", p.restarts);
  if (j.contains("kpa")) p.kpa = kpa_params_from_json(j["kpa"]);
  return p;
}

std::unique_ptr<kpa::PairMatcher> matcher_named(const std::string& name) {
  if (name == "tfidf") return std::make_unique<kpa::TfidfCosineMatcher>();
  if (name == "overlap") return std::make_unique<kpa::TokenOverlapMatcher>();
  throw Error("matcher.unknown", "unknown matcher " + name + " (expected tfidf or overlap)");
}

void validate_kpa_request(const json& body) {
  require_schema("kpa", body);
  kpa::validate(kpa_params_from_json(body.value("params", json::object())));
  matcher_named(get_or<std::string>(body, "matcher", "tfidf"));
}

std::vector<kpa::Comment> kpa_comments(const json& body) {
  std::vector<kpa::Comment> out;
  const auto& cs = body.at("comments");
  for (std::size_t i = 0; i < cs.size(); ++i) {
    if (cs[i].is_string()) {
      out.push_back({"c" + std::to_string(i + 1), cs[i].get<std::string>()});
    } else {
      out.push_back({cs[i]["id"].get<std::string>(), cs[i]["text"].get<std::string>()});
    }
  }
  return out;
}

Json run_kpa_request(const json& body, const scorers::ScorerRegistry& registry) {
  validate_kpa_request(body);
  const auto params = kpa_params_from_json(body.value("params", json::object()));
  const auto matcher = matcher_named(get_or<std::string>(body, "matcher", "tfidf"));
  const auto comments = kpa_comments(body);
  return Json::parse(kpa::summary_json(kpa::run_kpa(comments, params, *matcher, registry)));
}

std::string render(const Json& j) { return j.dump(2) + "\n"; }

}  // namespace debater::api
