#include "debater/pipeline.hpp"

#include <algorithm>

#include "debater/error.hpp"

namespace debater::pipeline {

using nlohmann::json;

namespace {

kpa::KeyPointSummary summary_from_json(const api::Json& j) {
  kpa::KeyPointSummary s;
  s.coverage = j["coverage"].get<double>();
  s.total_sentences = j["total_sentences"].get<std::size_t>();
  s.candidate_count = j["candidate_count"].get<std::size_t>();
  for (const auto& kp : j["key_points"]) {
    kpa::KeyPoint k;
    k.text = kp["text"].get<std::string>();
    k.salience = kp["salience"].get<std::size_t>();
    for (const auto& m : kp["matches"]) {
      k.matches.push_back({m["sentence_id"].get<std::string>(), m["text"].get<std::string>(), m["score"].get<double>()});
    }
    s.key_points.push_back(std::move(k));
  }
  return s;
}

}  // namespace

api::Json debate(const json& doc, const narrative::NarrativeParams& params, const kpa::PairMatcher& matcher,
                 const scorers::ScorerRegistry& registry) {
  if (!doc.is_object() || !doc.contains("topic") || !doc.contains("arguments") || !doc["arguments"].is_array()) {
    throw Error("pipeline.input", "expected {\"topic\": {...}, \"arguments\": [...]}");
  }
  const auto topic = api::topic_from_json(doc["topic"]);
  const auto comments = api::kpa_comments(json{{"comments", doc["arguments"]}});
  if (comments.empty()) throw Error("narrative.empty", "no arguments given");

  api::Json split{{"pro", json::array()}, {"con", json::array()}, {"abstain", json::array()}};
  api::Json quality = api::Json::object();
  std::vector<std::pair<double, std::size_t>> sides[2];
  for (std::size_t i = 0; i < comments.size(); ++i) {
    const auto rec = text::make_record(comments[i].id, comments[i].text);
    if (text::word_count(rec.tokens) == 0) {
      split["abstain"].push_back(comments[i].id);
      continue;
    }
    const double q = registry.quality->score(rec);
    quality[comments[i].id] = q;
    try {
      const auto label = registry.stance->classify(rec, topic);
      const bool pro = label.label == scorers::Stance::pro;
      split[pro ? "pro" : "con"].push_back(comments[i].id);
      if (label.confidence >= params.min_stance_confidence) sides[pro ? 0 : 1].emplace_back(q, i);
    } catch (const Error& e) {
      if (e.code() != "stance.abstain") throw;
      split["abstain"].push_back(comments[i].id);
    }
  }

  api::Json key_points = api::Json::object();
  for (int side = 0; side < 2; ++side) {
    auto& members = sides[side];
    std::stable_sort(members.begin(), members.end(), [](const auto& a, const auto& b) {
      return a.first != b.first ? a.first > b.first : a.second < b.second;
    });
    if (members.size() > params.top_n_quality) members.resize(params.top_n_quality);
    std::sort(members.begin(), members.end(), [](const auto& a, const auto& b) { return a.second < b.second; });
    std::vector<kpa::Comment> chosen;
    for (const auto& [q, i] : members) chosen.push_back(comments[i]);
    const char* name = side == 0 ? "pro" : "con";
    try {
      if (chosen.empty()) throw Error("kpa.empty", "no arguments on this side");
      key_points[name] = api::Json::parse(kpa::summary_json(kpa::run_kpa(chosen, params.kpa, matcher, registry)));
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::semantic && e.code() != "kpa.empty") throw;
      key_points[name] = {{"error", {{"code", e.code()}, {"message", e.what()}}}};
    }
  }

  std::vector<std::string> texts;
  for (const auto& c : comments) texts.push_back(c.text);
  const auto speech = narrative::generate_narrative(topic, texts, params, registry, matcher);

  return {{"topic", topic.text},
          {"stance", params.stance == scorers::Stance::pro ? "pro" : "con"},
          {"split", std::move(split)},
          {"quality", std::move(quality)},
          {"key_points", std::move(key_points)},
          {"speech", api::Json::parse(narrative::speech_json(speech))}};
}

std::string debate_report(const api::Json& r) {
  std::string out = "Topic: " + r["topic"].get<std::string>() + "\n";
  out += "Arguments: " + std::to_string(r["split"]["pro"].size()) + " pro, " +
         std::to_string(r["split"]["con"].size()) + " con, " + std::to_string(r["split"]["abstain"].size()) +
         " abstain\n";
  for (const char* side : {"pro", "con"}) {
    out += std::string("\nKey points (") + side + ")\n";
    const auto& kp = r["key_points"][side];
    if (kp.contains("error")) {
      out += "  none: " + kp["error"]["message"].get<std::string>() + "\n";
    } else {
      out += kpa::summary_report(summary_from_json(kp));
    }
  }
  out += "\nSpeech (" + r["stance"].get<std::string>() + ")\n\n" + r["speech"]["full_text"].get<std::string>();
  return out;
}

}  // namespace debater::pipeline
