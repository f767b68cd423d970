#include "debater/cli.hpp"

#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "debater/api.hpp"
#include "debater/error.hpp"
#include "debater/newsgroups.hpp"
#include "debater/pipeline.hpp"
#include "debater/service.hpp"
#include "debater/wikify.hpp"

namespace debater::cli {

using nlohmann::json;
using api::Json;

namespace {

std::string slurp(const std::string& path, std::istream& in) {
  std::stringstream ss;
  if (path == "-") {
    ss << in.rdbuf();
    return ss.str();
  }
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error("input.not_found", "cannot read " + path);
  ss << f.rdbuf();
  return ss.str();
}

json parse_json(const std::string& contents, const std::string& what) {
  auto j = json::parse(contents, nullptr, false);
  if (j.is_discarded()) throw Error("input.invalid", what + " is not valid JSON");
  return j;
}

// JSONL records; a bare JSON string line becomes {"text": ...}.
std::vector<json> read_jsonl(const std::string& path, std::istream& in) {
  std::vector<json> out;
  std::istringstream lines(slurp(path, in));
  std::string line;
  std::size_t n = 0;
  while (std::getline(lines, line)) {
    ++n;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    auto j = parse_json(line, path + ":" + std::to_string(n));
    if (j.is_string()) j = json{{"text", j}};
    if (!j.is_object() || !j.contains("text") || !j["text"].is_string()) {
      throw Error("input.invalid", path + ":" + std::to_string(n) + ": expected a string or an object with \"text\"");
    }
    out.push_back(std::move(j));
  }
  return out;
}

json topic_json(const std::string& text, const std::optional<std::string>& target, const std::string& polarity) {
  json t{{"text", text}, {"polarity", polarity}};
  if (target) t["target"] = *target;
  return t;
}

std::string fixed(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

struct Runner {
  std::istream& in;
  std::ostream& out;
  std::string format = "json";
  api::Context context;

  void emit(const Json& j, const std::function<std::string(const Json&)>& as_text) const {
    out << (format == "text" ? as_text(j) : api::render(j));
  }
  Json call(const std::string& endpoint, const json& body) const { return api::call(endpoint, body, context); }
};

struct TopicFlags {
  std::string text;
  std::optional<std::string> target;
  std::string polarity = "promoting";

  void add(CLI::App* app, bool required = true) {
    auto* o = app->add_option("--topic", text, "Topic text");
    if (required) o->required();
    app->add_option("--target", target, "Topic target concept title");
    app->add_option("--polarity", polarity, "Action polarity toward the target")
        ->check(CLI::IsMember({"promoting", "suppressing"}));
  }
  json to_json() const { return topic_json(text, target, polarity); }
};

struct KpaFlags {
  std::size_t k_max = 10, min_tokens = 3, max_tokens = 20, delta = 2;
  double tau = 0.55, tau_dup = 0.75, q_min = 0.5;
  std::optional<std::string> key_points;
  bool multi_match = false;

  void add(CLI::App* app) {
    app->add_option("--k-max", k_max, "Maximum number of key points")->capture_default_str();
    app->add_option("--tau", tau, "Match threshold")->capture_default_str();
    app->add_option("--tau-dup", tau_dup, "Redundancy threshold")->capture_default_str();
    app->add_option("--q-min", q_min, "Minimum candidate quality")->capture_default_str();
    app->add_option("--min-tokens", min_tokens, "Shortest candidate in word tokens")->capture_default_str();
    app->add_option("--max-tokens", max_tokens, "Longest candidate in word tokens")->capture_default_str();
    app->add_option("--delta", delta, "Minimum new sentences a key point must cover")->capture_default_str();
    app->add_option("--key-points", key_points, "File of given key points, one per line");
    app->add_flag("--multi-match", multi_match, "List every sentence over tau under every key point");
  }
  json to_json(std::istream& in) const {
    json p{{"k_max", k_max}, {"tau", tau},           {"tau_dup", tau_dup},     {"q_min", q_min},
           {"min_tokens", min_tokens}, {"max_tokens", max_tokens}, {"delta", delta}, {"multi_match", multi_match}};
    if (key_points) {
      std::vector<std::string> kps;
      for (const auto& line : text::data_lines(slurp(*key_points, in))) {
        auto t = text::trim(line);
        if (!t.empty()) kps.push_back(t);
      }
      p["key_points"] = kps;
    }
    return p;
  }
};

struct NarrativeFlags {
  std::string stance = "pro", mode = "kpa";
  double min_confidence = 0;
  std::size_t top_n = 50, paragraphs = 4, args_per_paragraph = 3, restarts = 10;
  std::uint64_t seed = 0;

  void add(CLI::App* app) {
    app->add_option("--stance", stance, "Requested stance")->check(CLI::IsMember({"pro", "con"}))->capture_default_str();
    app->add_option("--min-confidence", min_confidence, "Minimum stance confidence")->capture_default_str();
    app->add_option("--top-n", top_n, "Arguments kept by quality")->capture_default_str();
    app->add_option("--paragraphs", paragraphs, "Paragraph budget")->capture_default_str();
    app->add_option("--args-per-paragraph", args_per_paragraph, "Arguments per paragraph")->capture_default_str();
    app->add_option("--mode", mode, "Paragraph planning")->check(CLI::IsMember({"kpa", "clustering"}))->capture_default_str();
    app->add_option("--seed", seed, "Clustering seed")->capture_default_str();
    app->add_option("--restarts", restarts, "Clustering restarts")->capture_default_str();
  }
  json to_json(const json& kpa) const {
    return {{"stance", stance},   {"min_stance_confidence", min_confidence}, {"top_n_quality", top_n},
            {"paragraphs", paragraphs}, {"args_per_paragraph", args_per_paragraph}, {"mode", mode},
            {"seed", seed},       {"restarts", restarts},                     {"kpa", kpa}};
  }
};

std::string speech_text(const Json& j) { return j["full_text"].get<std::string>(); }

std::string kpa_text(const Json& j) {
  kpa::KeyPointSummary s;
  s.coverage = j["coverage"].get<double>();
  s.total_sentences = j["total_sentences"].get<std::size_t>();
  for (const auto& kp : j["key_points"]) {
    kpa::KeyPoint k{kp["text"].get<std::string>(), kp["salience"].get<std::size_t>(), {}};
    for (const auto& m : kp["matches"]) {
      k.matches.push_back({m["sentence_id"].get<std::string>(), m["text"].get<std::string>(), m["score"].get<double>()});
    }
    s.key_points.push_back(std::move(k));
  }
  return kpa::summary_report(s);
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err) {
  CLI::App app{"Argument mining and text analytics engine", "debater"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Help for every subcommand");

  Runner run{in, out, "json", {}};
  std::function<void()> action;
  auto format_flag = [&](CLI::App* sub) {
    sub->add_option("--format", run.format, "Output format")->check(CLI::IsMember({"json", "text"}))->capture_default_str();
  };

  // ---- endpoint subcommands ----
  std::string text_arg, input, a, b;
  auto* wik = app.add_subcommand("wikify", "Link concept mentions in text");
  auto* wik_src = wik->add_option("--text", text_arg, "Text to wikify");
  wik->add_option("--input", input, "Read the text from a file ('-' for stdin)")->excludes(wik_src);
  format_flag(wik);
  wik->callback([&] {
    action = [&] {
      const auto t = input.empty() ? text_arg : slurp(input, in);
      run.emit(run.call("/wikify", {{"text", t}}), [](const Json& j) {
        std::string s;
        for (const auto& m : j["mentions"]) {
          s += std::to_string(m["start"].get<std::size_t>()) + "\t" + std::to_string(m["end"].get<std::size_t>()) +
               "\t" + m["surface"].get<std::string>() + "\t" + m["title"].get<std::string>() + "\n";
        }
        return s;
      });
    };
  });

  auto* rel = app.add_subcommand("relatedness", "Relatedness of two concept titles");
  rel->add_option("--a", a, "First title")->required();
  rel->add_option("--b", b, "Second title")->required();
  format_flag(rel);
  rel->callback([&] {
    action = [&] {
      run.emit(run.call("/relatedness", {{"a", a}, {"b", b}}),
               [](const Json& j) { return fixed(j["score"].get<double>()) + "\n"; });
    };
  });

  std::size_t k = 2, restarts = 10, min_df = 1;
  std::uint64_t seed = 0;
  double max_df = 1.0, alpha = 0.05;
  std::string algorithm = "sib";
  auto cluster_body = [&](const std::vector<json>& recs) {
    json docs = json::array();
    for (const auto& r : recs) docs.push_back(r["text"]);
    return json{{"documents", docs}, {"k", k},           {"algorithm", algorithm}, {"restarts", restarts},
                {"seed", seed},      {"min_df", min_df}, {"max_df", max_df}};
  };
  auto* clu = app.add_subcommand("cluster", "Cluster documents (JSONL with \"text\")");
  clu->add_option("--input", input, "Documents, JSONL ('-' for stdin)")->required();
  clu->add_option("--k", k, "Number of clusters")->required();
  clu->add_option("--algorithm", algorithm, "Clustering algorithm")->check(CLI::IsMember({"sib", "kmeans"}))->capture_default_str();
  clu->add_option("--restarts", restarts, "Random restarts")->capture_default_str();
  clu->add_option("--seed", seed, "Seed")->capture_default_str();
  clu->add_option("--min-df", min_df, "Minimum document frequency")->capture_default_str();
  clu->add_option("--max-df", max_df, "Maximum document frequency fraction")->capture_default_str();
  format_flag(clu);
  clu->callback([&] {
    action = [&] {
      const auto recs = read_jsonl(input, in);
      run.emit(run.call("/cluster", cluster_body(recs)), [&](const Json& j) {
        std::string s;
        for (std::size_t i = 0; i < recs.size(); ++i) {
          const auto id = recs[i].contains("id") ? recs[i]["id"].get<std::string>() : std::to_string(i + 1);
          s += id + "\t" + std::to_string(j["assignment"][i].get<int>()) + "\n";
        }
        return s;
      });
    };
  });

  auto* thm = app.add_subcommand("themes", "Enriched concepts per cluster (JSONL with \"text\" and \"cluster\")");
  thm->add_option("--input", input, "Sentences, JSONL ('-' for stdin)")->required();
  thm->add_option("--k", k, "Cluster first with sIB when records carry no \"cluster\"");
  thm->add_option("--alpha", alpha, "False discovery rate")->capture_default_str();
  thm->add_option("--seed", seed, "Seed for the clustering step")->capture_default_str();
  format_flag(thm);
  thm->callback([&, thm] {
    action = [&, thm] {
      const auto recs = read_jsonl(input, in);
      json sentences = json::array(), assignment = json::array();
      const bool labelled = std::all_of(recs.begin(), recs.end(), [](const json& r) { return r.contains("cluster"); });
      if (labelled) {
        for (const auto& r : recs) assignment.push_back(r["cluster"]);
      } else {
        if (thm->count("--k") == 0) throw Error("input.invalid", "records lack \"cluster\"; pass --k to cluster them");
        assignment = run.call("/cluster", cluster_body(recs))["assignment"];
      }
      for (const auto& r : recs) sentences.push_back(r["text"]);
      run.emit(run.call("/themes", {{"sentences", sentences}, {"assignment", assignment}, {"alpha", alpha}}),
               [](const Json& j) {
                 std::string s;
                 for (const auto& c : j["clusters"]) {
                   s += "cluster " + std::to_string(c["cluster"].get<int>()) + ":";
                   if (c["themes"].empty()) s += " (none)";
                   s += "\n";
                   for (const auto& t : c["themes"]) {
                     char buf[96];
                     std::snprintf(buf, sizeof buf, " (p=%.3g, %llu of %llu)", t["p_value"].get<double>(),
                                   static_cast<unsigned long long>(t["in_cluster"].get<std::uint64_t>()),
                                   static_cast<unsigned long long>(t["in_corpus"].get<std::uint64_t>()));
                     s += "  " + t["title"].get<std::string>() + buf + "\n";
                   }
                 }
                 return s;
               });
    };
  });

  std::string sentence;
  TopicFlags topic;
  auto score_text = [](const Json& j) { return fixed(j["score"].get<double>()) + "\n"; };
  for (const auto& [name, endpoint, needs_topic] :
       std::vector<std::tuple<std::string, std::string, bool>>{{"claim-score", "/claim/score", true},
                                                               {"evidence-score", "/evidence/score", true},
                                                               {"quality", "/quality", false},
                                                               {"claim-boundaries", "/claim/boundaries", false}}) {
    auto* sub = app.add_subcommand(name, "Score one sentence (" + endpoint + ")");
    sub->add_option("--sentence", sentence, "Sentence text")->required();
    if (needs_topic) topic.add(sub);
    format_flag(sub);
    sub->callback([&, endpoint, needs_topic] {
      action = [&, endpoint, needs_topic] {
        json body{{"sentence", sentence}};
        if (needs_topic) body["topic"] = topic.to_json();
        if (endpoint == "/claim/boundaries") {
          run.emit(run.call(endpoint, body), [](const Json& j) { return j["claim"].get<std::string>() + "\n"; });
        } else {
          run.emit(run.call(endpoint, body), score_text);
        }
      };
    });
  }

  std::string argument;
  auto* sta = app.add_subcommand("stance", "Pro/con label of an argument toward a topic");
  sta->add_option("--argument", argument, "Argument text")->required();
  topic.add(sta);
  format_flag(sta);
  sta->callback([&] {
    action = [&] {
      run.emit(run.call("/stance", {{"argument", argument}, {"topic", topic.to_json()}}), [](const Json& j) {
        return j["stance"].get<std::string>() + " " + fixed(j["confidence"].get<double>()) + "\n";
      });
    };
  });

  // ---- index ----
  std::string index_path, output, query;
  std::uint32_t gap_width = index::kDefaultGapMax;
  std::size_t limit = 100, offset = 0;
  bool no_concepts = false;
  auto* idx = app.add_subcommand("index", "Sentence index");
  idx->require_subcommand(1);
  auto* ib = idx->add_subcommand("build", "Build an index file from JSONL sentences with \"id\" and \"text\"");
  ib->add_option("--input", input, "Sentences, JSONL ('-' for stdin)")->required();
  ib->add_option("--output", output, "Index file to write")->required();
  ib->add_flag("--no-concepts", no_concepts, "Skip the CONCEPT layer");
  format_flag(ib);
  ib->callback([&] {
    action = [&] {
      std::vector<text::SentenceRecord> records;
      const auto recs = read_jsonl(input, in);
      for (std::size_t i = 0; i < recs.size(); ++i) {
        auto id = recs[i].contains("id") ? recs[i]["id"].get<std::string>() : std::to_string(i + 1);
        auto r = text::make_record(std::move(id), recs[i]["text"].get<std::string>());
        if (!no_concepts) wikify::annotate_concepts(r, wikify::bundled_lexicon());
        records.push_back(std::move(r));
      }
      const auto built = index::SentenceIndex::build(std::move(records));
      built.save_file(output);
      run.emit({{"sentences", built.size()}, {"terms", built.term_count()}, {"layers", built.layer_names()}},
               [](const Json& j) {
                 return "indexed " + std::to_string(j["sentences"].get<std::size_t>()) + " sentences, " +
                        std::to_string(j["terms"].get<std::size_t>()) + " terms\n";
               });
    };
  });
  auto* iq = idx->add_subcommand("query", "Run a query against an index file");
  auto* iq_index = iq->add_option("--index", index_path, "Index file");
  iq->add_option("--input", input, "Or: sentences JSONL indexed on the fly")->excludes(iq_index);
  iq->add_option("--query", query, "Query text")->required();
  iq->add_option("--gap-width", gap_width, "Widest gap for '...'")->capture_default_str();
  iq->add_option("--limit", limit, "Page size")->capture_default_str();
  iq->add_option("--offset", offset, "Page start")->capture_default_str();
  format_flag(iq);
  iq->callback([&] {
    action = [&] {
      json body{{"query", query}, {"gap_width", gap_width}, {"limit", limit}, {"offset", offset}};
      if (!input.empty()) {
        json sentences = json::array();
        const auto recs = read_jsonl(input, in);
        for (std::size_t i = 0; i < recs.size(); ++i) {
          sentences.push_back({{"id", recs[i].contains("id") ? recs[i]["id"].get<std::string>() : std::to_string(i + 1)},
                               {"text", recs[i]["text"]}});
        }
        body["sentences"] = sentences;
      } else if (!index_path.empty()) {
        run.context.index = std::make_shared<const index::SentenceIndex>(index::SentenceIndex::load_file(index_path));
      } else {
        throw Error("input.invalid", "pass --index or --input");
      }
      run.emit(run.call("/index/query", body), [](const Json& j) {
        std::string s;
        for (const auto& m : j["matches"]) s += m["id"].get<std::string>() + "\t" + m["text"].get<std::string>() + "\n";
        return s;
      });
    };
  });
  auto* id_dump = idx->add_subcommand("dump", "Print an index file's postings and layers as JSON");
  id_dump->add_option("--index", index_path, "Index file")->required();
  id_dump->callback([&] { action = [&] { out << index::SentenceIndex::load_file(index_path).dump_json() << "\n"; }; });

  // ---- kpa / narrative / pipeline ----
  KpaFlags kflags;
  std::string matcher = "tfidf";
  auto matcher_flag = [&](CLI::App* sub) {
    sub->add_option("--matcher", matcher, "Sentence matcher")->check(CLI::IsMember({"tfidf", "overlap"}))->capture_default_str();
  };
  auto* kp = app.add_subcommand("kpa", "Key point analysis over comments (JSONL with \"text\", optional \"id\")");
  kp->add_option("--input", input, "Comments, JSONL ('-' for stdin)")->required();
  kflags.add(kp);
  matcher_flag(kp);
  format_flag(kp);
  kp->callback([&] {
    action = [&] {
      json comments = json::array();
      const auto recs = read_jsonl(input, in);
      for (std::size_t i = 0; i < recs.size(); ++i) {
        comments.push_back({{"id", recs[i].contains("id") ? recs[i]["id"].get<std::string>() : "c" + std::to_string(i + 1)},
                            {"text", recs[i]["text"]}});
      }
      json body{{"comments", comments}, {"params", kflags.to_json(in)}, {"matcher", matcher}};
      run.emit(api::run_kpa_request(body, run.context.registry), kpa_text);
    };
  });

  NarrativeFlags nflags;
  auto* nar = app.add_subcommand("narrative", "Write a speech from arguments (JSONL with \"text\")");
  nar->add_option("--input", input, "Arguments, JSONL ('-' for stdin)")->required();
  topic.add(nar);
  nflags.add(nar);
  kflags.add(nar);
  matcher_flag(nar);
  format_flag(nar);
  nar->callback([&] {
    action = [&] {
      json arguments = json::array();
      for (const auto& r : read_jsonl(input, in)) arguments.push_back(r["text"]);
      json body{{"topic", topic.to_json()},
                {"arguments", arguments},
                {"params", nflags.to_json(kflags.to_json(in))},
                {"matcher", matcher}};
      run.emit(run.call("/narrative", body), speech_text);
    };
  });

  auto* deb = app.add_subcommand("debate-pipeline", "Stance split, quality, key points and a speech for a debate file");
  deb->add_option("--input", input, "Debate JSON {\"topic\", \"arguments\"} ('-' for stdin)")->required();
  nflags.add(deb);
  kflags.add(deb);
  matcher_flag(deb);
  format_flag(deb);
  deb->callback([&] {
    action = [&] {
      const auto doc = parse_json(slurp(input, in), input);
      const auto params = api::narrative_params_from_json(nflags.to_json(kflags.to_json(in)));
      narrative::validate(params);
      const auto m = api::matcher_named(matcher);
      run.emit(pipeline::debate(doc, params, *m, run.context.registry), pipeline::debate_report);
    };
  });

  std::string endpoint;
  auto* raw = app.add_subcommand("api", "Call a service endpoint with a JSON body");
  raw->add_option("endpoint", endpoint, "Endpoint path, e.g. /wikify")->required();
  raw->add_option("--body", input, "Request body file ('-' for stdin)")->required();
  raw->add_option("--index", index_path, "Index file for /index/query");
  raw->callback([&] {
    action = [&] {
      if (!index_path.empty()) {
        run.context.index = std::make_shared<const index::SentenceIndex>(index::SentenceIndex::load_file(index_path));
      }
      out << api::render(run.call(endpoint, parse_json(slurp(input, in), input)));
    };
  });

  // ---- evaluation and service ----
  std::optional<std::string> data;
  newsgroups::EvalParams ep;
  auto* ev = app.add_subcommand("eval-20ng", "Cluster 20 Newsgroups and report AMI and ARI");
  ev->add_option("--data", data, "Corpus directory or JSONL (default: DEBATER_20NG_PATH)");
  ev->add_option("--k", ep.k, "Number of clusters")->capture_default_str();
  ev->add_option("--restarts", ep.restarts, "Random restarts")->capture_default_str();
  ev->add_option("--seed", ep.seed, "Seed")->capture_default_str();
  ev->add_option("--min-df", ep.min_df, "Minimum document frequency")->capture_default_str();
  ev->add_option("--max-df", ep.max_df, "Maximum document frequency fraction")->capture_default_str();
  ev->add_flag("--kmeans", ep.kmeans, "Also run spherical K-Means");
  format_flag(ev);
  ev->callback([&] {
    action = [&] {
      const auto path = newsgroups::locate(data);
      if (!path) throw Error("data.not_found", "no 20 Newsgroups data: pass --data or set DEBATER_20NG_PATH");
      const auto r = newsgroups::evaluate(newsgroups::load(*path), ep);
      Json j{{"documents", r.documents}, {"vocabulary", r.vocabulary}, {"k", ep.k},     {"restarts", ep.restarts},
             {"ami", r.ami},             {"ari", r.ari},               {"seconds", r.seconds}};
      if (r.kmeans_ami) {
        j["kmeans"] = {{"ami", *r.kmeans_ami}, {"ari", *r.kmeans_ari}, {"seconds", *r.kmeans_seconds}};
      }
      if (run.format == "text") {
        out << newsgroups::report(r);
      } else {
        out << api::render(j);
      }
    };
  });

  std::string host = "0.0.0.0", keys_file;
  int port = 0;
  std::size_t workers = 0, max_comments = 100'000, max_body = 10 * 1024 * 1024;
  double ttl_seconds = 3600;
  auto* srv = app.add_subcommand("serve", "Run the HTTP service");
  srv->add_option("--host", host, "Bind address")->capture_default_str();
  srv->add_option("--port", port, "Port (default: DEBATER_PORT or 8800)");
  srv->add_option("--keys-file", keys_file, "API key file (default: DEBATER_KEYS_FILE)");
  srv->add_option("--index", index_path, "Index file served by /v1/index/query");
  srv->add_option("--workers", workers, "KPA job workers (0: available parallelism)")->capture_default_str();
  srv->add_option("--max-comments", max_comments, "Comment limit per KPA job")->capture_default_str();
  srv->add_option("--max-body", max_body, "Request body limit in bytes")->capture_default_str();
  srv->add_option("--job-ttl", ttl_seconds, "Seconds finished jobs are kept")->capture_default_str();
  srv->callback([&] {
    action = [&] {
      service::ServiceConfig config;
      if (keys_file.empty()) {
        config = service::config_from_environment();
      } else {
        config.keys = service::KeyStore::load_file(keys_file);
        if (config.keys.size() == 0) throw Error("config.keys", "no keys in " + keys_file);
      }
      if (port == 0) {
        const char* env = std::getenv("DEBATER_PORT");
        port = env != nullptr && *env != '\0' ? std::atoi(env) : 8800;
      }
      if (!index_path.empty()) {
        config.context.index = std::make_shared<const index::SentenceIndex>(index::SentenceIndex::load_file(index_path));
      }
      config.jobs.workers = workers;
      config.jobs.max_comments = max_comments;
      config.jobs.ttl = std::chrono::milliseconds(static_cast<long long>(ttl_seconds * 1000));
      config.max_body_bytes = max_body;
      service::Service svc(std::move(config));
      service::HttpServer server(svc);
      err << "listening on " << host << ":" << port << "\n";
      server.listen(host, port);
    };
  });

  std::vector<const char*> argv;
  for (const auto& s : args) argv.push_back(s.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    const CLI::App* sub = &app;
    while (!sub->get_subcommands().empty()) sub = sub->get_subcommands().front();
    out << sub->help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n";
    // help of the deepest subcommand that was selected
    const CLI::App* sub = &app;
    while (!sub->get_subcommands().empty()) sub = sub->get_subcommands().front();
    err << sub->help();
    return 2;
  }

  try {
    if (action) action();
    return 0;
  } catch (const Error& e) {
    err << "error: [" << e.code() << "] " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace debater::cli
