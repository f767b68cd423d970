// Acceptance run: one PASS/FAIL line per criterion. Exit status is the
// number of failures (capped at 1 for the shell).

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numeric>
#include <set>
#include <sstream>

#include "debater/bundled.hpp"
#include "debater/cli.hpp"
#include "debater/metrics.hpp"
#include "debater/newsgroups.hpp"
#include "debater/pipeline.hpp"
#include "debater/service.hpp"
#include "debater/themes.hpp"
#include "httplib.h"
#include "support/corpora.hpp"
#include "support/debate_checks.hpp"
#include "support/naive_index.hpp"
#include "support/naive_wikify.hpp"
#include "support/oracles.hpp"

using namespace debater;
using nlohmann::json;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

const fs::path kRoot(DEBATER_SOURCE_DIR);

int failures = 0;

void report(bool ok, const std::string& name, const std::string& detail) {
  std::printf("%s  %s: %s\n", ok ? "PASS" : "FAIL", name.c_str(), detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

std::string fmt(const char* f, double a, double b = 0, double c = 0, double d = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

double seconds_since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// ---- 20 Newsgroups ------------------------------------------------------------

void newsgroups_criteria() {
  const char* names[] = {"20ng-reproduction", "20ng-kmeans-gap", "20ng-runtime"};
  const auto path = newsgroups::locate(std::nullopt);
  if (!path) {
    for (const char* n : names) report(false, n, "no corpus: set DEBATER_20NG_PATH to the 20 Newsgroups data");
    return;
  }
  newsgroups::EvalParams p;
  p.k = 20;
  p.restarts = 10;
  p.kmeans = true;
  const auto t0 = Clock::now();
  newsgroups::EvalResult r;
  try {
    r = newsgroups::evaluate(newsgroups::load(*path), p);
  } catch (const Error& e) {
    for (const char* n : names) report(false, n, std::string("[") + e.code() + "] " + e.what());
    return;
  }
  const double total = seconds_since(t0);
  report(r.ami >= 0.55 && r.ari >= 0.40 && r.seconds <= 600,
         names[0], fmt("AMI=%.3f ARI=%.3f (floor 0.55 / 0.40), sIB %.0fs", r.ami, r.ari, r.seconds) +
                       " over " + std::to_string(r.documents) + " documents");
  report(r.ami - *r.kmeans_ami >= 0.2, names[1],
         fmt("sIB AMI %.3f vs K-Means AMI %.3f (gap %.3f, need 0.2)", r.ami, *r.kmeans_ami, r.ami - *r.kmeans_ami));
  report(r.seconds <= 5 * *r.kmeans_seconds, names[2],
         fmt("sIB %.1fs vs K-Means %.1fs (ratio %.2f, limit 5); whole run %.0fs", r.seconds, *r.kmeans_seconds,
             r.seconds / *r.kmeans_seconds, total));
}

// ---- sIB ------------------------------------------------------------------------

void sib_criterion() {
  std::string why;
  auto rng = gen::engine(101);

  // sweep-level monotonicity on 100 random instances
  for (int trial = 0; trial < 100 && why.empty(); ++trial) {
    const auto n = gen::uniform(rng, 4, 60);
    auto counts = corpora::random_counts(rng, n, gen::uniform(rng, 3, 25), 0.25);
    cluster::SibParams sp;
    sp.k = gen::uniform(rng, 1, std::min<std::size_t>(5, n));
    sp.restarts = 3;
    sp.seed = static_cast<std::uint64_t>(trial);
    sp.convergence_fraction = 0.0;
    const auto trace = cluster::sib_cluster_traced(corpora::from_counts(counts), sp);
    for (const auto& sweeps : trace.sweep_objectives) {
      for (std::size_t s = 1; s < sweeps.size(); ++s) {
        if (sweeps[s] < sweeps[s - 1] - 1e-9) why = "objective fell in a sweep, instance " + std::to_string(trial);
      }
    }
  }

  // sparse merge cost against the dense formula
  std::size_t pairs = 0;
  for (; pairs < 2000 && why.empty(); ++pairs) {
    const auto m = gen::uniform(rng, 1, 30);
    std::vector<double> p(m, 0.0), q(m, 0.0);
    double ps = 0, qs = 0;
    for (auto& v : q) qs += (v = gen::coin(rng, 0.7) ? random::unit(rng) + 1e-3 : 0.0);
    if (qs == 0) q[0] = qs = 1;
    for (auto& v : q) v /= qs;
    for (auto& v : p) v = gen::coin(rng, 0.3) ? random::unit(rng) + 1e-3 : 0.0;
    p[gen::uniform(rng, 0, m - 1)] += 0.5;
    for (double v : p) ps += v;
    cluster::SparseDistribution doc;
    for (std::size_t y = 0; y < m; ++y) {
      p[y] /= ps;
      if (p[y] > 0) {
        doc.terms.push_back(static_cast<std::uint32_t>(y));
        doc.probs.push_back(p[y]);
      }
    }
    const double pm = random::unit(rng) * 0.2 + 1e-4, qm = random::unit(rng) + 1e-4;
    const double want = oracle::js_merge_cost(p, pm, q, qm);
    if (std::abs(cluster::merge_cost(doc, pm, cluster::Centroid::from_probs(q, qm)) - want) > 1e-9) {
      why = "sparse merge cost off on pair " + std::to_string(pairs);
    }
  }

  // exhaustive optimum on n <= 7, k = 2, three terms
  std::size_t small = 0;
  for (std::size_t n = 2; n <= 7 && why.empty(); ++n) {
    for (int trial = 0; trial < 50 && why.empty(); ++trial, ++small) {
      auto counts = corpora::random_counts(rng, n, 3, 0.5);
      cluster::SibParams sp;
      sp.k = 2;
      sp.restarts = 20;
      sp.seed = static_cast<std::uint64_t>(trial);
      const auto part = cluster::sib_cluster(corpora::from_counts(counts), sp);
      if (std::abs(part.objective - oracle::ib_two_block_optimum(counts)) > 1e-9) {
        why = "missed the optimum at n=" + std::to_string(n);
      }
    }
  }
  report(why.empty(), "sib-correctness",
         why.empty() ? "100 monotone traces, " + std::to_string(pairs) + " merge costs within 1e-9, " +
                           std::to_string(small) + " small instances at the exhaustive optimum"
                     : why);
}

// ---- hypergeometric ----------------------------------------------------------------

void hypergeometric_criterion() {
  std::size_t checked = 0;
  double worst = 0;
  for (std::uint64_t N = 0; N <= 60; ++N) {
    for (std::uint64_t K = 0; K <= N; ++K) {
      for (std::uint64_t n = 0; n <= N; ++n) {
        for (std::uint64_t k = 0; k <= std::min(K, n); ++k, ++checked) {
          worst = std::max(worst, std::abs(themes::enrichment_pvalue({N, K, n, k}) -
                                           oracle::hypergeom_upper_tail(N, K, n, k)));
        }
      }
    }
  }
  report(worst < 1e-12, "hypergeometric-oracle",
         std::to_string(checked) + " grid points, max error " + fmt("%.2e (tolerance 1e-12)", worst));
}

// ---- index --------------------------------------------------------------------------

void index_criterion() {
  auto rng = gen::engine(202);
  const auto corpus = corpora::random_corpus(rng, 1000);
  const auto idx = index::SentenceIndex::build(corpus);
  std::string why;
  std::size_t matches = 0, roundtrips = 0;
  for (int q = 0; q < 200 && why.empty(); ++q) {
    const auto plan = corpora::random_plan(rng);
    const auto got = index::execute(plan, idx);
    if (got != oracle::naive_execute(plan, corpus)) why = "execute differs from the full scan on " + index::print_query(plan);
    matches += got.size();
    const auto text = index::print_query(plan);
    if (!(index::parse_query(text, 6) == index::parse_query(index::print_query(index::parse_query(text, 6)), 6))) {
      why = "round trip failed on " + text;
    }
    ++roundtrips;
  }
  // text-level generated queries round-trip as well
  for (int q = 0; q < 2000 && why.empty(); ++q) {
    const auto src = corpora::random_query_text(rng);
    index::QueryPlan plan;
    try {
      plan = index::parse_query(src);
    } catch (const index::QueryParseError&) {
      continue;
    }
    if (!(index::parse_query(index::print_query(plan)) == plan)) why = "round trip failed on " + src;
    ++roundtrips;
  }
  report(why.empty(), "index-oracle",
         why.empty() ? "200 queries over 1000 sentences identical to the full scan (" + std::to_string(matches) +
                           " matches), " + std::to_string(roundtrips) + " print/parse round trips"
                     : why);
}

// ---- wikify ---------------------------------------------------------------------------

void wikify_criterion() {
  auto rng = gen::engine(303);
  std::string why;
  std::size_t compared = 0;
  for (int trial = 0; trial < 2000 && compared < 1000 && why.empty(); ++trial) {
    const auto rc = corpora::random_lexicon(rng);
    wikify::ConceptLexicon lex;
    try {
      lex = wikify::load_lexicon(rc.titles, rc.redirects, rc.blocked);
    } catch (const Error&) {
      continue;
    }
    const auto rec = text::make_record("s", corpora::random_lexicon_text(rng, 14));
    const auto got = wikify::wikify(rec, lex);
    const auto want = oracle::naive_wikify(rec, lex);
    bool same = got.size() == want.size();
    for (std::size_t m = 0; same && m < got.size(); ++m) {
      same = got[m].concept_title == want[m].concept_title && got[m].first_token == want[m].first &&
             got[m].last_token == want[m].last;
    }
    if (!same) why = "differs from the brute-force scan on \"" + rec.text + "\"";
    ++compared;
  }

  // throughput with 100k surfaces
  static const std::vector<std::string> syll = {"ka", "lo", "mi", "ne", "ru", "sa", "to", "vi", "ze", "po",
                                                "da", "fe", "gu", "hi", "jo", "be", "co", "wu", "xi", "ya"};
  auto word = [&](gen::Engine& r) {
    std::string w;
    const auto n = gen::uniform(r, 2, 3);
    for (std::size_t i = 0; i < n; ++i) w += gen::pick(r, syll);
    return w;
  };
  std::vector<wikify::SurfaceRecord> titles;
  std::set<std::string> seen;
  while (titles.size() < 100'000) {
    std::string s;
    const auto len = gen::uniform(rng, 1, 3);
    for (std::size_t i = 0; i < len; ++i) s += (i ? " " : "") + word(rng);
    if (!seen.insert(s).second) continue;
    auto title = s;
    std::replace(title.begin(), title.end(), ' ', '_');
    titles.push_back({s, "T_" + title});
  }
  const auto lex = wikify::load_lexicon(titles, {}, {});
  std::vector<std::string> texts;
  std::size_t tokens = 0;
  while (tokens < 300'000) {
    std::string t;
    for (int i = 0; i < 25; ++i) t += (i ? " " : "") + word(rng);
    t += ".";
    tokens += 26;
    texts.push_back(std::move(t));
  }
  std::size_t mentions = 0, counted = 0;
  const auto t0 = Clock::now();
  for (const auto& t : texts) {
    const auto rec = text::make_record("t", t);
    counted += rec.tokens.size();
    mentions += wikify::wikify(rec, lex).size();
  }
  const double secs = seconds_since(t0);
  const double rate = static_cast<double>(counted) / secs;
  const bool fast = rate >= 50'000;
  if (why.empty() && compared < 1000) why = "only " + std::to_string(compared) + " lexicons compared";
  report(why.empty() && fast, "wikify-oracle",
         (why.empty() ? std::to_string(compared) + " random lexicon/text pairs equal the brute-force scan; "
                      : why + "; ") +
             fmt("%.0f tokens/s with 100000 surfaces (floor 50000), %.0f mentions", rate, static_cast<double>(mentions)));
}

// ---- KPA ----------------------------------------------------------------------------------

void kpa_criterion() {
  auto rng = gen::engine(404);
  const auto reg = scorers::ScorerRegistry::baseline();
  kpa::TfidfCosineMatcher tfidf;
  kpa::TokenOverlapMatcher overlap;
  std::string why;
  std::size_t reproduced = 0;
  for (int round = 0; round < 50 && why.empty(); ++round) {
    const auto comments = corpora::random_comments(rng, gen::uniform(rng, 5, 40));
    const kpa::PairMatcher& m = round % 2 ? static_cast<const kpa::PairMatcher&>(overlap) : tfidf;
    auto p = corpora::random_params(rng);
    double prev = -1;
    for (std::size_t k = 0; k <= 8; ++k) {
      p.k_max = k;
      const auto s = kpa::run_kpa(comments, p, m, reg);
      if (s.coverage < prev) why = "coverage fell as k_max grew, corpus " + std::to_string(round);
      prev = s.coverage;
      std::size_t assigned = 0;
      for (const auto& kp : s.key_points) assigned += kp.salience;
      // assigned sentences are the distinct matched sentence ids
      std::set<std::string> ids;
      for (const auto& kp : s.key_points) {
        for (const auto& mt : kp.matches) ids.insert(mt.sentence_id);
      }
      if (!p.multi_match && assigned != ids.size()) why = "salience sum differs from assigned sentences";
      if (std::llround(s.coverage * static_cast<double>(s.total_sentences)) != static_cast<long long>(ids.size())) {
        why = "coverage differs from assigned/total";
      }
    }
    p.k_max = 4;
    p.tau_dup = 1.0;
    prev = 2;
    for (double tau : {0.2, 0.35, 0.5, 0.65, 0.8, 0.95}) {
      p.tau = tau;
      const auto s = kpa::run_kpa(comments, p, m, reg);
      if (s.coverage > prev) why = "coverage rose with tau, corpus " + std::to_string(round);
      prev = s.coverage;
    }
    auto q = corpora::random_params(rng);
    auto first = kpa::run_kpa(comments, q, m, reg);
    if (first.key_points.empty()) continue;
    q.given_key_points = std::vector<std::string>{};
    for (const auto& kp : first.key_points) q.given_key_points->push_back(kp.text);
    auto second = kpa::run_kpa(comments, q, m, reg);
    second.candidate_count = first.candidate_count;
    if (!(second == first)) why = "given key points did not reproduce corpus " + std::to_string(round);
    ++reproduced;
  }

  // the six-sentence toy
  std::vector<std::string> toy;
  for (const auto& line : text::data_lines(bundled::file("data/toy/kpa_comments.jsonl"))) {
    toy.push_back(json::parse(line)["text"].get<std::string>());
  }
  kpa::KpaParams tp;
  tp.tau = 0.5;
  tp.k_max = 2;
  tp.delta = 1;
  const auto s = kpa::run_kpa(toy, tp, overlap, reg);
  std::vector<std::size_t> sal;
  for (const auto& kp : s.key_points) sal.push_back(kp.salience);
  std::size_t covered = 0;
  for (auto v : sal) covered += v;
  if (sal != std::vector<std::size_t>{3, 2} || covered != 5 || s.total_sentences != 6) {
    why += (why.empty() ? "" : "; ") + std::string("toy run did not give saliences (3,2) over 6 sentences");
  }
  report(why.empty(), "kpa-properties",
         why.empty() ? "50 corpora monotone in k_max and tau, salience accounting exact, " +
                           std::to_string(reproduced) + " runs reproduced from given key points, toy (3,2) 5/6"
                     : why);
}

void quality_filter_criterion() {
  std::vector<kpa::Comment> survey;
  for (const auto& line : text::data_lines(bundled::file("data/toy/survey.jsonl"))) {
    const auto j = json::parse(line);
    survey.push_back({j["id"].get<std::string>(), j["text"].get<std::string>()});
  }
  const auto reg = scorers::ScorerRegistry::baseline();
  kpa::TfidfCosineMatcher m;
  kpa::KpaParams p;
  const std::size_t half = survey.size() / 2;

  std::vector<std::pair<double, std::size_t>> ranked;
  for (std::size_t i = 0; i < survey.size(); ++i) {
    double q = 0;  // wordless comments rank last
    try {
      q = reg.quality->score(text::make_record(survey[i].id, survey[i].text));
    } catch (const Error&) {
    }
    ranked.emplace_back(q, i);
  }
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) { return a.first != b.first ? a.first > b.first : a.second < b.second; });
  std::vector<kpa::Comment> top;
  for (std::size_t i = 0; i < half; ++i) top.push_back(survey[ranked[i].second]);
  const double top_cov = kpa::run_kpa(top, p, m, reg).coverage;

  double random_sum = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    auto rng = random::make_engine(seed, 0x51);
    auto shuffled = survey;
    random::shuffle(shuffled, rng);
    shuffled.resize(half);
    random_sum += kpa::run_kpa(shuffled, p, m, reg).coverage;
  }
  const double random_cov = random_sum / 20;
  report(top_cov >= random_cov, "kpa-quality-filter",
         fmt("top-quality half coverage %.3f vs random half %.3f (mean of 20 seeds)", top_cov, random_cov));
}

// ---- metrics ------------------------------------------------------------------------------

void metrics_criterion() {
  std::string why;
  std::size_t ari_pairs = 0;
  for (std::size_t n = 1; n <= 6 && why.empty(); ++n) {
    const auto parts = oracle::set_partitions(n);
    for (const auto& u : parts) {
      for (const auto& v : parts) {
        ++ari_pairs;
        if (std::abs(metrics::ari(u, v) - oracle::ari_pairs(u, v)) > 1e-12) why = "ARI differs from pair counting";
      }
    }
  }
  auto rng = gen::engine(505);
  std::size_t emi = 0;
  for (int trial = 0; trial < 60 && why.empty(); ++trial, ++emi) {
    const auto n = gen::uniform(rng, 2, 8);
    const auto u = gen::labeling(rng, n, static_cast<int>(gen::uniform(rng, 1, 4)));
    const auto v = gen::labeling(rng, n, static_cast<int>(gen::uniform(rng, 1, 4)));
    const auto t = metrics::ContingencyTable::from_labelings(u, v);
    if (std::abs(metrics::expected_mutual_information(t) - oracle::expected_mi_by_permutation(u, v)) > 1e-12) {
      why = "E[MI] differs from direct summation";
    }
  }
  auto near = [](double a, double b) { return std::abs(a - b) < 1e-4; };
  const auto prf = metrics::precision_recall_f1(3, 1, 2);
  const auto zero = metrics::precision_recall_f1(0, 0, 0);
  const auto one = metrics::precision_recall_f1(5, 0, 0);
  if (!(near(prf.precision, 0.75) && near(prf.recall, 0.6) && near(prf.f1, 0.6667))) why += " PRF(3,1,2) wrong;";
  if (!(zero.precision == 0 && zero.recall == 0 && zero.f1 == 0)) why += " PRF(0,0,0) wrong;";
  if (!(one.precision == 1 && one.recall == 1 && one.f1 == 1)) why += " PRF(5,0,0) wrong;";
  const std::vector<double> xs{1, 2, 3}, ys{2, 4, 6}, rev{6, 4, 2};
  if (!(near(metrics::pearson(xs, ys), 1) && near(metrics::spearman(xs, ys), 1) && near(metrics::pearson(xs, rev), -1) &&
        near(metrics::spearman(xs, rev), -1))) {
    why += " perfect correlations wrong;";
  }
  const std::vector<double> a{10, 10, 20, 30, 30}, b{1, 2, 3, 4, 5};
  if (std::abs(metrics::spearman(a, b) - 9.0 / std::sqrt(90.0)) > 1e-12) why += " tied Spearman wrong;";
  if (std::abs(metrics::ari(std::vector<int>{1, 1, 2, 2}, std::vector<int>{1, 2, 1, 2}) + 0.5) > 1e-12) {
    why += " ARI hand value wrong;";
  }
  report(why.empty(), "metrics-oracles",
         why.empty() ? std::to_string(ari_pairs) + " partition pairs, " + std::to_string(emi) +
                           " E[MI] tables within 1e-12, PRF and correlation hand values"
                     : why);
}

// ---- pipeline and interface ------------------------------------------------------------

struct CliRun {
  int code;
  std::string out, err;
};

CliRun run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "debater");
  std::istringstream in;
  std::ostringstream out, err;
  const int code = cli::run_cli(args, in, out, err);
  return {code, out.str(), err.str()};
}

void pipeline_criterion() {
  const auto input = (kRoot / "data/toy/debate.json").string();
  const auto a = run_cli({"debate-pipeline", "--input", input});
  const auto b = run_cli({"debate-pipeline", "--input", input});
  const auto ta = run_cli({"debate-pipeline", "--input", input, "--format", "text"});
  const auto tb = run_cli({"debate-pipeline", "--input", input, "--format", "text"});
  std::string why;
  if (a.code != 0 || ta.code != 0) why = "exit " + std::to_string(a.code) + ": " + a.err;
  if (why.empty() && (a.out != b.out || ta.out != tb.out)) why = "runs differ";
  std::size_t paragraphs = 0, args = 0;
  if (why.empty()) {
    const auto doc = json::parse(slurp(input));
    const auto r = api::Json::parse(a.out);
    narrative::NarrativeParams params;
    const auto bad = checks::debate_violations(doc, r, params);
    if (!bad.empty()) why = bad.front() + " (" + std::to_string(bad.size()) + " violations)";
    if (doc["arguments"].size() != 60) why = "toy set is not 60 arguments";
    paragraphs = r["speech"]["paragraphs"].size();
    for (const auto& p : r["speech"]["paragraphs"]) args += p["arguments"].size();
    if (paragraphs == 0) why = "empty speech";
  }
  report(why.empty(), "debate-pipeline",
         why.empty() ? "60 arguments, byte-identical JSON and text across runs, " + std::to_string(paragraphs) +
                           " paragraphs / " + std::to_string(args) + " arguments, all invariants hold"
                     : why);
}

void parity_criterion() {
  service::ServiceConfig cfg;
  cfg.keys = service::KeyStore({"acceptance-key"});
  cfg.jobs.workers = 1;
  service::Service svc(std::move(cfg));
  service::HttpServer server(svc);
  const int port = server.start("127.0.0.1", 0);
  httplib::Client http("127.0.0.1", port);
  http.set_read_timeout(60, 0);
  const httplib::Headers auth{{"x-api-key", "acceptance-key"}};

  std::string why;
  std::size_t n = 0;
  for (const auto& ep : api::endpoints()) {
    const auto name = api::schema_name(ep);
    const auto req = kRoot / "tests/golden/requests" / (name + ".json");
    const auto golden = slurp(kRoot / "tests/golden/responses" / (name + ".json"));
    const auto c = run_cli({"api", ep, "--body", req.string()});
    const auto h = http.Post("/v1" + ep, auth, slurp(req), "application/json");
    if (!h || h->status != 200) {
      why += " " + ep + ": HTTP failed;";
    } else if (c.code != 0) {
      why += " " + ep + ": CLI exit " + std::to_string(c.code) + ";";
    } else if (c.out != golden || h->body != golden) {
      why += " " + ep + ": output differs from golden;";
    } else {
      ++n;
    }
  }

  // KPA goes through the job API on HTTP and the kpa subcommand on the CLI
  const auto toy = (kRoot / "data/toy/kpa_comments.jsonl").string();
  const auto c = run_cli({"kpa", "--input", toy, "--matcher", "overlap", "--tau", "0.5", "--k-max", "2", "--delta", "1"});
  json comments = json::array();
  for (const auto& line : text::data_lines(slurp(toy))) comments.push_back(json::parse(line));
  const json body{{"comments", comments}, {"matcher", "overlap"}, {"params", {{"tau", 0.5}, {"k_max", 2}, {"delta", 1}}}};
  const auto sub = http.Post("/v1/kpa/jobs", auth, body.dump(), "application/json");
  std::string job_result;
  if (sub && sub->status == 202) {
    const auto id = json::parse(sub->body)["job_id"].get<std::string>();
    for (int i = 0; i < 2000; ++i) {
      const auto poll = http.Get("/v1/kpa/jobs/" + id, auth);
      if (!poll) break;
      const auto j = api::Json::parse(poll->body);
      if (j["state"] == "done") {
        job_result = api::render(j["result"]);
        break;
      }
      if (j["state"] == "failed") break;
      std::this_thread::sleep_for(std::chrono::milliseconds(5));
    }
  }
  const auto golden = slurp(kRoot / "tests/golden/kpa_toy.json");
  if (c.out != golden || job_result != golden) {
    why += " kpa: job result or CLI differs from golden;";
  } else {
    ++n;
  }
  server.stop();
  report(why.empty(), "cli-http-parity",
         why.empty() ? std::to_string(n) + " endpoints (11 synchronous + KPA jobs) equal their goldens over CLI and HTTP"
                     : why);
}

}  // namespace

int main() {
  std::printf("acceptance run\n");
  const auto t0 = Clock::now();
  const std::vector<std::function<void()>> steps = {
      newsgroups_criteria, sib_criterion,     hypergeometric_criterion, index_criterion,
      wikify_criterion,    kpa_criterion,     quality_filter_criterion, metrics_criterion,
      pipeline_criterion,  parity_criterion};
  for (const auto& step : steps) {
    try {
      step();
    } catch (const std::exception& e) {
      report(false, "unexpected-exception", e.what());
    }
  }
  std::printf("%d failed, %.0fs\n", failures, seconds_since(t0));
  return failures == 0 ? 0 : 1;
}
