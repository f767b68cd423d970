#include "debater/newsgroups.hpp"

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <regex>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "debater/cluster.hpp"
#include "debater/error.hpp"
#include "debater/metrics.hpp"
#include "json.hpp"

namespace debater::newsgroups {

namespace fs = std::filesystem;

namespace {

std::vector<std::string> split_lines(std::string_view s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto nl = s.find('\n', start);
    out.emplace_back(s.substr(start, nl == std::string_view::npos ? std::string_view::npos : nl - start));
    if (nl == std::string_view::npos) break;
    start = nl + 1;
  }
  return out;
}

std::string join_lines(const std::vector<std::string>& lines, std::size_t end) {
  std::string out;
  for (std::size_t i = 0; i < end; ++i) {
    if (i) out += '\n';
    out += lines[i];
  }
  return out;
}

std::string strip_ws(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n\f\v");
  if (b == std::string_view::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n\f\v");
  return std::string(s.substr(b, e - b + 1));
}

bool valid_utf8(std::string_view s) {
  for (std::size_t i = 0; i < s.size();) {
    const auto c = static_cast<unsigned char>(s[i]);
    const std::size_t len = c < 0x80 ? 1 : (c & 0xE0) == 0xC0 ? 2 : (c & 0xF0) == 0xE0 ? 3 : (c & 0xF8) == 0xF0 ? 4 : 0;
    if (len == 0 || i + len > s.size()) return false;
    for (std::size_t k = 1; k < len; ++k) {
      if ((static_cast<unsigned char>(s[i + k]) & 0xC0) != 0x80) return false;
    }
    i += len;
  }
  return true;
}

std::string latin1_to_utf8(std::string_view s) {
  std::string out;
  for (unsigned char c : s) {
    if (c < 0x80) {
      out += static_cast<char>(c);
    } else {
      out += static_cast<char>(0xC0 | (c >> 6));
      out += static_cast<char>(0x80 | (c & 0x3F));
    }
  }
  return out;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error("data.invalid", "cannot read " + p.string());
  std::stringstream ss;
  ss << in.rdbuf();
  auto s = ss.str();
  return valid_utf8(s) ? s : latin1_to_utf8(s);
}

void load_group_dirs(const fs::path& root, LabeledCorpus& out, std::map<std::string, int>& label_ids) {
  std::vector<fs::path> groups;
  for (const auto& e : fs::directory_iterator(root)) {
    if (e.is_directory()) groups.push_back(e.path());
  }
  std::sort(groups.begin(), groups.end());
  for (const auto& g : groups) {
    const auto name = g.filename().string();
    const auto [it, inserted] = label_ids.emplace(name, static_cast<int>(label_ids.size()));
    if (inserted) out.label_names.push_back(name);
    std::vector<fs::path> posts;
    for (const auto& e : fs::directory_iterator(g)) {
      if (e.is_regular_file()) posts.push_back(e.path());
    }
    std::sort(posts.begin(), posts.end());
    for (const auto& p : posts) {
      out.texts.push_back(strip_post(read_file(p)));
      out.labels.push_back(it->second);
    }
  }
}

}  // namespace

std::string strip_post(std::string_view raw) {
  // header: everything up to the first blank line
  std::string body;
  if (const auto h = raw.find("\n\n"); h != std::string_view::npos) body = std::string(raw.substr(h + 2));

  static const std::regex quote(R"((writes in|writes:|wrote:|says:|said:|^In article|^Quoted from|^\||^>))");
  std::vector<std::string> kept;
  for (auto& line : split_lines(body)) {
    if (!std::regex_search(line, quote)) kept.push_back(std::move(line));
  }
  body = join_lines(kept, kept.size());

  // footer: drop from the last line made only of dashes
  const auto lines = split_lines(strip_ws(body));
  for (std::size_t i = lines.size(); i-- > 0;) {
    const auto t = strip_ws(lines[i]);
    if (t.find_first_not_of('-') == std::string::npos) {
      if (i > 0) return join_lines(lines, i);
      break;
    }
  }
  return body;
}

LabeledCorpus load(const std::string& path) {
  const fs::path root(path);
  std::error_code ec;
  if (!fs::exists(root, ec)) throw Error("data.not_found", "20 Newsgroups data not found at " + path);
  LabeledCorpus out;
  std::map<std::string, int> label_ids;
  if (fs::is_regular_file(root)) {
    std::ifstream in(root);
    std::string line;
    std::size_t n = 0;
    while (std::getline(in, line)) {
      ++n;
      if (strip_ws(line).empty()) continue;
      const auto j = nlohmann::json::parse(line, nullptr, false);
      if (j.is_discarded() || !j.contains("text") || !j.contains("label")) {
        throw Error("data.invalid", path + ":" + std::to_string(n) + ": expected {\"text\", \"label\"}");
      }
      const auto label = j["label"].is_string() ? j["label"].get<std::string>() : j["label"].dump();
      const auto [it, inserted] = label_ids.emplace(label, static_cast<int>(label_ids.size()));
      if (inserted) out.label_names.push_back(label);
      out.texts.push_back(j["text"].get<std::string>());
      out.labels.push_back(it->second);
    }
  } else {
    const auto train = root / "20news-bydate-train";
    const auto test = root / "20news-bydate-test";
    if (fs::is_directory(train) && fs::is_directory(test)) {
      load_group_dirs(train, out, label_ids);
      load_group_dirs(test, out, label_ids);
    } else {
      load_group_dirs(root, out, label_ids);
    }
  }
  if (out.texts.empty()) throw Error("data.invalid", "no documents under " + path);
  return out;
}

std::optional<std::string> locate(const std::optional<std::string>& flag) {
  if (flag && !flag->empty()) return flag;
  if (const char* env = std::getenv("DEBATER_20NG_PATH"); env != nullptr && *env != '\0') return std::string(env);
  return std::nullopt;
}

EvalResult evaluate(const LabeledCorpus& corpus, const EvalParams& params) {
  std::vector<std::vector<std::string>> docs;
  docs.reserve(corpus.texts.size());
  std::unordered_map<std::string, std::size_t> df;
  for (const auto& t : corpus.texts) {
    docs.push_back(cluster::bow_terms(t));
    std::unordered_set<std::string> seen(docs.back().begin(), docs.back().end());
    for (const auto& term : seen) ++df[term];
  }
  // Apply the document-frequency window here so posts left without terms can
  // be dropped instead of failing the matrix build.
  const double max_df = params.max_df * static_cast<double>(docs.size());
  std::vector<std::vector<std::string>> kept;
  std::vector<int> labels;
  for (std::size_t i = 0; i < docs.size(); ++i) {
    std::vector<std::string> terms;
    for (auto& t : docs[i]) {
      const auto d = df[t];
      if (d >= params.min_df && static_cast<double>(d) <= max_df) terms.push_back(std::move(t));
    }
    if (terms.empty()) continue;
    kept.push_back(std::move(terms));
    labels.push_back(corpus.labels[i]);
  }
  const auto matrix = cluster::build_bow(kept, 1, 1.0);

  EvalResult r;
  r.documents = matrix.n_docs();
  r.vocabulary = matrix.n_terms();
  cluster::SibParams sp;
  sp.k = params.k;
  sp.restarts = params.restarts;
  sp.seed = params.seed;
  auto t0 = std::chrono::steady_clock::now();
  const auto part = cluster::sib_cluster(matrix, sp);
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  r.ami = metrics::ami(labels, part.assignment);
  r.ari = metrics::ari(labels, part.assignment);
  if (params.kmeans) {
    t0 = std::chrono::steady_clock::now();
    const auto km = cluster::kmeans_cluster(matrix, params.k, params.restarts, params.seed);
    r.kmeans_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    r.kmeans_ami = metrics::ami(labels, km.partition.assignment);
    r.kmeans_ari = metrics::ari(labels, km.partition.assignment);
  }
  return r;
}

std::string report(const EvalResult& r) {
  char buf[160];
  std::snprintf(buf, sizeof buf, "AMI=%.3f ARI=%.3f\n", r.ami, r.ari);
  std::string out = buf;
  if (r.kmeans_ami) {
    std::snprintf(buf, sizeof buf, "KMeans AMI=%.3f ARI=%.3f\n", *r.kmeans_ami, *r.kmeans_ari);
    out += buf;
  }
  return out;
}

}  // namespace debater::newsgroups
