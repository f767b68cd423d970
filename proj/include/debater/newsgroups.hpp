#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace debater::newsgroups {

struct LabeledCorpus {
  std::vector<std::string> texts;
  std::vector<int> labels;
  std::vector<std::string> label_names;
};

// Drops the header block, quoted lines and the trailing signature block.
std::string strip_post(std::string_view raw);

// Reads one of:
//  - a directory of newsgroup directories holding one post per file;
//  - a directory with 20news-bydate-train and 20news-bydate-test below it
//    (both halves are used);
//  - a JSONL file of {"text": ..., "label": ...} records.
// Posts are stripped with strip_post; invalid UTF-8 is read as Latin-1.
// Throws "data.not_found" and "data.invalid".
LabeledCorpus load(const std::string& path);

// `--data` if given, else DEBATER_20NG_PATH.
std::optional<std::string> locate(const std::optional<std::string>& flag);

struct EvalParams {
  std::size_t k = 20;
  std::size_t restarts = 10;
  std::uint64_t seed = 0;
  std::size_t min_df = 3;
  double max_df = 0.5;
  bool kmeans = false;  // also run spherical K-Means with the same restarts
};

struct EvalResult {
  std::size_t documents = 0;  // after dropping posts with no surviving terms
  std::size_t vocabulary = 0;
  double ami = 0, ari = 0, seconds = 0;
  std::optional<double> kmeans_ami, kmeans_ari, kmeans_seconds;
};

EvalResult evaluate(const LabeledCorpus& corpus, const EvalParams& params);

// "AMI=0.xxx ARI=0.yyy" plus a K-Means line when present.
std::string report(const EvalResult& r);

}  // namespace debater::newsgroups
