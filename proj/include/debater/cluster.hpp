#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "debater/text.hpp"

namespace debater::cluster {

struct SparseEntry {
  std::uint32_t term = 0;
  std::uint32_t count = 0;
};

// Compressed-row bag-of-words counts. Rows are sorted by term index.
class SparseDocMatrix {
 public:
  SparseDocMatrix() = default;
  // Takes ownership of per-document rows; validates the structural invariants.
  SparseDocMatrix(std::vector<std::vector<SparseEntry>> rows, std::vector<std::string> vocabulary);

  std::size_t n_docs() const { return row_ptr_.empty() ? 0 : row_ptr_.size() - 1; }
  std::size_t n_terms() const { return vocabulary_.size(); }
  std::size_t nnz() const { return entries_.size(); }

  std::span<const SparseEntry> row(std::size_t doc) const {
    return {entries_.data() + row_ptr_[doc], entries_.data() + row_ptr_[doc + 1]};
  }
  std::uint64_t row_total(std::size_t doc) const { return row_totals_[doc]; }

  const std::vector<std::string>& vocabulary() const { return vocabulary_; }
  // -1 when absent.
  std::int64_t term_index(const std::string& term) const;

 private:
  std::vector<std::size_t> row_ptr_;
  std::vector<SparseEntry> entries_;
  std::vector<std::uint64_t> row_totals_;
  std::vector<std::string> vocabulary_;
  std::unordered_map<std::string, std::uint32_t> index_;
};

// Documents are token lists; terms survive when min_df <= df and
// df <= max_df_fraction * n_docs. Vocabulary is sorted lexicographically.
SparseDocMatrix build_bow(std::span<const std::vector<std::string>> docs, std::size_t min_df,
                          double max_df_fraction);

// Lowercased word tokens of at least two characters; the term stream the
// clustering entry points feed to build_bow.
std::vector<std::string> bow_terms(std::string_view text);

struct Partition {
  std::vector<int> assignment;
  std::vector<double> cluster_mass;                  // p(t)
  std::vector<std::vector<double>> cluster_centroid;  // p(y|t), dense over terms
  double objective = 0.0;                             // I(T;Y) in bits

  std::size_t k() const { return cluster_mass.size(); }
};

struct SibParams {
  std::size_t k = 2;
  std::size_t restarts = 10;
  std::size_t max_sweeps = 15;
  double convergence_fraction = 0.02;
  std::uint64_t seed = 0;
  // Restarts run on up to this many threads; 0 means hardware concurrency.
  std::size_t threads = 0;
};

// Per-restart diagnostics of a sIB run.
struct SibTrace {
  Partition best;
  std::size_t best_restart = 0;
  std::vector<double> restart_objectives;
  // Objective after initialisation and after every sweep, per restart.
  std::vector<std::vector<double>> sweep_objectives;
};

// Sequential Information Bottleneck with a uniform document prior p(x) = 1/n.
Partition sib_cluster(const SparseDocMatrix& matrix, const SibParams& params);
SibTrace sib_cluster_traced(const SparseDocMatrix& matrix, const SibParams& params);

// A cluster summarised for merge-cost evaluation: centroid p(y|t), its mass
// p(t) and the entropy H(p(y|t)) in bits.
struct Centroid {
  std::vector<double> probs;
  double mass = 0.0;
  double entropy_bits = 0.0;

  static Centroid from_probs(std::vector<double> probs, double mass);
};

struct SparseDistribution {
  std::vector<std::uint32_t> terms;
  std::vector<double> probs;
};

// (p(x)+p(t)) * JS_pi(p(y|x), p(y|t)) in bits, touching only the document's
// support. Throws on non-positive mass.
double merge_cost(const SparseDistribution& doc, double doc_mass, const Centroid& cluster);
// Same quantity from the dense definition; O(n_terms).
double merge_cost_dense(std::span<const double> p, double p_mass, std::span<const double> q,
                        double q_mass);

// I(T;Y) in bits of the assignment under the uniform document prior.
double mutual_information(std::span<const int> assignment, std::size_t k,
                          const SparseDocMatrix& matrix);
double mutual_information(const Partition& partition, const SparseDocMatrix& matrix);

// Builds mass, centroids and objective for a hard assignment.
Partition make_partition(std::span<const int> assignment, std::size_t k, const SparseDocMatrix& matrix);

struct KMeansResult {
  Partition partition;
  double inertia = 0.0;  // sum over documents of 1 - cos(x, centroid)
};

// Spherical K-Means over L2-normalised TF-IDF rows (idf = ln(n/df)),
// k-means++ seeding, best of `restarts` by inertia.
KMeansResult kmeans_cluster(const SparseDocMatrix& matrix, std::size_t k, std::size_t restarts,
                            std::uint64_t seed, std::size_t max_iterations = 100);

}  // namespace debater::cluster
