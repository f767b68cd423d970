#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace debater::metrics {

// Co-occurrence counts between two labelings; labels are remapped to dense
// ids in order of first appearance.
struct ContingencyTable {
  std::vector<std::vector<std::uint64_t>> counts;  // rows: u clusters, cols: v clusters
  std::vector<std::uint64_t> row_sums;
  std::vector<std::uint64_t> col_sums;
  std::uint64_t n = 0;

  static ContingencyTable from_labelings(std::span<const int> u, std::span<const int> v);
};

// Natural-log entropy of a labeling's cluster-size distribution.
double entropy(std::span<const std::uint64_t> sizes, std::uint64_t n);
double mutual_information(const ContingencyTable& table);
// Exact expectation of MI under the permutation (hypergeometric) model.
double expected_mutual_information(const ContingencyTable& table);

// Adjusted mutual information, arithmetic-mean normalisation. Returns 1 when
// the labelings are identical up to relabeling, 0 when the normaliser vanishes
// otherwise.
double ami(std::span<const int> u, std::span<const int> v);
double ari(std::span<const int> u, std::span<const int> v);

struct Prf {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};
Prf precision_recall_f1(std::uint64_t tp, std::uint64_t fp, std::uint64_t fn);

double pearson(std::span<const double> xs, std::span<const double> ys);
// Pearson on average ranks.
double spearman(std::span<const double> xs, std::span<const double> ys);
std::vector<double> average_ranks(std::span<const double> xs);

}  // namespace debater::metrics
