#include <algorithm>
#include <cmath>
#include <limits>

#include "debater/cluster.hpp"
#include "debater/error.hpp"
#include "debater/random.hpp"

namespace debater::cluster {

namespace {

struct TfidfRows {
  std::vector<std::size_t> offsets;
  std::vector<std::uint32_t> terms;
  std::vector<double> weights;
};

TfidfRows tfidf_rows(const SparseDocMatrix& m) {
  const std::size_t n = m.n_docs();
  std::vector<std::size_t> df(m.n_terms(), 0);
  for (std::size_t d = 0; d < n; ++d) {
    for (auto e : m.row(d)) ++df[e.term];
  }
  TfidfRows rows;
  rows.offsets.push_back(0);
  for (std::size_t d = 0; d < n; ++d) {
    const std::size_t begin = rows.weights.size();
    double norm = 0.0;
    for (auto e : m.row(d)) {
      const double w = e.count * std::log(static_cast<double>(n) / static_cast<double>(df[e.term]));
      rows.terms.push_back(e.term);
      rows.weights.push_back(w);
      norm += w * w;
    }
    if (norm > 0.0) {
      norm = std::sqrt(norm);
      for (std::size_t i = begin; i < rows.weights.size(); ++i) rows.weights[i] /= norm;
    }
    rows.offsets.push_back(rows.weights.size());
  }
  return rows;
}

// Centroids are unit vectors stored term-major: centers[y * k + t].
class SphericalKMeans {
 public:
  SphericalKMeans(const TfidfRows& rows, std::size_t n_docs, std::size_t n_terms, std::size_t k)
      : rows_(rows), n_(n_docs), v_(n_terms), k_(k), centers_(n_terms * k, 0.0), sims_(k) {}

  double run(random::Engine& rng, std::size_t max_iterations, std::vector<int>& assignment) {
    seed_plus_plus(rng);
    assignment.assign(n_, -1);
    std::vector<double> best_sim(n_, 0.0);
    for (std::size_t it = 0; it < max_iterations; ++it) {
      bool changed = false;
      for (std::size_t x = 0; x < n_; ++x) {
        similarities(x);
        std::size_t arg = 0;
        for (std::size_t t = 1; t < k_; ++t) {
          if (sims_[t] > sims_[arg]) arg = t;
        }
        best_sim[x] = sims_[arg];
        if (assignment[x] != static_cast<int>(arg)) {
          assignment[x] = static_cast<int>(arg);
          changed = true;
        }
      }
      if (!changed && it > 0) break;
      update(assignment, best_sim);
    }
    double inertia = 0.0;
    for (std::size_t x = 0; x < n_; ++x) {
      similarities(x);
      inertia += 1.0 - sims_[static_cast<std::size_t>(assignment[x])];
    }
    return std::max(0.0, inertia);
  }

 private:
  void similarities(std::size_t x) {
    std::fill(sims_.begin(), sims_.end(), 0.0);
    for (std::size_t e = rows_.offsets[x]; e < rows_.offsets[x + 1]; ++e) {
      const double w = rows_.weights[e];
      const double* c = centers_.data() + rows_.terms[e] * k_;
      for (std::size_t t = 0; t < k_; ++t) sims_[t] += w * c[t];
    }
  }

  void set_center_to_doc(std::size_t t, std::size_t x) {
    for (std::size_t y = 0; y < v_; ++y) centers_[y * k_ + t] = 0.0;
    for (std::size_t e = rows_.offsets[x]; e < rows_.offsets[x + 1]; ++e) {
      centers_[rows_.terms[e] * k_ + t] = rows_.weights[e];
    }
  }

  // k-means++ with D(x)^2 = ||x - c||^2 = 2 - 2 cos(x, c) on the unit sphere.
  void seed_plus_plus(random::Engine& rng) {
    std::fill(centers_.begin(), centers_.end(), 0.0);
    std::vector<char> chosen(n_, 0);
    std::vector<double> d2(n_, std::numeric_limits<double>::max());
    std::size_t first = random::index(rng, n_);
    set_center_to_doc(0, first);
    chosen[first] = 1;
    std::vector<double> last(v_, 0.0);
    std::size_t last_doc = first;
    for (std::size_t t = 1; t < k_; ++t) {
      for (std::size_t e = rows_.offsets[last_doc]; e < rows_.offsets[last_doc + 1]; ++e) {
        last[rows_.terms[e]] = rows_.weights[e];
      }
      double total = 0.0;
      for (std::size_t x = 0; x < n_; ++x) {
        double sim = 0.0;
        for (std::size_t e = rows_.offsets[x]; e < rows_.offsets[x + 1]; ++e) {
          sim += rows_.weights[e] * last[rows_.terms[e]];
        }
        d2[x] = std::min(d2[x], std::max(0.0, 2.0 - 2.0 * sim));
        if (chosen[x]) d2[x] = 0.0;
        total += d2[x];
      }
      std::size_t pick = n_;
      if (total > 0.0) {
        double r = random::unit(rng) * total;
        for (std::size_t x = 0; x < n_; ++x) {
          if (d2[x] <= 0.0) continue;
          pick = x;
          r -= d2[x];
          if (r < 0.0) break;
        }
      }
      if (pick == n_) {
        std::vector<std::size_t> free;
        for (std::size_t x = 0; x < n_; ++x) {
          if (!chosen[x]) free.push_back(x);
        }
        pick = free[random::index(rng, free.size())];
      }
      for (std::size_t e = rows_.offsets[last_doc]; e < rows_.offsets[last_doc + 1]; ++e) {
        last[rows_.terms[e]] = 0.0;
      }
      set_center_to_doc(t, pick);
      chosen[pick] = 1;
      last_doc = pick;
    }
  }

  void update(const std::vector<int>& assignment, const std::vector<double>& best_sim) {
    std::fill(centers_.begin(), centers_.end(), 0.0);
    std::vector<std::size_t> members(k_, 0);
    for (std::size_t x = 0; x < n_; ++x) {
      const auto t = static_cast<std::size_t>(assignment[x]);
      ++members[t];
      for (std::size_t e = rows_.offsets[x]; e < rows_.offsets[x + 1]; ++e) {
        centers_[rows_.terms[e] * k_ + t] += rows_.weights[e];
      }
    }
    // Empty clusters are reseeded with the documents farthest from their centroids.
    std::vector<std::size_t> far(n_);
    for (std::size_t i = 0; i < n_; ++i) far[i] = i;
    std::stable_sort(far.begin(), far.end(), [&](auto a, auto b) { return best_sim[a] < best_sim[b]; });
    std::size_t next_far = 0;
    for (std::size_t t = 0; t < k_; ++t) {
      if (members[t] == 0 && next_far < n_) set_center_to_doc(t, far[next_far++]);
    }
    std::vector<double> norm(k_, 0.0);
    for (std::size_t y = 0; y < v_; ++y) {
      for (std::size_t t = 0; t < k_; ++t) norm[t] += centers_[y * k_ + t] * centers_[y * k_ + t];
    }
    for (auto& v : norm) v = v > 0.0 ? 1.0 / std::sqrt(v) : 0.0;
    for (std::size_t y = 0; y < v_; ++y) {
      for (std::size_t t = 0; t < k_; ++t) centers_[y * k_ + t] *= norm[t];
    }
  }

  const TfidfRows& rows_;
  std::size_t n_, v_, k_;
  std::vector<double> centers_;
  std::vector<double> sims_;
};

}  // namespace

KMeansResult kmeans_cluster(const SparseDocMatrix& matrix, std::size_t k, std::size_t restarts,
                            std::uint64_t seed, std::size_t max_iterations) {
  if (k < 1) throw Error("cluster.params", "k must be at least 1");
  if (restarts < 1) throw Error("cluster.params", "restarts must be at least 1");
  if (matrix.n_docs() == 0) throw Error("bow.empty_corpus", "empty corpus");
  if (k > matrix.n_docs()) {
    throw Error("cluster.k_too_large", "k (" + std::to_string(k) + ") exceeds the number of documents (" +
                                           std::to_string(matrix.n_docs()) + ")");
  }
  const auto rows = tfidf_rows(matrix);
  std::vector<int> best_assignment;
  double best_inertia = std::numeric_limits<double>::infinity();
  for (std::size_t r = 0; r < restarts; ++r) {
    auto rng = random::make_engine(seed, r);
    SphericalKMeans km(rows, matrix.n_docs(), matrix.n_terms(), k);
    std::vector<int> assignment;
    const double inertia = km.run(rng, max_iterations, assignment);
    if (inertia < best_inertia) {
      best_inertia = inertia;
      best_assignment = std::move(assignment);
    }
  }
  KMeansResult result;
  result.inertia = best_inertia;
  result.partition = make_partition(best_assignment, k, matrix);
  return result;
}

}  // namespace debater::cluster
