#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <thread>

#include "debater/cluster.hpp"
#include "debater/error.hpp"
#include "debater/random.hpp"

namespace debater::cluster {

namespace {

constexpr double kLn2 = 0.693147180559945309417232121458;

inline double xlogx(double u) { return u > 0.0 ? u * std::log(u) : 0.0; }

// Immutable per-matrix quantities shared by all restarts. Joint mass of a
// document entry is a = p(x) p(y|x) with p(x) = 1/n.
struct DocModel {
  std::size_t n = 0;
  std::size_t n_terms = 0;
  double px = 0.0;
  double f_px = 0.0;
  double min_entry = 0.0;
  double sum_f_py = 0.0;
  std::vector<std::size_t> offsets;  // CSR over documents
  std::vector<std::uint32_t> terms;
  std::vector<double> mass;          // a
  std::vector<double> f_mass;        // a log a
  std::vector<double> doc_f_sum;     // sum of a log a over the row

  explicit DocModel(const SparseDocMatrix& m) : n(m.n_docs()), n_terms(m.n_terms()) {
    px = 1.0 / static_cast<double>(n);
    f_px = xlogx(px);
    min_entry = std::numeric_limits<double>::max();
    offsets.reserve(n + 1);
    offsets.push_back(0);
    std::vector<double> py(n_terms, 0.0);
    for (std::size_t d = 0; d < n; ++d) {
      const double total = static_cast<double>(m.row_total(d));
      double fsum = 0.0;
      for (auto e : m.row(d)) {
        const double a = px * static_cast<double>(e.count) / total;
        terms.push_back(e.term);
        mass.push_back(a);
        f_mass.push_back(xlogx(a));
        fsum += xlogx(a);
        py[e.term] += a;
        min_entry = std::min(min_entry, a);
      }
      doc_f_sum.push_back(fsum);
      offsets.push_back(terms.size());
    }
    for (double p : py) sum_f_py += xlogx(p);
  }
};

// One sIB restart. Cluster joint sums S[y][t] = p(t, y) are stored term-major
// so a document's support touches contiguous k-wide blocks.
class SibRun {
 public:
  SibRun(const DocModel& model, std::size_t k)
      : m_(model),
        k_(k),
        assignment_(model.n, 0),
        members_(k, 0),
        cluster_mass_(k, 0.0),
        joint_(model.n_terms * k, 0.0),
        f_joint_(model.n_terms * k, 0.0),
        acc_(k, 0.0),
        cost_(k, 0.0) {
    clamp_ = 0.5 * m_.min_entry;
  }

  std::vector<double> run(const SibParams& params, random::Engine& rng) {
    std::vector<double> trace;
    for (std::size_t x = 0; x < m_.n; ++x) assignment_[x] = static_cast<int>(random::index(rng, k_));
    rebuild();
    repair_empty();
    trace.push_back(objective_bits());

    std::vector<std::size_t> order(m_.n);
    for (std::size_t i = 0; i < m_.n; ++i) order[i] = i;
    const double threshold = params.convergence_fraction * static_cast<double>(m_.n);
    for (std::size_t sweep = 0; sweep < params.max_sweeps; ++sweep) {
      random::shuffle(order, rng);
      std::size_t changed = 0;
      for (std::size_t x : order) {
        const auto from = static_cast<std::size_t>(assignment_[x]);
        remove(x, from);
        costs(x);
        std::size_t best = from;
        double best_cost = cost_[from];
        const double tie = 1e-12 * m_.px;
        for (std::size_t t = 0; t < k_; ++t) {
          if (cost_[t] < best_cost - tie) {
            best = t;
            best_cost = cost_[t];
          }
        }
        add(x, best);
        if (best != from) ++changed;
      }
      rebuild();
      repair_empty();
      trace.push_back(objective_bits());
      if (static_cast<double>(changed) < threshold) break;
    }
    return trace;
  }

  const std::vector<int>& assignment() const { return assignment_; }

  double objective_bits() const {
    double sum_f = 0.0;
    for (double f : f_joint_) sum_f += f;
    double sum_ft = 0.0;
    for (double p : cluster_mass_) sum_ft += xlogx(p);
    return std::max(0.0, (sum_f - sum_ft - m_.sum_f_py) / kLn2);
  }

 private:
  void rebuild() {
    std::fill(joint_.begin(), joint_.end(), 0.0);
    std::fill(members_.begin(), members_.end(), 0);
    for (std::size_t x = 0; x < m_.n; ++x) {
      const auto t = static_cast<std::size_t>(assignment_[x]);
      ++members_[t];
      for (std::size_t e = m_.offsets[x]; e < m_.offsets[x + 1]; ++e) {
        joint_[m_.terms[e] * k_ + t] += m_.mass[e];
      }
    }
    for (std::size_t i = 0; i < joint_.size(); ++i) f_joint_[i] = xlogx(joint_[i]);
    for (std::size_t t = 0; t < k_; ++t) cluster_mass_[t] = static_cast<double>(members_[t]) * m_.px;
  }

  void remove(std::size_t x, std::size_t t) {
    for (std::size_t e = m_.offsets[x]; e < m_.offsets[x + 1]; ++e) {
      double& s = joint_[m_.terms[e] * k_ + t];
      s -= m_.mass[e];
      if (s < clamp_) s = 0.0;
      f_joint_[m_.terms[e] * k_ + t] = xlogx(s);
    }
    --members_[t];
    cluster_mass_[t] = static_cast<double>(members_[t]) * m_.px;
  }

  void add(std::size_t x, std::size_t t) {
    for (std::size_t e = m_.offsets[x]; e < m_.offsets[x + 1]; ++e) {
      double& s = joint_[m_.terms[e] * k_ + t];
      s += m_.mass[e];
      f_joint_[m_.terms[e] * k_ + t] = xlogx(s);
    }
    ++members_[t];
    cluster_mass_[t] = static_cast<double>(members_[t]) * m_.px;
    assignment_[x] = static_cast<int>(t);
  }

  // Merge cost (nats) of document x into every cluster, x already removed:
  //   sum_y [f(a_y) + f(S_ty) - f(a_y + S_ty)] + f(px + pt) - f(px) - f(pt)
  // with f(u) = u ln u. Equal to (px + pt) * JS_pi(p(y|x), p(y|t)).
  void costs(std::size_t x) {
    std::fill(acc_.begin(), acc_.end(), 0.0);
    const std::size_t k = k_;
    double* acc = acc_.data();
    for (std::size_t e = m_.offsets[x]; e < m_.offsets[x + 1]; ++e) {
      const double a = m_.mass[e];
      const double* s = joint_.data() + m_.terms[e] * k;
      const double* f = f_joint_.data() + m_.terms[e] * k;
      for (std::size_t t = 0; t < k; ++t) {
        const double u = a + s[t];
        acc[t] += f[t] - u * std::log(u);
      }
    }
    const double doc_f = m_.doc_f_sum[x];
    for (std::size_t t = 0; t < k; ++t) {
      const double pt = cluster_mass_[t];
      cost_[t] = acc[t] + doc_f + xlogx(m_.px + pt) - m_.f_px - xlogx(pt);
    }
  }

  double own_cost(std::size_t x) {
    const auto t = static_cast<std::size_t>(assignment_[x]);
    remove(x, t);
    costs(x);
    const double c = cost_[t];
    add(x, t);
    return c;
  }

  // Moves the document with the highest merge cost to its own cluster into
  // each empty cluster.
  void repair_empty() {
    bool moved = false;
    for (std::size_t e = 0; e < k_; ++e) {
      if (members_[e] > 0) continue;
      double worst = -1.0;
      std::size_t pick = m_.n;
      for (std::size_t x = 0; x < m_.n; ++x) {
        if (members_[static_cast<std::size_t>(assignment_[x])] < 2) continue;
        const double c = own_cost(x);
        if (c > worst) {
          worst = c;
          pick = x;
        }
      }
      if (pick == m_.n) break;  // fewer documents than clusters cannot happen past validation
      remove(pick, static_cast<std::size_t>(assignment_[pick]));
      add(pick, e);
      moved = true;
    }
    if (moved) rebuild();
  }

  const DocModel& m_;
  std::size_t k_;
  double clamp_ = 0.0;
  std::vector<int> assignment_;
  std::vector<std::size_t> members_;
  std::vector<double> cluster_mass_;
  std::vector<double> joint_;
  std::vector<double> f_joint_;
  std::vector<double> acc_;
  std::vector<double> cost_;
};

void check_params(const SparseDocMatrix& matrix, const SibParams& params) {
  if (params.k < 1) throw Error("cluster.params", "k must be at least 1");
  if (params.restarts < 1) throw Error("cluster.params", "restarts must be at least 1");
  if (!(params.convergence_fraction < 1.0) || params.convergence_fraction < 0.0) {
    throw Error("cluster.params", "convergence fraction must lie in [0, 1)");
  }
  if (matrix.n_docs() == 0) throw Error("bow.empty_corpus", "empty corpus");
  if (params.k > matrix.n_docs()) {
    throw Error("cluster.k_too_large", "k (" + std::to_string(params.k) + ") exceeds the number of documents (" +
                                           std::to_string(matrix.n_docs()) + ")");
  }
}

}  // namespace

SibTrace sib_cluster_traced(const SparseDocMatrix& matrix, const SibParams& params) {
  check_params(matrix, params);
  const DocModel model(matrix);

  struct Outcome {
    std::vector<int> assignment;
    std::vector<double> trace;
    double objective = 0.0;
  };
  std::vector<Outcome> outcomes(params.restarts);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t r = next++; r < params.restarts; r = next++) {
      auto rng = random::make_engine(params.seed, r);
      SibRun run(model, params.k);
      outcomes[r].trace = run.run(params, rng);
      outcomes[r].assignment = run.assignment();
      outcomes[r].objective = run.objective_bits();
    }
  };
  std::size_t threads = params.threads ? params.threads : std::thread::hardware_concurrency();
  threads = std::clamp<std::size_t>(threads, 1, params.restarts);
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t i = 0; i < threads; ++i) pool.emplace_back(worker);
  }

  SibTrace trace;
  std::size_t best = 0;
  for (std::size_t r = 0; r < outcomes.size(); ++r) {
    trace.restart_objectives.push_back(outcomes[r].objective);
    trace.sweep_objectives.push_back(std::move(outcomes[r].trace));
    if (outcomes[r].objective > outcomes[best].objective) best = r;
  }
  trace.best_restart = best;
  trace.best = make_partition(outcomes[best].assignment, params.k, matrix);
  return trace;
}

Partition sib_cluster(const SparseDocMatrix& matrix, const SibParams& params) {
  return sib_cluster_traced(matrix, params).best;
}

Centroid Centroid::from_probs(std::vector<double> probs, double mass) {
  Centroid c;
  double h = 0.0;
  for (double q : probs) h -= xlogx(q);
  c.probs = std::move(probs);
  c.mass = mass;
  c.entropy_bits = h / kLn2;
  return c;
}

double merge_cost(const SparseDistribution& doc, double doc_mass, const Centroid& cluster) {
  if (!(doc_mass > 0.0) || !(cluster.mass > 0.0)) {
    throw Error("cluster.zero_mass", "merge cost requires positive masses");
  }
  if (doc.terms.size() != doc.probs.size()) {
    throw Error("cluster.invalid", "sparse distribution terms and probabilities differ in length");
  }
  const double total = doc_mass + cluster.mass;
  const double pi1 = doc_mass / total;
  const double pi2 = cluster.mass / total;
  const double hq = cluster.entropy_bits * kLn2;

  // H(pi1 p + pi2 q) = H over the document support + the remainder of pi2 q,
  // which is recovered from H(q) without visiting terms outside the support.
  double hp = 0.0, h_mix_support = 0.0, q_support = 0.0, hq_support = 0.0;
  for (std::size_t i = 0; i < doc.terms.size(); ++i) {
    const double p = doc.probs[i];
    const double q = cluster.probs.at(doc.terms[i]);
    hp -= xlogx(p);
    h_mix_support -= xlogx(pi1 * p + pi2 * q);
    q_support += q;
    hq_support -= xlogx(q);
  }
  const double h_rest = -std::log(pi2) * pi2 * (1.0 - q_support) + pi2 * (hq - hq_support);
  const double js = h_mix_support + h_rest - pi1 * hp - pi2 * hq;
  return total * js / kLn2;
}

double merge_cost_dense(std::span<const double> p, double p_mass, std::span<const double> q, double q_mass) {
  if (!(p_mass > 0.0) || !(q_mass > 0.0)) {
    throw Error("cluster.zero_mass", "merge cost requires positive masses");
  }
  if (p.size() != q.size()) throw Error("cluster.invalid", "distributions differ in dimension");
  const double total = p_mass + q_mass;
  const double pi1 = p_mass / total, pi2 = q_mass / total;
  double hm = 0.0, hp = 0.0, hq = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    hm -= xlogx(pi1 * p[i] + pi2 * q[i]);
    hp -= xlogx(p[i]);
    hq -= xlogx(q[i]);
  }
  return total * (hm - pi1 * hp - pi2 * hq) / kLn2;
}

Partition make_partition(std::span<const int> assignment, std::size_t k, const SparseDocMatrix& matrix) {
  const std::size_t n = matrix.n_docs();
  if (assignment.size() != n) throw Error("cluster.invalid", "assignment length differs from document count");
  const double px = 1.0 / static_cast<double>(n);
  Partition part;
  part.assignment.assign(assignment.begin(), assignment.end());
  part.cluster_mass.assign(k, 0.0);
  part.cluster_centroid.assign(k, std::vector<double>(matrix.n_terms(), 0.0));
  for (std::size_t d = 0; d < n; ++d) {
    const int t = assignment[d];
    if (t < 0 || static_cast<std::size_t>(t) >= k) throw Error("cluster.invalid", "cluster id out of range");
    part.cluster_mass[t] += px;
    const double total = static_cast<double>(matrix.row_total(d));
    for (auto e : matrix.row(d)) part.cluster_centroid[t][e.term] += px * e.count / total;
  }
  for (std::size_t t = 0; t < k; ++t) {
    if (part.cluster_mass[t] > 0.0) {
      for (double& v : part.cluster_centroid[t]) v /= part.cluster_mass[t];
    }
  }
  part.objective = mutual_information(assignment, k, matrix);
  return part;
}

double mutual_information(std::span<const int> assignment, std::size_t k, const SparseDocMatrix& matrix) {
  const std::size_t n = matrix.n_docs();
  if (assignment.size() != n) throw Error("cluster.invalid", "assignment length differs from document count");
  if (n == 0) return 0.0;
  const double px = 1.0 / static_cast<double>(n);
  std::vector<double> joint(matrix.n_terms() * k, 0.0), py(matrix.n_terms(), 0.0), pt(k, 0.0);
  for (std::size_t d = 0; d < n; ++d) {
    const auto t = static_cast<std::size_t>(assignment[d]);
    if (t >= k) throw Error("cluster.invalid", "cluster id out of range");
    pt[t] += px;
    const double total = static_cast<double>(matrix.row_total(d));
    for (auto e : matrix.row(d)) {
      const double a = px * e.count / total;
      joint[e.term * k + t] += a;
      py[e.term] += a;
    }
  }
  double mi = 0.0;
  for (std::size_t y = 0; y < matrix.n_terms(); ++y) {
    for (std::size_t t = 0; t < k; ++t) {
      const double j = joint[y * k + t];
      if (j > 0.0) mi += j * std::log(j / (pt[t] * py[y]));
    }
  }
  return std::max(0.0, mi / kLn2);
}

double mutual_information(const Partition& partition, const SparseDocMatrix& matrix) {
  return mutual_information(partition.assignment, partition.k(), matrix);
}

}  // namespace debater::cluster
